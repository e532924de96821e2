#pragma once

#include <string>
#include <string_view>

#include "ocrmend/error.hpp"
#include "ocrmend/unicode.hpp"

namespace ocrmend {

// The two prompt templates used by the correction passes. Kept together in
// this one header so the exact wording sent to the model is auditable and
// versioned in a single place.

inline constexpr std::string_view kReferenceCorrectionPrompt =
    "Given an html content as below:\n"
    "\n"
    "{reference_html}\n"
    "\n"
    "Providing a text which may need correction as it is generated from an imperfect OCR tool.\n"
    "Use html content as reference source to correct below input text if needed:\n"
    "\n"
    "<input-text>{paragraph}</input-text>\n"
    "\n"
    "Follow orthography, diacritic and punctuation of the reference, only correct words existed within input text!\n"
    "Answer with the corrected text only: no commentary, no markup.\n"
    "Never wrap the answer in XML or HTML tags.\n";

inline constexpr std::string_view kMinorSpellPrompt =
    "Given a text as below:\n"
    "<input-text>{text}</input-text>\n"
    "\n"
    "Provide adjacent content nearby the input:\n"
    "<content>{nearby}</content>\n"
    "\n"
    "Correct spelling only if needed (just minimal change!)\n"
    "Return the original if it is already fine (or it is random nonsense)\n"
    "Answer with the corrected text only: no commentary, no markup.\n"
    "Never wrap the answer in XML or HTML tags.\n";

namespace promptdetail {

inline std::string fill_slot(std::string_view tmpl, std::string_view slot, std::string_view value) {
    std::string marker = "{" + std::string(slot) + "}";
    size_t pos = tmpl.find(marker);
    std::string out(tmpl);
    out.replace(pos, marker.size(), value);
    return out;
}

} // namespace promptdetail

/// Instantiate the reference-guided correction prompt. The paragraph must not
/// contain the input-text delimiters; refusing beats silently injecting.
inline std::string render_prompt1(std::string_view reference, std::string_view paragraph) {
    if (is_blank(reference)) throw Error(ErrorCode::empty_slot, "reference text is empty");
    if (is_blank(paragraph)) throw Error(ErrorCode::empty_slot, "paragraph text is empty");
    if (paragraph.find("</input-text>") != std::string_view::npos ||
        paragraph.find("<input-text>") != std::string_view::npos)
        throw Error(ErrorCode::delimiter_collision, "paragraph contains input-text delimiter");
    std::string out = promptdetail::fill_slot(kReferenceCorrectionPrompt, "reference_html", reference);
    return promptdetail::fill_slot(out, "paragraph", paragraph);
}

/// Instantiate the minor-spell-correction prompt; `nearby` may be empty when
/// the page offers no adjacent context.
inline std::string render_prompt2(std::string_view text, std::string_view nearby) {
    if (is_blank(text)) throw Error(ErrorCode::empty_slot, "input text is empty");
    if (text.find("</input-text>") != std::string_view::npos ||
        text.find("<input-text>") != std::string_view::npos)
        throw Error(ErrorCode::delimiter_collision, "text contains input-text delimiter");
    if (nearby.find("</content>") != std::string_view::npos)
        throw Error(ErrorCode::delimiter_collision, "nearby context contains content delimiter");
    std::string out = promptdetail::fill_slot(kMinorSpellPrompt, "text", text);
    return promptdetail::fill_slot(out, "nearby", nearby);
}

} // namespace ocrmend
