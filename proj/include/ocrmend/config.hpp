#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "ocrmend/correct.hpp"
#include "ocrmend/error.hpp"
#include "ocrmend/noise_filter.hpp"
#include "ocrmend/reference_corpus.hpp"

namespace ocrmend {

struct ServiceConfig {
    std::string endpoint;    // empty = no live endpoint configured
    std::string api_key;     // never dumped or fingerprinted
    std::string model_id = "default";
    size_t max_output_chars = 4000;
    int inflight_limit = 8;
    RetryPolicy retry;
};

struct PipelineConfig {
    FilterConfig filter;
    SearchConfig search;
    GatePolicy gate;
    double intact_threshold = 0.995;
    size_t short_len_words = 4;
    std::string reference_style = "text";  // "text" | "tagged"
    ServiceConfig service;

    void validate() const {
        filter.validate();
        search.validate();
        gate.validate();
        if (!(intact_threshold >= 0.0 && intact_threshold <= 1.0))
            throw Error(ErrorCode::config_invalid, "intact_threshold must be in [0, 1]");
        if (reference_style != "text" && reference_style != "tagged")
            throw Error(ErrorCode::config_invalid, "reference_style must be text or tagged");
        if (service.inflight_limit < 1)
            throw Error(ErrorCode::config_invalid, "inflight_limit must be >= 1");
    }
};

namespace configdetail {

inline std::string trim(std::string_view s) {
    size_t begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return {};
    size_t end = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(begin, end - begin + 1));
}

inline double to_double(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::config_invalid, "bad numeric value for " + key + ": " + value);
    }
}

inline long to_long(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        long v = std::stol(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::config_invalid, "bad integer value for " + key + ": " + value);
    }
}

} // namespace configdetail

/// Parse `key = value` lines; '#' starts a comment. Unknown keys are an
/// error so typos do not silently fall back to defaults.
inline PipelineConfig parse_config(std::string_view text) {
    PipelineConfig cfg;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string t = configdetail::trim(line);
        if (t.empty()) continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::config_invalid,
                        "line " + std::to_string(lineno) + ": expected key = value");
        std::string key = configdetail::trim(t.substr(0, eq));
        std::string value = configdetail::trim(t.substr(eq + 1));
        using configdetail::to_double;
        using configdetail::to_long;

        if (key == "alpha") cfg.filter.alpha = to_double(key, value);
        else if (key == "figure_overlap_min") cfg.filter.figure_overlap_min = to_double(key, value);
        else if (key == "para_gap_factor") cfg.filter.para_gap_factor = to_double(key, value);
        else if (key == "block_size") cfg.search.block_size = static_cast<size_t>(to_long(key, value));
        else if (key == "stride") cfg.search.stride = static_cast<size_t>(to_long(key, value));
        else if (key == "found_threshold") cfg.search.found_threshold = to_double(key, value);
        else if (key == "pad") cfg.search.pad = static_cast<size_t>(to_long(key, value));
        else if (key == "intact_threshold") cfg.intact_threshold = to_double(key, value);
        else if (key == "short_len_words") cfg.short_len_words = static_cast<size_t>(to_long(key, value));
        else if (key == "gate_min_similarity") cfg.gate.min_similarity = to_double(key, value);
        else if (key == "gate_max_length_delta_chars") cfg.gate.max_length_delta_chars = to_double(key, value);
        else if (key == "gate_max_length_delta_ratio") cfg.gate.max_length_delta_ratio = to_double(key, value);
        else if (key == "reference_style") cfg.reference_style = value;
        else if (key == "model_id") cfg.service.model_id = value;
        else if (key == "endpoint") cfg.service.endpoint = value;
        else if (key == "api_key") cfg.service.api_key = value;
        else if (key == "max_output_chars") cfg.service.max_output_chars = static_cast<size_t>(to_long(key, value));
        else if (key == "inflight_limit") cfg.service.inflight_limit = static_cast<int>(to_long(key, value));
        else if (key == "retry_max_attempts") cfg.service.retry.max_attempts = static_cast<int>(to_long(key, value));
        else if (key == "retry_base_delay_ms") cfg.service.retry.base_delay_ms = static_cast<int>(to_long(key, value));
        else if (key == "retry_max_delay_ms") cfg.service.retry.max_delay_ms = static_cast<int>(to_long(key, value));
        else throw Error(ErrorCode::config_invalid, "unknown config key: " + key);
    }
    cfg.validate();
    return cfg;
}

inline PipelineConfig load_config_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::config_invalid, "cannot open config file " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

/// Credentials come from the environment when set: LLM_ENDPOINT, LLM_API_KEY,
/// LLM_MODEL override the file values.
inline void apply_env_overrides(PipelineConfig& cfg) {
    if (const char* v = std::getenv("LLM_ENDPOINT")) cfg.service.endpoint = v;
    if (const char* v = std::getenv("LLM_API_KEY")) cfg.service.api_key = v;
    if (const char* v = std::getenv("LLM_MODEL")) cfg.service.model_id = v;
}

/// Canonical sorted key=value dump of everything that affects output bytes.
/// The API key is deliberately absent.
inline std::string dump_effective_config(const PipelineConfig& cfg) {
    std::map<std::string, std::string> kv;
    auto put_num = [&](const std::string& key, double v) {
        std::ostringstream os;
        os << std::setprecision(17) << v;
        kv[key] = os.str();
    };
    put_num("alpha", cfg.filter.alpha);
    put_num("figure_overlap_min", cfg.filter.figure_overlap_min);
    put_num("para_gap_factor", cfg.filter.para_gap_factor);
    kv["block_size"] = std::to_string(cfg.search.block_size);
    kv["stride"] = std::to_string(cfg.search.effective_stride());
    put_num("found_threshold", cfg.search.found_threshold);
    kv["pad"] = std::to_string(cfg.search.pad);
    put_num("intact_threshold", cfg.intact_threshold);
    kv["short_len_words"] = std::to_string(cfg.short_len_words);
    put_num("gate_min_similarity", cfg.gate.min_similarity);
    put_num("gate_max_length_delta_chars", cfg.gate.max_length_delta_chars);
    put_num("gate_max_length_delta_ratio", cfg.gate.max_length_delta_ratio);
    kv["reference_style"] = cfg.reference_style;
    kv["model_id"] = cfg.service.model_id;
    kv["endpoint"] = cfg.service.endpoint;
    kv["max_output_chars"] = std::to_string(cfg.service.max_output_chars);
    std::string out;
    for (const auto& [key, value] : kv) out += key + " = " + value + "\n";
    return out;
}

/// FNV-1a 64-bit over the canonical dump; identity check for resume.
inline std::string config_fingerprint(const PipelineConfig& cfg) {
    std::string dump = dump_effective_config(cfg);
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

} // namespace ocrmend
