#pragma once

// Umbrella header. The HTTP client lives in http_client.hpp and is not
// pulled in here, so library users without a live endpoint do not pay for
// the httplib include.

#include "ocrmend/completion.hpp"
#include "ocrmend/config.hpp"
#include "ocrmend/correct.hpp"
#include "ocrmend/epub.hpp"
#include "ocrmend/error.hpp"
#include "ocrmend/levenshtein.hpp"
#include "ocrmend/metrics.hpp"
#include "ocrmend/noise_filter.hpp"
#include "ocrmend/ocr_page.hpp"
#include "ocrmend/pipeline.hpp"
#include "ocrmend/prompts.hpp"
#include "ocrmend/reference_corpus.hpp"
#include "ocrmend/unicode.hpp"
#include "ocrmend/zip.hpp"
