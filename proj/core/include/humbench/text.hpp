#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace humbench::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

// Maps typographic apostrophes/quotes to ASCII so that label names typed
// either way compare equal.
std::string fold_quotes(std::string_view s);

std::vector<std::string> split(std::string_view s, char delim);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Whitespace-delimited word count.
std::size_t count_words(std::string_view s);

// Sentences are maximal runs of text separated by '.', '!', '?' or newlines
// that contain at least one alphanumeric character.
std::size_t count_sentences(std::string_view s);

// Collapses every run of whitespace to a single space and trims.
std::string normalize_whitespace(std::string_view s);

bool contains_ci(std::string_view haystack, std::string_view needle);

// Position of the last case-insensitive occurrence, or npos.
std::size_t rfind_ci(std::string_view haystack, std::string_view needle);

std::string hex_encode(std::string_view bytes);

}  // namespace humbench::text
