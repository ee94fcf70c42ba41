#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace saver {

// Small string helpers shared by the parser, the detectors, and the metrics.

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
bool starts_with_ci(std::string_view s, std::string_view prefix);

std::vector<std::string> split(std::string_view s, char sep);

// Whitespace tokenization of raw text (no normalization).
std::vector<std::string> tokenize(std::string_view s);

// Answer normalization: lowercase, strip punctuation, drop the articles
// a/an/the, collapse whitespace.
std::string normalize_answer(std::string_view s);

// normalize_answer followed by whitespace split.
std::vector<std::string> normalize_tokens(std::string_view s);

// Overlap coefficient |A∩B| / min(|A|,|B|) over deduplicated normalized
// tokens; 0 when either side is empty.
double token_overlap(std::string_view a, std::string_view b);

std::optional<int> parse_int(std::string_view s);

// FNV-1a over bytes; used for request fingerprints and seed derivation.
std::uint64_t fnv1a64(std::string_view data);
std::uint64_t fnv1a64_mix(std::uint64_t seed, std::string_view data);
std::string to_hex(std::uint64_t v);

}  // namespace saver
