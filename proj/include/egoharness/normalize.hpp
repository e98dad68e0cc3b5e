#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace egoharness {

/// Canonical form of an entity name: lowercase, trimmed, internal whitespace
/// collapsed to single spaces. Lowercasing is Unicode-aware for Latin-1,
/// Latin Extended-A, Greek and Cyrillic; other code points pass through.
std::string normalize_name(std::string_view raw);

/// Whitespace tokens of an already normalized name.
std::vector<std::string> tokenize(std::string_view normalized);

/// Half-up rounding to `places` decimals (non-negative amounts).
double round_half_up(double value, int places);

/// Fixed-precision rendering used by the canonical digest form.
std::string format_fixed(double value, int places = 6);

/// Sentences split on [.!?] followed by whitespace (or end of text).
std::size_t count_sentences(std::string_view text);

std::string trim(std::string_view s);

} // namespace egoharness
