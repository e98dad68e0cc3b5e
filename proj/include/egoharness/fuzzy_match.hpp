#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace egoharness {

enum class MatchTier { None, Exact, Substring, TokenOverlap };

std::string_view to_string(MatchTier tier);

struct MatchSet {
    std::string query; // normalized
    std::vector<std::string> matches;
    MatchTier tier = MatchTier::None;

    bool empty() const { return matches.empty(); }
};

inline constexpr double kDefaultTokenThreshold = 0.5;

/// Jaccard similarity of the whitespace token sets of two normalized names.
double token_jaccard(std::string_view a, std::string_view b);

/// Tiered lookup: exact, then substring in either direction, then token
/// overlap at or above `threshold`. Returns every name hit by the first
/// non-empty tier, in candidate order.
MatchSet fuzzy_match(std::string_view query, const std::vector<std::string> &candidates,
                     double threshold = kDefaultTokenThreshold);

/// Single-candidate form used for perception anchors.
bool fuzzy_equal(std::string_view query, std::string_view candidate, double threshold = kDefaultTokenThreshold);

} // namespace egoharness
