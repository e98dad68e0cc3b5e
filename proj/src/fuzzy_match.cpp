#include "egoharness/fuzzy_match.hpp"

#include <algorithm>
#include <set>

#include "egoharness/normalize.hpp"

namespace egoharness {

std::string_view to_string(MatchTier tier) {
    switch (tier) {
    case MatchTier::None: return "NONE";
    case MatchTier::Exact: return "EXACT";
    case MatchTier::Substring: return "SUBSTRING";
    case MatchTier::TokenOverlap: return "TOKEN_OVERLAP";
    }
    return "?";
}

double token_jaccard(std::string_view a, std::string_view b) {
    auto ta = tokenize(a);
    auto tb = tokenize(b);
    std::set<std::string> sa(ta.begin(), ta.end());
    std::set<std::string> sb(tb.begin(), tb.end());
    if (sa.empty() && sb.empty()) return 0.0;
    std::vector<std::string> common;
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
    double uni = static_cast<double>(sa.size() + sb.size() - common.size());
    return static_cast<double>(common.size()) / uni;
}

MatchSet fuzzy_match(std::string_view query, const std::vector<std::string> &candidates, double threshold) {
    MatchSet result;
    result.query = normalize_name(query);
    const auto &q = result.query;
    if (q.empty()) return result;

    for (const auto &c : candidates)
        if (c == q) result.matches.push_back(c);
    if (!result.matches.empty()) {
        result.tier = MatchTier::Exact;
        return result;
    }
    for (const auto &c : candidates)
        if (!c.empty() && (c.find(q) != std::string::npos || q.find(c) != std::string::npos))
            result.matches.push_back(c);
    if (!result.matches.empty()) {
        result.tier = MatchTier::Substring;
        return result;
    }
    for (const auto &c : candidates)
        if (token_jaccard(q, c) >= threshold) result.matches.push_back(c);
    if (!result.matches.empty()) result.tier = MatchTier::TokenOverlap;
    return result;
}

bool fuzzy_equal(std::string_view query, std::string_view candidate, double threshold) {
    return !fuzzy_match(query, {normalize_name(candidate)}, threshold).empty();
}

} // namespace egoharness
