#include "gcf/recourse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gcf/errors.hpp"

namespace gcf {

std::vector<double> CoverageMatrix::min_distances(std::span<const std::size_t> chosen) const {
    std::vector<double> best(inputs, std::numeric_limits<double>::infinity());
    for (auto r : chosen)
        for (std::size_t i = 0; i < inputs; ++i)
            best[i] = std::min(best[i], rows[r][i].value);
    return best;
}

std::string to_string(CostAggregation agg) {
    switch (agg) {
    case CostAggregation::mean:
        return "mean";
    case CostAggregation::median:
        return "median";
    case CostAggregation::p25:
        return "p25";
    case CostAggregation::p75:
        return "p75";
    }
    return "?";
}

CostAggregation parse_aggregation(const std::string &s) {
    if (s == "mean")
        return CostAggregation::mean;
    if (s == "median")
        return CostAggregation::median;
    if (s == "p25")
        return CostAggregation::p25;
    if (s == "p75")
        return CostAggregation::p75;
    throw ConfigError("unknown cost aggregation '" + s + "'");
}

double percentile(std::vector<double> values, double q) {
    if (values.empty())
        throw Error("percentile of an empty set");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0)
        return values[lo];
    return values[lo] + frac * (values[hi] - values[lo]);
}

double cover(const CoverageMatrix &m, std::span<const std::size_t> chosen, double theta) {
    if (m.inputs == 0)
        return 0.0;
    std::size_t covered = 0;
    for (std::size_t i = 0; i < m.inputs; ++i)
        for (auto r : chosen)
            if (m.covers(r, i, theta)) {
                ++covered;
                break;
            }
    return static_cast<double>(covered) / static_cast<double>(m.inputs);
}

double cost(const CoverageMatrix &m, std::span<const std::size_t> chosen, CostAggregation agg) {
    if (chosen.empty())
        throw Error("recourse cost of an empty counterfactual set");
    auto d = m.min_distances(chosen);
    switch (agg) {
    case CostAggregation::mean:
        return std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
    case CostAggregation::median:
        return percentile(std::move(d), 0.5);
    case CostAggregation::p25:
        return percentile(std::move(d), 0.25);
    case CostAggregation::p75:
        return percentile(std::move(d), 0.75);
    }
    return 0.0;
}

double gain(const CoverageMatrix &m, std::size_t candidate, std::span<const std::size_t> chosen, double theta) {
    if (m.inputs == 0)
        return 0.0;
    std::size_t fresh = 0;
    for (std::size_t i = 0; i < m.inputs; ++i) {
        if (!m.covers(candidate, i, theta))
            continue;
        bool already = false;
        for (auto r : chosen)
            if (m.covers(r, i, theta)) {
                already = true;
                break;
            }
        fresh += !already;
    }
    return static_cast<double>(fresh) / static_cast<double>(m.inputs);
}

CostReport cost_report(const CoverageMatrix &m, std::span<const std::size_t> chosen) {
    return {cost(m, chosen, CostAggregation::mean), cost(m, chosen, CostAggregation::median),
            cost(m, chosen, CostAggregation::p25), cost(m, chosen, CostAggregation::p75)};
}

std::vector<std::optional<std::size_t>> nearest_assignment(const CoverageMatrix &m,
                                                           std::span<const std::size_t> chosen,
                                                           std::span<const GraphKey> keys) {
    std::vector<std::optional<std::size_t>> out(m.inputs);
    if (chosen.empty())
        return out;
    for (std::size_t i = 0; i < m.inputs; ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < chosen.size(); ++j) {
            const double a = m.rows[chosen[j]][i].value;
            const double b = m.rows[chosen[best]][i].value;
            if (a < b || (a == b && !keys.empty() && keys[chosen[j]] < keys[chosen[best]]))
                best = j;
        }
        out[i] = best;
    }
    return out;
}

RecourseSummary greedy_summary(const CoverageMatrix &m, std::span<const CandidateRank> ranks, std::size_t k,
                               double theta) {
    if (k == 0)
        throw ConfigError("summary size k must be at least 1");
    if (!ranks.empty() && ranks.size() != m.candidates())
        throw Error("rank table does not match coverage matrix");
    RecourseSummary s;
    s.assignment.assign(m.inputs, std::nullopt);
    if (m.candidates() == 0)
        return s;

    auto better_rank = [&](std::size_t a, std::size_t b) {
        if (ranks.empty())
            return a < b;
        if (ranks[a].visits != ranks[b].visits)
            return ranks[a].visits > ranks[b].visits;
        if (ranks[a].key && ranks[b].key && *ranks[a].key != *ranks[b].key)
            return *ranks[a].key < *ranks[b].key;
        return a < b;
    };

    std::vector<char> covered(m.inputs, 0), used(m.candidates(), 0);
    std::size_t covered_count = 0;
    const double n = m.inputs ? static_cast<double>(m.inputs) : 1.0;
    const std::size_t rounds = std::min(k, m.candidates());
    bool saturated = false;
    for (std::size_t t = 0; t < rounds; ++t) {
        std::size_t pick = m.candidates();
        std::size_t pick_gain = 0;
        if (!saturated) {
            for (std::size_t c = 0; c < m.candidates(); ++c) {
                if (used[c])
                    continue;
                std::size_t g = 0;
                for (std::size_t i = 0; i < m.inputs; ++i)
                    g += !covered[i] && m.covers(c, i, theta);
                if (pick == m.candidates() || g > pick_gain || (g == pick_gain && better_rank(c, pick))) {
                    pick = c;
                    pick_gain = g;
                }
            }
            if (pick_gain == 0)
                saturated = true;
        }
        if (saturated) {
            pick = m.candidates();
            for (std::size_t c = 0; c < m.candidates(); ++c)
                if (!used[c] && (pick == m.candidates() || better_rank(c, pick)))
                    pick = c;
            pick_gain = 0;
            ++s.padded;
        }
        used[pick] = 1;
        for (std::size_t i = 0; i < m.inputs; ++i)
            if (!covered[i] && m.covers(pick, i, theta)) {
                covered[i] = 1;
                ++covered_count;
            }
        s.chosen.push_back(pick);
        s.marginal.push_back(static_cast<double>(pick_gain) / n);
        s.cumulative.push_back(static_cast<double>(covered_count) / n);
    }
    s.coverage = m.inputs ? static_cast<double>(covered_count) / n : 0.0;
    s.cost = cost_report(m, s.chosen);
    std::vector<GraphKey> keys;
    if (!ranks.empty() && std::all_of(ranks.begin(), ranks.end(), [](const auto &r) { return r.key; })) {
        keys.reserve(ranks.size());
        for (const auto &r : ranks)
            keys.push_back(*r.key);
    }
    s.assignment = nearest_assignment(m, s.chosen, keys);
    return s;
}

} // namespace gcf
