#ifndef POLITELENS_STRATEGY_HPP
#define POLITELENS_STRATEGY_HPP

#include <algorithm>
#include <fstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "politelens/baseline.hpp"
#include "politelens/common.hpp"
#include "politelens/corpus.hpp"

namespace politelens::strategy {

using corpus::Request;

/// Per-strategy aggregate: how many requests the matcher fires on, their mean
/// politeness score, and what share of them sits in the corpus-wide top
/// score quartile.
struct StrategyStats {
    std::string name;
    std::size_t count = 0;
    double mean_score = 0.0;
    bool mean_defined = false;
    double pct_top_quartile = 0.0;  // in [0, 100]
};

/// The ids counted as "top quartile". Defined via quartile labeling over the
/// full corpus, so membership here coincides exactly with a Polite label
/// from corpus::quartile_label.
inline std::unordered_set<std::string> top_quartile_ids(const std::vector<Request>& requests) {
    std::unordered_set<std::string> out;
    for (const auto& ex : corpus::quartile_label(requests))
        if (ex.label == corpus::Label::Polite) out.insert(ex.source_id);
    return out;
}

inline StrategyStats strategy_stats(const std::vector<Request>& requests,
                                    const baseline::StrategyMatcher& matcher,
                                    const std::unordered_set<std::string>& top_ids) {
    StrategyStats stats;
    stats.name = matcher.name;
    double sum = 0.0;
    std::size_t in_top = 0;
    for (const auto& r : requests) {
        if (!matcher.matches(corpus::tokenize(r.text))) continue;
        ++stats.count;
        sum += r.score;
        if (top_ids.count(r.id)) ++in_top;
    }
    if (stats.count > 0) {
        stats.mean_score = sum / static_cast<double>(stats.count);
        stats.mean_defined = true;
        stats.pct_top_quartile =
            100.0 * static_cast<double>(in_top) / static_cast<double>(stats.count);
    }
    return stats;
}

inline StrategyStats strategy_stats(const std::vector<Request>& requests,
                                    const baseline::StrategyMatcher& matcher) {
    return strategy_stats(requests, matcher, top_quartile_ids(requests));
}

/// One row per matcher, sorted by |mean score| descending so the strongest
/// strategies of either polarity lead the table. Rows with no matches go
/// last. An empty corpus yields an empty report.
inline std::vector<StrategyStats> strategy_report(
    const std::vector<Request>& requests, const std::vector<baseline::StrategyMatcher>& matchers) {
    std::vector<StrategyStats> rows;
    if (requests.empty()) return rows;
    auto top_ids = top_quartile_ids(requests);
    for (const auto& m : matchers) rows.push_back(strategy_stats(requests, m, top_ids));
    std::sort(rows.begin(), rows.end(), [](const StrategyStats& a, const StrategyStats& b) {
        if (a.mean_defined != b.mean_defined) return a.mean_defined;
        if (a.mean_defined && std::abs(a.mean_score) != std::abs(b.mean_score))
            return std::abs(a.mean_score) > std::abs(b.mean_score);
        return a.name < b.name;
    });
    return rows;
}

inline void save_report_tsv(const std::string& path, const std::vector<StrategyStats>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write strategy report: " + path);
    out << "name\tcount\tmean_score\tpct_top_quartile\n";
    for (const auto& s : rows) {
        out << s.name << '\t' << s.count << '\t';
        if (s.mean_defined)
            out << format_fixed(s.mean_score, 2) << '\t' << format_fixed(s.pct_top_quartile, 1);
        else
            out << "NA\tNA";
        out << '\n';
    }
}

}  // namespace politelens::strategy

#endif  // POLITELENS_STRATEGY_HPP
