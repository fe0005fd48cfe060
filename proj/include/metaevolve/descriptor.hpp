#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "metaevolve/core.hpp"

namespace metaevolve {

struct RecentWindowStats {
    double mean_score = 0.0;
    std::map<std::string, std::int64_t> parent_selection_counts;
    std::map<std::string, std::int64_t> operator_counts;

    bool operator==(const RecentWindowStats&) const = default;
};

// Summary of the population state: score statistics, frontier, progress and
// recent-window usage. Conditions strategy selection and generation.
struct PopulationDescriptor {
    std::int64_t size = 0;
    double best = 0.0;
    double p25 = 0.0;
    double p50 = 0.0;
    double p75 = 0.0;
    double spread = 0.0; // max - min of internal scores
    std::vector<double> top_k_scores; // descending, k = 5
    std::int64_t steps_since_improvement = 0;
    RecentWindowStats recent_window;

    bool operator==(const PopulationDescriptor&) const = default;
};

inline constexpr std::size_t kDescriptorTopK = 5;

inline PopulationDescriptor compute_descriptor(const SolutionDatabase& db,
                                               std::span<const SolutionRecord> window) {
    if (db.empty()) throw std::runtime_error("compute_descriptor: empty population");

    PopulationDescriptor d;
    d.size = db.step_count();

    std::vector<double> scores;
    scores.reserve(db.size());
    for (const auto& r : db) scores.push_back(r.evaluation.internal_score);

    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end());
    d.best = sorted.back();
    d.p25 = percentile_interpolated(sorted, 0.25);
    d.p50 = percentile_interpolated(sorted, 0.50);
    d.p75 = percentile_interpolated(sorted, 0.75);
    d.spread = sorted.back() - sorted.front();

    const std::size_t k = std::min(kDescriptorTopK, sorted.size());
    for (std::size_t i = 0; i < k; ++i) d.top_k_scores.push_back(sorted[sorted.size() - 1 - i]);

    // Records appended since the last strict increase of the prefix maximum.
    double prefix_max = scores[0];
    std::size_t last_improve = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] > prefix_max) {
            prefix_max = scores[i];
            last_improve = i;
        }
    }
    d.steps_since_improvement = static_cast<std::int64_t>(scores.size() - 1 - last_improve);

    if (!window.empty()) {
        double sum = 0.0;
        for (const auto& r : window) {
            sum += r.evaluation.internal_score;
            if (r.parent_id) d.recent_window.parent_selection_counts[*r.parent_id]++;
            d.recent_window.operator_counts[to_string(r.operator_label)]++;
        }
        d.recent_window.mean_score = sum / static_cast<double>(window.size());
    }
    return d;
}

// Euclidean distance over [best, p25, p50, p75, spread, stagnation fraction],
// each dimension min-max normalized over the pair. Symmetric, non-negative,
// zero iff the feature vectors are equal; the per-pair normalization does not
// satisfy the triangle inequality.
inline double descriptor_distance(const PopulationDescriptor& a, const PopulationDescriptor& b) {
    const auto stag_frac = [](const PopulationDescriptor& d) {
        return d.size > 0 ? static_cast<double>(d.steps_since_improvement) /
                                static_cast<double>(d.size)
                          : 0.0;
    };
    const double fa[6] = {a.best, a.p25, a.p50, a.p75, a.spread, stag_frac(a)};
    const double fb[6] = {b.best, b.p25, b.p50, b.p75, b.spread, stag_frac(b)};
    double sum = 0.0;
    for (int i = 0; i < 6; ++i) {
        const double lo = std::min(fa[i], fb[i]);
        const double hi = std::max(fa[i], fb[i]);
        if (hi > lo) {
            const double na = (fa[i] - lo) / (hi - lo);
            const double nb = (fb[i] - lo) / (hi - lo);
            sum += (na - nb) * (na - nb);
        }
    }
    return std::sqrt(sum);
}

inline json window_stats_to_json(const RecentWindowStats& w) {
    json j;
    j["mean_score"] = w.mean_score;
    j["parent_selection_counts"] = json::object();
    for (const auto& [k, v] : w.parent_selection_counts) j["parent_selection_counts"][k] = v;
    j["operator_counts"] = json::object();
    for (const auto& [k, v] : w.operator_counts) j["operator_counts"][k] = v;
    return j;
}

inline RecentWindowStats window_stats_from_json(const json& j) {
    RecentWindowStats w;
    w.mean_score = j.at("mean_score").get<double>();
    for (auto it = j.at("parent_selection_counts").begin();
         it != j.at("parent_selection_counts").end(); ++it) {
        w.parent_selection_counts[it.key()] = it.value().get<std::int64_t>();
    }
    for (auto it = j.at("operator_counts").begin(); it != j.at("operator_counts").end(); ++it) {
        w.operator_counts[it.key()] = it.value().get<std::int64_t>();
    }
    return w;
}

inline json descriptor_to_json(const PopulationDescriptor& d) {
    json j;
    j["size"] = d.size;
    j["best"] = d.best;
    j["p25"] = d.p25;
    j["p50"] = d.p50;
    j["p75"] = d.p75;
    j["spread"] = d.spread;
    j["top_k_scores"] = d.top_k_scores;
    j["steps_since_improvement"] = d.steps_since_improvement;
    j["recent_window"] = window_stats_to_json(d.recent_window);
    return j;
}

inline PopulationDescriptor descriptor_from_json(const json& j) {
    PopulationDescriptor d;
    d.size = j.at("size").get<std::int64_t>();
    d.best = j.at("best").get<double>();
    d.p25 = j.at("p25").get<double>();
    d.p50 = j.at("p50").get<double>();
    d.p75 = j.at("p75").get<double>();
    d.spread = j.at("spread").get<double>();
    d.top_k_scores = j.at("top_k_scores").get<std::vector<double>>();
    d.steps_since_improvement = j.at("steps_since_improvement").get<std::int64_t>();
    d.recent_window = window_stats_from_json(j.at("recent_window"));
    return d;
}

} // namespace metaevolve
