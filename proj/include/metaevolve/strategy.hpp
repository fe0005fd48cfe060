#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "metaevolve/core.hpp"
#include "metaevolve/rng.hpp"

namespace metaevolve {

enum class ParentSelectorKind {
    uniform,
    greedy_best,
    top_k_uniform,
    score_softmax,
    tiered,
    ucb,
    quantile_biased,
    beam,
    best_of_n,
    map_elites,
};

enum class InspirationSelectorKind {
    none,
    uniform,
    diverse_map_elites,
    multi_objective_top,
    tiered,
};

enum class Provenance { builtin, mutated, llm_generated };

inline std::string to_string(ParentSelectorKind k) {
    switch (k) {
    case ParentSelectorKind::uniform: return "uniform";
    case ParentSelectorKind::greedy_best: return "greedy_best";
    case ParentSelectorKind::top_k_uniform: return "top_k_uniform";
    case ParentSelectorKind::score_softmax: return "score_softmax";
    case ParentSelectorKind::tiered: return "tiered";
    case ParentSelectorKind::ucb: return "ucb";
    case ParentSelectorKind::quantile_biased: return "quantile_biased";
    case ParentSelectorKind::beam: return "beam";
    case ParentSelectorKind::best_of_n: return "best_of_n";
    case ParentSelectorKind::map_elites: return "map_elites";
    }
    return "uniform";
}

inline std::string to_string(InspirationSelectorKind k) {
    switch (k) {
    case InspirationSelectorKind::none: return "none";
    case InspirationSelectorKind::uniform: return "uniform";
    case InspirationSelectorKind::diverse_map_elites: return "diverse_map_elites";
    case InspirationSelectorKind::multi_objective_top: return "multi_objective_top";
    case InspirationSelectorKind::tiered: return "tiered";
    }
    return "none";
}

inline std::string to_string(Provenance p) {
    switch (p) {
    case Provenance::builtin: return "builtin";
    case Provenance::mutated: return "mutated";
    case Provenance::llm_generated: return "llm_generated";
    }
    return "builtin";
}

struct ParentSelector {
    ParentSelectorKind kind = ParentSelectorKind::uniform;
    std::int64_t k = 5;                    // top_k_uniform
    double temperature = 0.5;              // score_softmax
    std::vector<double> tier_fractions{0.2, 0.3, 0.5};
    std::vector<double> tier_weights{0.5, 0.3, 0.2};
    double c = 1.0;                        // ucb exploration weight
    double q = 0.5;                        // quantile_biased
    std::int64_t width = 5;                // beam
    std::int64_t n = 8;                    // best_of_n
    std::vector<std::string> feature_keys; // map_elites; empty = internal score
    std::int64_t bins = 10;                // map_elites

    bool operator==(const ParentSelector&) const = default;
};

struct InspirationSelector {
    InspirationSelectorKind kind = InspirationSelectorKind::uniform;
    std::int64_t m = 2;
    std::vector<std::string> objective_keys; // multi_objective_top

    bool operator==(const InspirationSelector&) const = default;
};

struct OperatorPolicy {
    double free_form = 1.0;
    double refine = 0.0;
    double diverge = 0.0;

    bool operator==(const OperatorPolicy&) const = default;
};

// Structured, validatable search strategy: how parents are selected, how the
// inspiration set is built, and which variation operators are preferred.
struct StrategySpec {
    std::string id;
    ParentSelector parent_selector;
    InspirationSelector inspiration_selector;
    OperatorPolicy operator_policy;
    Provenance provenance = Provenance::builtin;
    std::optional<std::string> lineage;

    bool operator==(const StrategySpec&) const = default;
};

// The (parent, operator, inspirations) triple handed to the generator.
struct GenerationContext {
    SolutionRecord parent;
    OperatorLabel op = OperatorLabel::free_form;
    std::vector<SolutionRecord> inspirations;
    std::string strategy_id;
};

// --- validation --------------------------------------------------------------

inline std::vector<std::string> validate_spec(const StrategySpec& s) {
    std::vector<std::string> errors;
    if (s.id.empty()) errors.push_back("id must be non-empty");

    const auto& p = s.parent_selector;
    switch (p.kind) {
    case ParentSelectorKind::top_k_uniform:
        if (p.k < 1) errors.push_back("top_k_uniform: k must be >= 1");
        break;
    case ParentSelectorKind::score_softmax:
        if (!(p.temperature > 0.0)) errors.push_back("score_softmax: temperature must be > 0");
        break;
    case ParentSelectorKind::tiered: {
        if (p.tier_fractions.empty() || p.tier_fractions.size() != p.tier_weights.size()) {
            errors.push_back("tiered: fractions and weights must be non-empty and equal length");
            break;
        }
        double fsum = 0.0;
        for (double f : p.tier_fractions) {
            if (f < 0.0) errors.push_back("tiered: fractions must be non-negative");
            fsum += f;
        }
        if (std::abs(fsum - 1.0) > 1e-9) errors.push_back("tiered: fractions must sum to 1");
        double wsum = 0.0;
        for (double w : p.tier_weights) {
            if (w < 0.0) errors.push_back("tiered: weights must be non-negative");
            wsum += w;
        }
        if (wsum <= 0.0) errors.push_back("tiered: weights must have positive mass");
        break;
    }
    case ParentSelectorKind::ucb:
        if (p.c < 0.0) errors.push_back("ucb: c must be >= 0");
        break;
    case ParentSelectorKind::quantile_biased:
        if (!(p.q > 0.0 && p.q <= 1.0)) errors.push_back("quantile_biased: q must be in (0,1]");
        break;
    case ParentSelectorKind::beam:
        if (p.width < 1) errors.push_back("beam: width must be >= 1");
        break;
    case ParentSelectorKind::best_of_n:
        if (p.n < 1) errors.push_back("best_of_n: n must be >= 1");
        break;
    case ParentSelectorKind::map_elites:
        if (p.bins < 1) errors.push_back("map_elites: bins must be >= 1");
        break;
    default:
        break;
    }

    const auto& ins = s.inspiration_selector;
    if (ins.kind != InspirationSelectorKind::none && ins.m < 1) {
        errors.push_back("inspiration selector: m must be >= 1 (use kind none for no inspirations)");
    }
    if (ins.kind == InspirationSelectorKind::multi_objective_top && ins.objective_keys.empty()) {
        errors.push_back("multi_objective_top: objective_keys must be non-empty");
    }

    const auto& op = s.operator_policy;
    for (double v : {op.free_form, op.refine, op.diverge}) {
        if (v < 0.0 || v > 1.0) {
            errors.push_back("operator_policy: entries must lie in [0,1]");
            break;
        }
    }
    const double sum = op.free_form + op.refine + op.diverge;
    if (std::abs(sum - 1.0) > 1e-9) {
        errors.push_back("operator_policy: policy sums to " + std::to_string(sum));
    }
    return errors;
}

// --- builtins ----------------------------------------------------------------

enum class BuiltinStrategy {
    random,
    greedy,
    stratified_multi_objective,
    ucb_structural,
    ucb_refinement,
    beam,
    best_of_n,
    top_k,
    map_elites,
};

struct BuiltinParams {
    std::int64_t k = 10;     // top_k
    std::int64_t width = 5;  // beam
    std::int64_t n = 16;     // best_of_n
    std::int64_t bins = 10;  // map_elites
    double c = 1.0;          // ucb variants
    std::vector<std::string> objective_keys; // stratified_multi_objective
    std::vector<std::string> feature_keys;   // map_elites
};

inline StrategySpec builtin_strategy(BuiltinStrategy kind, const BuiltinParams& params = {}) {
    StrategySpec s;
    s.provenance = Provenance::builtin;
    switch (kind) {
    case BuiltinStrategy::random:
        s.id = "builtin:random";
        s.parent_selector.kind = ParentSelectorKind::uniform;
        s.inspiration_selector = {InspirationSelectorKind::uniform, 2, {}};
        s.operator_policy = {1.0, 0.0, 0.0};
        break;
    case BuiltinStrategy::greedy:
        s.id = "builtin:greedy";
        s.parent_selector.kind = ParentSelectorKind::greedy_best;
        s.inspiration_selector = {InspirationSelectorKind::none, 0, {}};
        s.operator_policy = {0.0, 1.0, 0.0};
        break;
    case BuiltinStrategy::stratified_multi_objective:
        s.id = "builtin:stratified_multi_objective";
        s.parent_selector.kind = ParentSelectorKind::tiered;
        s.inspiration_selector = {InspirationSelectorKind::multi_objective_top, 4,
                                  params.objective_keys};
        s.operator_policy = {0.0, 0.0, 1.0};
        break;
    case BuiltinStrategy::ucb_structural:
        s.id = "builtin:ucb_structural";
        s.parent_selector.kind = ParentSelectorKind::ucb;
        s.parent_selector.c = params.c;
        s.inspiration_selector = params.objective_keys.empty()
                                     ? InspirationSelector{InspirationSelectorKind::uniform, 2, {}}
                                     : InspirationSelector{InspirationSelectorKind::multi_objective_top,
                                                           4, params.objective_keys};
        s.operator_policy = {0.0, 0.0, 1.0};
        break;
    case BuiltinStrategy::ucb_refinement:
        s.id = "builtin:ucb_refinement";
        s.parent_selector.kind = ParentSelectorKind::ucb;
        s.parent_selector.c = params.c;
        s.inspiration_selector = {InspirationSelectorKind::uniform, 2, {}};
        s.operator_policy = {0.0, 1.0, 0.0};
        break;
    case BuiltinStrategy::beam:
        s.id = "builtin:beam";
        s.parent_selector.kind = ParentSelectorKind::beam;
        s.parent_selector.width = params.width;
        s.inspiration_selector = {InspirationSelectorKind::uniform, 2, {}};
        s.operator_policy = {1.0, 0.0, 0.0};
        break;
    case BuiltinStrategy::best_of_n:
        s.id = "builtin:best_of_n";
        s.parent_selector.kind = ParentSelectorKind::best_of_n;
        s.parent_selector.n = params.n;
        s.inspiration_selector = {InspirationSelectorKind::uniform, 2, {}};
        s.operator_policy = {1.0, 0.0, 0.0};
        break;
    case BuiltinStrategy::top_k:
        s.id = "builtin:top_k";
        s.parent_selector.kind = ParentSelectorKind::top_k_uniform;
        s.parent_selector.k = params.k;
        s.inspiration_selector = {InspirationSelectorKind::uniform, 2, {}};
        s.operator_policy = {1.0, 0.0, 0.0};
        break;
    case BuiltinStrategy::map_elites:
        s.id = "builtin:map_elites";
        s.parent_selector.kind = ParentSelectorKind::map_elites;
        s.parent_selector.bins = params.bins;
        s.parent_selector.feature_keys = params.feature_keys;
        s.inspiration_selector = {InspirationSelectorKind::diverse_map_elites, 2, {}};
        s.operator_policy = {1.0, 0.0, 0.0};
        break;
    }
    auto errors = validate_spec(s);
    if (!errors.empty()) throw std::invalid_argument("builtin_strategy: " + errors.front());
    return s;
}

inline StrategySpec default_initial_strategy() {
    return builtin_strategy(BuiltinStrategy::random);
}

// --- sampling ----------------------------------------------------------------

namespace detail {

// Indices sorted best-first: internal score desc, then iteration asc, then id.
inline std::vector<std::size_t> ranked_indices(const SolutionDatabase& db) {
    std::vector<std::size_t> idx(db.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const auto& ra = db.at(a);
        const auto& rb = db.at(b);
        if (ra.evaluation.internal_score != rb.evaluation.internal_score) {
            return ra.evaluation.internal_score > rb.evaluation.internal_score;
        }
        if (ra.iteration_found != rb.iteration_found) {
            return ra.iteration_found < rb.iteration_found;
        }
        return ra.id < rb.id;
    });
    return idx;
}

inline double map_elites_feature(const SolutionRecord& r, const std::string& key) {
    if (key.empty()) return r.evaluation.internal_score;
    auto it = r.evaluation.artifacts.find(key);
    if (it != r.evaluation.artifacts.end() && std::holds_alternative<double>(it->second)) {
        return std::get<double>(it->second);
    }
    return r.evaluation.internal_score;
}

// Bin all records into a grid over the feature keys (min-max ranges over the
// current population) and return the best record index per occupied cell.
inline std::vector<std::size_t> map_elites_cell_elites(const SolutionDatabase& db,
                                                       const std::vector<std::string>& keys_in,
                                                       std::int64_t bins) {
    std::vector<std::string> keys = keys_in;
    if (keys.empty()) keys.push_back(""); // fall back to internal score
    const std::size_t nf = keys.size();
    const std::size_t n = db.size();

    std::vector<double> lo(nf, std::numeric_limits<double>::infinity());
    std::vector<double> hi(nf, -std::numeric_limits<double>::infinity());
    std::vector<std::vector<double>> feats(n, std::vector<double>(nf));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t f = 0; f < nf; ++f) {
            const double v = map_elites_feature(db.at(i), keys[f]);
            feats[i][f] = v;
            lo[f] = std::min(lo[f], v);
            hi[f] = std::max(hi[f], v);
        }
    }

    std::map<std::vector<std::int64_t>, std::size_t> elite; // cell -> record index
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::int64_t> cell(nf);
        for (std::size_t f = 0; f < nf; ++f) {
            if (hi[f] <= lo[f]) {
                cell[f] = 0;
            } else {
                auto b = static_cast<std::int64_t>(
                    std::floor((feats[i][f] - lo[f]) / (hi[f] - lo[f]) * static_cast<double>(bins)));
                cell[f] = std::clamp<std::int64_t>(b, 0, bins - 1);
            }
        }
        auto it = elite.find(cell);
        if (it == elite.end()) {
            elite.emplace(std::move(cell), i);
        } else {
            const auto& cur = db.at(it->second);
            const auto& cand = db.at(i);
            const bool better =
                cand.evaluation.internal_score > cur.evaluation.internal_score ||
                (cand.evaluation.internal_score == cur.evaluation.internal_score &&
                 (cand.iteration_found < cur.iteration_found ||
                  (cand.iteration_found == cur.iteration_found && cand.id < cur.id)));
            if (better) it->second = i;
        }
    }

    std::vector<std::size_t> out;
    out.reserve(elite.size());
    for (const auto& [cell, i] : elite) out.push_back(i);
    return out;
}

} // namespace detail

// Per-deployment sampler: realizes C_S(D_t) -> (parent, operator, inspirations).
// UCB selection counts are scoped to one deployment and reset on switch.
class StrategySampler {
public:
    explicit StrategySampler(StrategySpec spec) : spec_(std::move(spec)) {
        auto errors = validate_spec(spec_);
        if (!errors.empty()) {
            throw std::invalid_argument("StrategySampler: invalid spec: " + errors.front());
        }
    }

    const StrategySpec& spec() const { return spec_; }

    const std::map<std::string, std::int64_t>& selection_counts() const {
        return selection_counts_;
    }
    std::int64_t total_selections() const { return total_selections_; }

    // Restores UCB bookkeeping when a run is resumed from its event log.
    void note_parent_selected(const std::string& id) {
        selection_counts_[id]++;
        total_selections_++;
    }

    GenerationContext sample_context(const SolutionDatabase& db, Rng& rng) {
        if (db.empty()) throw std::runtime_error("sample_context: empty population");

        const std::size_t parent_idx = select_parent(db, rng);
        const SolutionRecord& parent = db.at(parent_idx);

        GenerationContext ctx;
        ctx.parent = parent;
        ctx.strategy_id = spec_.id;
        ctx.op = sample_operator(rng);
        ctx.inspirations = select_inspirations(db, parent_idx, rng);

        note_parent_selected(parent.id);
        return ctx;
    }

private:
    OperatorLabel sample_operator(Rng& rng) {
        const auto& p = spec_.operator_policy;
        const double u = rng.uniform01();
        if (u < p.free_form) return OperatorLabel::free_form;
        if (u < p.free_form + p.refine) return OperatorLabel::refine;
        return OperatorLabel::diverge;
    }

    std::size_t select_parent(const SolutionDatabase& db, Rng& rng) {
        const auto& p = spec_.parent_selector;
        const std::size_t n = db.size();
        switch (p.kind) {
        case ParentSelectorKind::uniform:
            return rng.uniform_index(n);
        case ParentSelectorKind::greedy_best:
            return detail::ranked_indices(db)[0];
        case ParentSelectorKind::top_k_uniform: {
            auto idx = detail::ranked_indices(db);
            const auto k = std::min<std::size_t>(static_cast<std::size_t>(p.k), n);
            return idx[rng.uniform_index(k)];
        }
        case ParentSelectorKind::score_softmax: {
            double max_s = db.at(0).evaluation.internal_score;
            for (const auto& r : db) max_s = std::max(max_s, r.evaluation.internal_score);
            std::vector<double> w(n);
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                w[i] = std::exp((db.at(i).evaluation.internal_score - max_s) / p.temperature);
                sum += w[i];
            }
            double u = rng.uniform01() * sum;
            for (std::size_t i = 0; i < n; ++i) {
                u -= w[i];
                if (u <= 0.0) return i;
            }
            return n - 1;
        }
        case ParentSelectorKind::tiered: {
            auto idx = detail::ranked_indices(db);
            const std::size_t tiers = p.tier_fractions.size();
            std::vector<std::pair<std::size_t, std::size_t>> bounds; // [begin, end)
            std::size_t begin = 0;
            double cum = 0.0;
            for (std::size_t t = 0; t < tiers; ++t) {
                cum += p.tier_fractions[t];
                std::size_t end = (t + 1 == tiers)
                                      ? n
                                      : std::min<std::size_t>(
                                            n, static_cast<std::size_t>(std::ceil(cum * static_cast<double>(n))));
                end = std::max(end, begin);
                bounds.emplace_back(begin, end);
                begin = end;
            }
            double wsum = 0.0;
            for (std::size_t t = 0; t < tiers; ++t) {
                if (bounds[t].second > bounds[t].first) wsum += p.tier_weights[t];
            }
            if (wsum <= 0.0) return idx[rng.uniform_index(n)];
            double u = rng.uniform01() * wsum;
            for (std::size_t t = 0; t < tiers; ++t) {
                if (bounds[t].second == bounds[t].first) continue;
                u -= p.tier_weights[t];
                if (u <= 0.0) {
                    const std::size_t span = bounds[t].second - bounds[t].first;
                    return idx[bounds[t].first + rng.uniform_index(span)];
                }
            }
            return idx[rng.uniform_index(n)];
        }
        case ParentSelectorKind::ucb: {
            double lo = db.at(0).evaluation.internal_score;
            double hi = lo;
            for (const auto& r : db) {
                lo = std::min(lo, r.evaluation.internal_score);
                hi = std::max(hi, r.evaluation.internal_score);
            }
            const double denom = hi - lo;
            const double ln_total =
                std::log(static_cast<double>(total_selections_) + 1.0);
            std::size_t best = 0;
            double best_val = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < n; ++i) {
                const auto& r = db.at(i);
                const double norm =
                    denom > 0.0 ? (r.evaluation.internal_score - lo) / denom : 0.0;
                const auto it = selection_counts_.find(r.id);
                const double count = it == selection_counts_.end()
                                         ? 0.0
                                         : static_cast<double>(it->second);
                const double val = norm + p.c * std::sqrt(ln_total / (count + 1.0));
                const auto& cur = db.at(best);
                if (val > best_val ||
                    (val == best_val &&
                     (r.iteration_found < cur.iteration_found ||
                      (r.iteration_found == cur.iteration_found && r.id < cur.id)))) {
                    best_val = val;
                    best = i;
                }
            }
            return best;
        }
        case ParentSelectorKind::quantile_biased: {
            std::vector<double> sorted;
            sorted.reserve(n);
            for (const auto& r : db) sorted.push_back(r.evaluation.internal_score);
            std::sort(sorted.begin(), sorted.end());
            const double cut = percentile_threshold(sorted, p.q);
            std::vector<std::size_t> eligible;
            for (std::size_t i = 0; i < n; ++i) {
                if (db.at(i).evaluation.internal_score >= cut) eligible.push_back(i);
            }
            if (eligible.empty()) return detail::ranked_indices(db)[0];
            return eligible[rng.uniform_index(eligible.size())];
        }
        case ParentSelectorKind::beam: {
            auto idx = detail::ranked_indices(db);
            const auto w = std::min<std::size_t>(static_cast<std::size_t>(p.width), n);
            return idx[rng.uniform_index(w)];
        }
        case ParentSelectorKind::best_of_n: {
            const auto nn = std::min<std::size_t>(static_cast<std::size_t>(p.n), n);
            const std::size_t window = std::min<std::size_t>(2 * nn, n);
            const std::size_t first = n - window;
            std::vector<std::size_t> recent(window);
            for (std::size_t i = 0; i < window; ++i) recent[i] = first + i;
            std::sort(recent.begin(), recent.end(), [&](std::size_t a, std::size_t b) {
                const auto& ra = db.at(a);
                const auto& rb = db.at(b);
                if (ra.evaluation.internal_score != rb.evaluation.internal_score) {
                    return ra.evaluation.internal_score > rb.evaluation.internal_score;
                }
                if (ra.iteration_found != rb.iteration_found) {
                    return ra.iteration_found < rb.iteration_found;
                }
                return ra.id < rb.id;
            });
            return recent[rng.uniform_index(std::min(nn, recent.size()))];
        }
        case ParentSelectorKind::map_elites: {
            auto elites = detail::map_elites_cell_elites(db, p.feature_keys, p.bins);
            return elites[rng.uniform_index(elites.size())];
        }
        }
        return rng.uniform_index(n);
    }

    // Threshold value of the q-quantile (linear interpolation up the sorted
    // scores); q = 1 keeps only the maximum.
    static double percentile_threshold(const std::vector<double>& sorted, double q) {
        return percentile_interpolated(sorted, q);
    }

    std::vector<SolutionRecord> select_inspirations(const SolutionDatabase& db,
                                                    std::size_t parent_idx, Rng& rng) {
        const auto& ins = spec_.inspiration_selector;
        std::vector<SolutionRecord> out;
        if (ins.kind == InspirationSelectorKind::none || ins.m == 0) return out;

        const std::size_t n = db.size();
        const std::string& parent_id = db.at(parent_idx).id;
        std::set<std::string> taken{parent_id};
        const auto add = [&](const SolutionRecord& r) {
            if (taken.insert(r.id).second) out.push_back(r);
        };
        const auto m = static_cast<std::size_t>(ins.m);

        switch (ins.kind) {
        case InspirationSelectorKind::uniform: {
            // Sample without replacement among non-parent records.
            std::vector<std::size_t> pool;
            pool.reserve(n - 1);
            for (std::size_t i = 0; i < n; ++i) {
                if (i != parent_idx) pool.push_back(i);
            }
            const std::size_t take = std::min(m, pool.size());
            for (std::size_t j = 0; j < take; ++j) {
                const std::size_t pick = j + rng.uniform_index(pool.size() - j);
                std::swap(pool[j], pool[pick]);
                add(db.at(pool[j]));
            }
            break;
        }
        case InspirationSelectorKind::diverse_map_elites: {
            auto elites = detail::map_elites_cell_elites(db, spec_.parent_selector.feature_keys,
                                                         spec_.parent_selector.bins);
            std::vector<std::size_t> pool;
            for (std::size_t i : elites) {
                if (i != parent_idx) pool.push_back(i);
            }
            const std::size_t take = std::min(m, pool.size());
            for (std::size_t j = 0; j < take; ++j) {
                const std::size_t pick = j + rng.uniform_index(pool.size() - j);
                std::swap(pool[j], pool[pick]);
                add(db.at(pool[j]));
            }
            break;
        }
        case InspirationSelectorKind::multi_objective_top: {
            // One record per objective key: the maximizer of that artifact.
            for (const auto& key : ins.objective_keys) {
                if (out.size() >= m) break;
                const SolutionRecord* best = nullptr;
                double best_v = 0.0;
                for (const auto& r : db) {
                    auto it = r.evaluation.artifacts.find(key);
                    if (it == r.evaluation.artifacts.end() ||
                        !std::holds_alternative<double>(it->second)) {
                        continue;
                    }
                    const double v = std::get<double>(it->second);
                    if (!best || v > best_v ||
                        (v == best_v && (r.iteration_found < best->iteration_found ||
                                         (r.iteration_found == best->iteration_found &&
                                          r.id < best->id)))) {
                        best = &r;
                        best_v = v;
                    }
                }
                if (best) add(*best);
            }
            break;
        }
        case InspirationSelectorKind::tiered: {
            // One pick from each of m equal score bands, top band first.
            auto idx = detail::ranked_indices(db);
            const std::size_t bands = std::min(m, n);
            for (std::size_t b = 0; b < bands && out.size() < m; ++b) {
                const std::size_t begin = b * n / bands;
                const std::size_t end = (b + 1) * n / bands;
                if (end <= begin) continue;
                const std::size_t pick = begin + rng.uniform_index(end - begin);
                add(db.at(idx[pick]));
            }
            break;
        }
        case InspirationSelectorKind::none:
            break;
        }
        return out;
    }

    StrategySpec spec_;
    std::map<std::string, std::int64_t> selection_counts_;
    std::int64_t total_selections_ = 0;
};

// --- canonical JSON ----------------------------------------------------------

inline json parent_selector_to_json(const ParentSelector& p) {
    json j;
    j["kind"] = to_string(p.kind);
    switch (p.kind) {
    case ParentSelectorKind::top_k_uniform: j["k"] = p.k; break;
    case ParentSelectorKind::score_softmax: j["temperature"] = p.temperature; break;
    case ParentSelectorKind::tiered:
        j["tier_fractions"] = p.tier_fractions;
        j["tier_weights"] = p.tier_weights;
        break;
    case ParentSelectorKind::ucb: j["c"] = p.c; break;
    case ParentSelectorKind::quantile_biased: j["q"] = p.q; break;
    case ParentSelectorKind::beam: j["width"] = p.width; break;
    case ParentSelectorKind::best_of_n: j["n"] = p.n; break;
    case ParentSelectorKind::map_elites:
        j["feature_keys"] = p.feature_keys;
        j["bins"] = p.bins;
        break;
    default: break;
    }
    return j;
}

inline ParentSelector parent_selector_from_json(const json& j) {
    ParentSelector p;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "uniform") p.kind = ParentSelectorKind::uniform;
    else if (kind == "greedy_best") p.kind = ParentSelectorKind::greedy_best;
    else if (kind == "top_k_uniform") p.kind = ParentSelectorKind::top_k_uniform;
    else if (kind == "score_softmax") p.kind = ParentSelectorKind::score_softmax;
    else if (kind == "tiered") p.kind = ParentSelectorKind::tiered;
    else if (kind == "ucb") p.kind = ParentSelectorKind::ucb;
    else if (kind == "quantile_biased") p.kind = ParentSelectorKind::quantile_biased;
    else if (kind == "beam") p.kind = ParentSelectorKind::beam;
    else if (kind == "best_of_n") p.kind = ParentSelectorKind::best_of_n;
    else if (kind == "map_elites") p.kind = ParentSelectorKind::map_elites;
    else throw std::invalid_argument("unknown parent selector kind: " + kind);

    if (j.contains("k")) p.k = j.at("k").get<std::int64_t>();
    if (j.contains("temperature")) p.temperature = j.at("temperature").get<double>();
    if (j.contains("tier_fractions")) p.tier_fractions = j.at("tier_fractions").get<std::vector<double>>();
    if (j.contains("tier_weights")) p.tier_weights = j.at("tier_weights").get<std::vector<double>>();
    if (j.contains("c")) p.c = j.at("c").get<double>();
    if (j.contains("q")) p.q = j.at("q").get<double>();
    if (j.contains("width")) p.width = j.at("width").get<std::int64_t>();
    if (j.contains("n")) p.n = j.at("n").get<std::int64_t>();
    if (j.contains("feature_keys")) p.feature_keys = j.at("feature_keys").get<std::vector<std::string>>();
    if (j.contains("bins")) p.bins = j.at("bins").get<std::int64_t>();
    return p;
}

inline json inspiration_selector_to_json(const InspirationSelector& s) {
    json j;
    j["kind"] = to_string(s.kind);
    if (s.kind != InspirationSelectorKind::none) j["m"] = s.m;
    if (s.kind == InspirationSelectorKind::multi_objective_top) {
        j["objective_keys"] = s.objective_keys;
    }
    return j;
}

inline InspirationSelector inspiration_selector_from_json(const json& j) {
    InspirationSelector s;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "none") s.kind = InspirationSelectorKind::none;
    else if (kind == "uniform") s.kind = InspirationSelectorKind::uniform;
    else if (kind == "diverse_map_elites") s.kind = InspirationSelectorKind::diverse_map_elites;
    else if (kind == "multi_objective_top") s.kind = InspirationSelectorKind::multi_objective_top;
    else if (kind == "tiered") s.kind = InspirationSelectorKind::tiered;
    else throw std::invalid_argument("unknown inspiration selector kind: " + kind);
    if (j.contains("m")) s.m = j.at("m").get<std::int64_t>();
    if (j.contains("objective_keys")) {
        s.objective_keys = j.at("objective_keys").get<std::vector<std::string>>();
    }
    if (s.kind == InspirationSelectorKind::none) s.m = 0;
    return s;
}

// Canonical document (nlohmann keeps object keys sorted); this is the exact
// format the strategy generator must emit and the event log records.
inline json spec_to_json(const StrategySpec& s) {
    json j;
    j["id"] = s.id;
    j["parent_selector"] = parent_selector_to_json(s.parent_selector);
    j["inspiration_selector"] = inspiration_selector_to_json(s.inspiration_selector);
    j["operator_policy"] = {
        {"free_form", s.operator_policy.free_form},
        {"refine", s.operator_policy.refine},
        {"diverge", s.operator_policy.diverge},
    };
    j["provenance"] = to_string(s.provenance);
    if (s.lineage) j["lineage"] = *s.lineage;
    else j["lineage"] = nullptr;
    return j;
}

inline StrategySpec spec_from_json(const json& j) {
    StrategySpec s;
    s.id = j.at("id").get<std::string>();
    s.parent_selector = parent_selector_from_json(j.at("parent_selector"));
    s.inspiration_selector = inspiration_selector_from_json(j.at("inspiration_selector"));
    const auto& op = j.at("operator_policy");
    s.operator_policy.free_form = op.at("free_form").get<double>();
    s.operator_policy.refine = op.at("refine").get<double>();
    s.operator_policy.diverge = op.at("diverge").get<double>();
    const std::string prov = j.at("provenance").get<std::string>();
    if (prov == "builtin") s.provenance = Provenance::builtin;
    else if (prov == "mutated") s.provenance = Provenance::mutated;
    else if (prov == "llm_generated") s.provenance = Provenance::llm_generated;
    else throw std::invalid_argument("unknown provenance: " + prov);
    if (j.contains("lineage") && !j.at("lineage").is_null()) {
        s.lineage = j.at("lineage").get<std::string>();
    }
    return s;
}

inline std::string spec_to_canonical_string(const StrategySpec& s) {
    return spec_to_json(s).dump();
}

} // namespace metaevolve
