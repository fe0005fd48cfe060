#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "metaevolve/core.hpp"
#include "metaevolve/descriptor.hpp"
#include "metaevolve/rng.hpp"
#include "metaevolve/solution_gen.hpp"
#include "metaevolve/strategy.hpp"

namespace metaevolve {

// Windowed strategy score: improvement weighted by the (clamped) log of the
// starting level, normalized by the square root of the window length. The
// clamp keeps the score defined when internal scores are negative, at the
// cost of zeroing the level weight below zero.
inline double strategy_score(double s_start, double s_end, std::int64_t window_len) {
    if (window_len < 1) throw std::invalid_argument("strategy_score: window_len must be >= 1");
    const double delta = s_end - s_start;
    return delta * std::log1p(std::max(s_start, 0.0)) /
           std::sqrt(static_cast<double>(window_len));
}

// Strict comparison: a window counts as stagnant only when its improvement
// falls below the threshold.
inline bool detect_stagnation(double delta, double tau) {
    if (tau < 0.0) throw std::invalid_argument("detect_stagnation: tau must be >= 0");
    return delta < tau;
}

struct StrategyRecord {
    StrategySpec spec;
    PopulationDescriptor descriptor_before;
    std::optional<PopulationDescriptor> descriptor_after;
    double J = 0.0;
    double delta = 0.0;
    std::int64_t window_len = 1;
    std::int64_t deployed_at_step = 0;
};

// Append-only memory of deployed strategies with their observed performance.
class StrategyDatabase {
public:
    void append(StrategyRecord rec) { records_.push_back(std::move(rec)); }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    const StrategyRecord& at(std::size_t i) const { return records_.at(i); }
    auto begin() const { return records_.begin(); }
    auto end() const { return records_.end(); }

private:
    std::deque<StrategyRecord> records_;
};

inline void record_deployment(StrategyDatabase& h, const StrategySpec& spec,
                              const PopulationDescriptor& before,
                              const std::optional<PopulationDescriptor>& after, double s_start,
                              double s_end, std::int64_t window_len, std::int64_t step) {
    if (window_len < 1) throw std::invalid_argument("record_deployment: window_len must be >= 1");
    StrategyRecord rec;
    rec.spec = spec;
    rec.descriptor_before = before;
    rec.descriptor_after = after;
    rec.delta = s_end - s_start;
    rec.window_len = window_len;
    rec.deployed_at_step = step;
    rec.J = strategy_score(s_start, s_end, window_len);
    h.append(std::move(rec));
}

// Score-biased, descriptor-proximate selection over H. J values are min-max
// normalized over H before the softmax; proximity enters as 1/(1+d).
inline StrategyRecord select_parent_strategy(const StrategyDatabase& h,
                                             const PopulationDescriptor& phi_now,
                                             double temperature, Rng& rng,
                                             std::optional<std::size_t>* selected_index = nullptr) {
    if (!(temperature > 0.0)) {
        throw std::invalid_argument("select_parent_strategy: temperature must be > 0");
    }
    if (selected_index) selected_index->reset();
    if (h.empty()) {
        StrategyRecord rec;
        rec.spec = default_initial_strategy();
        rec.descriptor_before = phi_now;
        rec.J = 0.0;
        rec.delta = 0.0;
        rec.window_len = 1;
        rec.deployed_at_step = 0;
        return rec;
    }
    double j_lo = h.at(0).J;
    double j_hi = j_lo;
    for (const auto& r : h) {
        j_lo = std::min(j_lo, r.J);
        j_hi = std::max(j_hi, r.J);
    }
    const double span = j_hi - j_lo;
    std::vector<double> w(h.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double jn = span > 0.0 ? (h.at(i).J - j_lo) / span : 0.5;
        const double dist = descriptor_distance(h.at(i).descriptor_before, phi_now);
        w[i] = std::exp(jn / temperature) / (1.0 + dist);
        sum += w[i];
    }
    double u = rng.uniform01() * sum;
    for (std::size_t i = 0; i < h.size(); ++i) {
        u -= w[i];
        if (u <= 0.0) {
            if (selected_index) *selected_index = i;
            return h.at(i);
        }
    }
    if (selected_index) *selected_index = h.size() - 1;
    return h.at(h.size() - 1);
}

// Up to m distinct records: the top half by J, the remainder nearest to the
// current descriptor, excluding the chosen parent.
inline std::vector<StrategyRecord> select_inspiration_strategies(
    const StrategyDatabase& h, const PopulationDescriptor& phi_now, std::int64_t m, Rng& /*rng*/,
    const std::optional<std::size_t>& exclude_index = std::nullopt) {
    std::vector<StrategyRecord> out;
    if (m <= 0 || h.empty()) return out;

    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (exclude_index && *exclude_index == i) continue;
        idx.push_back(i);
    }
    const auto want = std::min<std::size_t>(static_cast<std::size_t>(m), idx.size());
    if (want == 0) return out;

    std::vector<std::size_t> by_j = idx;
    std::sort(by_j.begin(), by_j.end(), [&](std::size_t a, std::size_t b) {
        if (h.at(a).J != h.at(b).J) return h.at(a).J > h.at(b).J;
        return a < b;
    });
    std::vector<std::size_t> by_dist = idx;
    std::sort(by_dist.begin(), by_dist.end(), [&](std::size_t a, std::size_t b) {
        const double da = descriptor_distance(h.at(a).descriptor_before, phi_now);
        const double db = descriptor_distance(h.at(b).descriptor_before, phi_now);
        if (da != db) return da < db;
        return a < b;
    });

    std::set<std::size_t> taken;
    const std::size_t top_j = (static_cast<std::size_t>(m) + 1) / 2;
    for (std::size_t i = 0; i < by_j.size() && taken.size() < std::min(top_j, want); ++i) {
        taken.insert(by_j[i]);
    }
    for (std::size_t i = 0; i < by_dist.size() && taken.size() < want; ++i) {
        taken.insert(by_dist[i]);
    }
    std::vector<std::size_t> ordered(taken.begin(), taken.end());
    for (std::size_t i : ordered) out.push_back(h.at(i));
    return out;
}

// --- rule-based mutation -------------------------------------------------------

namespace detail {

inline std::string mutated_id(Rng& rng) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t v = rng.next_u64();
    std::string suffix(8, '0');
    for (int i = 7; i >= 0; --i) {
        suffix[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return "mut-" + suffix;
}

inline ParentSelectorKind random_other_kind(ParentSelectorKind current, Rng& rng) {
    static constexpr ParentSelectorKind kKinds[] = {
        ParentSelectorKind::uniform,        ParentSelectorKind::greedy_best,
        ParentSelectorKind::top_k_uniform,  ParentSelectorKind::score_softmax,
        ParentSelectorKind::tiered,         ParentSelectorKind::ucb,
        ParentSelectorKind::quantile_biased, ParentSelectorKind::beam,
        ParentSelectorKind::best_of_n,      ParentSelectorKind::map_elites,
    };
    ParentSelectorKind pick = current;
    while (pick == current) {
        pick = kKinds[rng.uniform_index(std::size(kKinds))];
    }
    return pick;
}

inline bool selector_has_params(ParentSelectorKind k) {
    return k != ParentSelectorKind::uniform && k != ParentSelectorKind::greedy_best;
}

inline void perturb_selector_param(ParentSelector& p, Rng& rng) {
    switch (p.kind) {
    case ParentSelectorKind::top_k_uniform:
        p.k = std::max<std::int64_t>(1, p.k + (rng.uniform01() < 0.5 ? -1 : 1) *
                                            (1 + static_cast<std::int64_t>(rng.uniform_index(3))));
        break;
    case ParentSelectorKind::score_softmax:
        p.temperature = std::max(1e-3, p.temperature * (rng.uniform01() < 0.5 ? 0.5 : 2.0));
        break;
    case ParentSelectorKind::tiered: {
        // Jitter tier weights and renormalize.
        double sum = 0.0;
        for (auto& w : p.tier_weights) {
            w = std::max(0.05, w + rng.uniform(-0.2, 0.2));
            sum += w;
        }
        for (auto& w : p.tier_weights) w /= sum;
        break;
    }
    case ParentSelectorKind::ucb:
        p.c = std::max(0.0, p.c * (rng.uniform01() < 0.5 ? 0.5 : 2.0));
        break;
    case ParentSelectorKind::quantile_biased:
        p.q = std::clamp(p.q + rng.uniform(-0.2, 0.2), 0.05, 1.0);
        break;
    case ParentSelectorKind::beam:
        p.width = std::max<std::int64_t>(
            1, p.width + (rng.uniform01() < 0.5 ? -1 : 1) *
                             (1 + static_cast<std::int64_t>(rng.uniform_index(3))));
        break;
    case ParentSelectorKind::best_of_n:
        p.n = std::max<std::int64_t>(
            1, p.n + (rng.uniform01() < 0.5 ? -1 : 1) *
                         (1 + static_cast<std::int64_t>(rng.uniform_index(4))));
        break;
    case ParentSelectorKind::map_elites:
        p.bins = std::clamp<std::int64_t>(
            p.bins + (rng.uniform01() < 0.5 ? -2 : 2), 2, 64);
        break;
    default:
        break;
    }
}

} // namespace detail

// Applies exactly one change to the parent spec: the parent-selector kind, a
// parent-selector parameter, the inspiration selector, or the operator
// policy. Policy mutations shift mass toward diverge while progress is
// stalled and toward refine otherwise.
inline StrategySpec mutate_strategy(const StrategySpec& parent,
                                    const PopulationDescriptor& phi_now, Rng& rng) {
    StrategySpec out = parent;
    out.id = detail::mutated_id(rng);
    out.provenance = Provenance::mutated;
    out.lineage = parent.id;

    enum class Group { parent_kind, parent_param, inspiration, policy };
    Group group;
    switch (rng.uniform_index(4)) {
    case 0: group = Group::parent_kind; break;
    case 1: group = Group::parent_param; break;
    case 2: group = Group::inspiration; break;
    default: group = Group::policy; break;
    }
    if (group == Group::parent_param &&
        !detail::selector_has_params(parent.parent_selector.kind)) {
        group = Group::parent_kind;
    }

    switch (group) {
    case Group::parent_kind: {
        const auto kind = detail::random_other_kind(parent.parent_selector.kind, rng);
        ParentSelector fresh;
        fresh.kind = kind;
        fresh.feature_keys = parent.parent_selector.feature_keys;
        out.parent_selector = fresh;
        break;
    }
    case Group::parent_param:
        detail::perturb_selector_param(out.parent_selector, rng);
        if (out.parent_selector == parent.parent_selector) {
            // A clamped perturbation can be a no-op; force a minimal change.
            detail::perturb_selector_param(out.parent_selector, rng);
            if (out.parent_selector == parent.parent_selector) {
                out.parent_selector.kind =
                    detail::random_other_kind(parent.parent_selector.kind, rng);
            }
        }
        break;
    case Group::inspiration: {
        std::vector<InspirationSelectorKind> menu{
            InspirationSelectorKind::none, InspirationSelectorKind::uniform,
            InspirationSelectorKind::diverse_map_elites, InspirationSelectorKind::tiered};
        if (!parent.inspiration_selector.objective_keys.empty()) {
            menu.push_back(InspirationSelectorKind::multi_objective_top);
        }
        InspirationSelector ins = parent.inspiration_selector;
        if (rng.uniform01() < 0.5 && ins.kind != InspirationSelectorKind::none) {
            ins.m = std::max<std::int64_t>(
                1, ins.m + (rng.uniform01() < 0.5 ? -1 : 1));
        } else {
            InspirationSelectorKind kind = ins.kind;
            while (kind == ins.kind) {
                kind = menu[rng.uniform_index(menu.size())];
            }
            ins.kind = kind;
            if (ins.kind == InspirationSelectorKind::none) ins.m = 0;
            else if (ins.m < 1) ins.m = 2;
        }
        if (ins == parent.inspiration_selector) {
            ins.kind = ins.kind == InspirationSelectorKind::uniform
                           ? InspirationSelectorKind::tiered
                           : InspirationSelectorKind::uniform;
            if (ins.m < 1) ins.m = 2;
        }
        out.inspiration_selector = ins;
        break;
    }
    case Group::policy: {
        std::int64_t window_len = 0;
        for (const auto& [k, v] : phi_now.recent_window.operator_counts) window_len += v;
        if (window_len == 0) window_len = std::max<std::int64_t>(1, phi_now.size);
        const bool stalled = phi_now.steps_since_improvement > window_len / 2;
        const auto blend_toward = [](OperatorPolicy pol, bool toward_diverge) {
            const double blend = 0.3;
            const double target_rf = toward_diverge ? 0.0 : 1.0;
            const double target_dv = toward_diverge ? 1.0 : 0.0;
            pol.free_form = (1.0 - blend) * pol.free_form;
            pol.refine = (1.0 - blend) * pol.refine + blend * target_rf;
            pol.diverge = (1.0 - blend) * pol.diverge + blend * target_dv;
            const double sum = pol.free_form + pol.refine + pol.diverge;
            pol.free_form /= sum;
            pol.refine /= sum;
            pol.diverge /= sum;
            return pol;
        };
        OperatorPolicy next = blend_toward(parent.operator_policy, stalled);
        if (next == parent.operator_policy) {
            // Already saturated at the target; move the other way instead so
            // the mutation is never a no-op.
            next = blend_toward(parent.operator_policy, !stalled);
        }
        out.operator_policy = next;
        break;
    }
    }
    return out;
}

// --- LLM-backed strategy generation ---------------------------------------------

inline std::string strategy_generation_system_prompt() {
    return "You are an expert developer designing a search strategy for an evolutionary "
           "optimizer. The optimizer keeps a population database of evaluated candidates; at "
           "each step the strategy selects one parent, a variation operator, and an optional "
           "inspiration set to build the next generation prompt.\n"
           "Respond with a single JSON object and nothing else, using exactly this shape:\n"
           "{\n"
           "  \"id\": \"<short-string>\",\n"
           "  \"parent_selector\": {\"kind\": \"uniform|greedy_best|top_k_uniform|score_softmax|"
           "tiered|ucb|quantile_biased|beam|best_of_n|map_elites\", ...params},\n"
           "  \"inspiration_selector\": {\"kind\": \"none|uniform|diverse_map_elites|"
           "multi_objective_top|tiered\", \"m\": <int>},\n"
           "  \"operator_policy\": {\"free_form\": p0, \"refine\": p1, \"diverge\": p2},\n"
           "  \"provenance\": \"llm_generated\",\n"
           "  \"lineage\": \"<parent strategy id>\"\n"
           "}\n"
           "Parameter fields: top_k_uniform takes k; score_softmax takes temperature > 0; "
           "tiered takes tier_fractions (sum 1) and tier_weights; ucb takes c >= 0; "
           "quantile_biased takes q in (0,1]; beam takes width; best_of_n takes n; map_elites "
           "takes bins and feature_keys. The operator policy must sum to 1.";
}

inline std::optional<json> extract_json_object(const std::string& text) {
    const auto start = text.find('{');
    if (start == std::string::npos) return std::nullopt;
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escaped) escaped = false;
            else if (c == '\\') escaped = true;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '{') ++depth;
        else if (c == '}') {
            --depth;
            if (depth == 0) {
                const std::string body = text.substr(start, i - start + 1);
                json parsed = json::parse(body, nullptr, false);
                if (parsed.is_discarded()) return std::nullopt;
                return parsed;
            }
        }
    }
    return std::nullopt;
}

// Prompts the model with the parent strategy, inspiration strategies and
// their scores, the current descriptor, and recent history; parses and
// validates the reply. Returns nothing once the retry budget is exhausted.
inline std::optional<StrategySpec> generate_strategy(
    ChatClient& client, const StrategySpec& parent,
    const std::vector<StrategyRecord>& inspirations, const PopulationDescriptor& phi_now,
    const StrategyDatabase& h, int retry_budget, const std::string& new_id) {
    json user;
    user["parent_strategy"] = spec_to_json(parent);
    user["inspirations"] = json::array();
    for (const auto& r : inspirations) {
        user["inspirations"].push_back({{"strategy", spec_to_json(r.spec)}, {"J", r.J}});
    }
    user["population_descriptor"] = descriptor_to_json(phi_now);
    user["recent_history"] = json::array();
    const std::size_t hist = std::min<std::size_t>(h.size(), 8);
    for (std::size_t i = h.size() - hist; i < h.size(); ++i) {
        user["recent_history"].push_back({{"strategy_id", h.at(i).spec.id},
                                          {"J", h.at(i).J},
                                          {"delta", h.at(i).delta},
                                          {"window_len", h.at(i).window_len}});
    }
    const std::string user_text =
        "Design an improved search strategy for the current population state.\n" + user.dump(2);

    for (int attempt = 0; attempt <= retry_budget; ++attempt) {
        const ChatResult res =
            client.chat({{"system", strategy_generation_system_prompt()}, {"user", user_text}});
        if (!res.ok) continue;
        const auto obj = extract_json_object(res.content);
        if (!obj) continue;
        StrategySpec spec;
        try {
            spec = spec_from_json(*obj);
        } catch (const std::exception&) {
            continue;
        }
        spec.id = new_id;
        spec.provenance = Provenance::llm_generated;
        spec.lineage = parent.id;
        if (validate_spec(spec).empty()) return spec;
    }
    return std::nullopt;
}

// Schema validation plus a behavioral dry run: five context samples on a
// database snapshot must succeed before a strategy may be deployed.
inline std::vector<std::string> validate_strategy(const StrategySpec& spec,
                                                  const SolutionDatabase& db_snapshot) {
    auto errors = validate_spec(spec);
    if (!errors.empty()) return errors;
    if (db_snapshot.empty()) {
        return {"dry run requires a non-empty database snapshot"};
    }
    StrategySampler sampler(spec);
    Rng throwaway = Rng::substream(0x5eedf00d, "strategy-dry-run");
    for (int i = 0; i < 5; ++i) {
        try {
            const auto ctx = sampler.sample_context(db_snapshot, throwaway);
            if (ctx.parent.id.empty()) {
                errors.push_back("dry run call " + std::to_string(i) + ": empty parent");
                return errors;
            }
            for (const auto& r : ctx.inspirations) {
                if (r.id == ctx.parent.id) {
                    errors.push_back("dry run call " + std::to_string(i) +
                                     ": parent appeared in inspirations");
                    return errors;
                }
            }
        } catch (const std::exception& e) {
            errors.push_back("dry run call " + std::to_string(i) + " failed: " + e.what());
            return errors;
        }
    }
    return errors;
}

// --- serialization ---------------------------------------------------------------

inline json strategy_record_to_json(const StrategyRecord& r) {
    json j;
    j["spec"] = spec_to_json(r.spec);
    j["descriptor_before"] = descriptor_to_json(r.descriptor_before);
    if (r.descriptor_after) j["descriptor_after"] = descriptor_to_json(*r.descriptor_after);
    else j["descriptor_after"] = nullptr;
    j["J"] = r.J;
    j["delta"] = r.delta;
    j["window_len"] = r.window_len;
    j["deployed_at_step"] = r.deployed_at_step;
    return j;
}

inline StrategyRecord strategy_record_from_json(const json& j) {
    StrategyRecord r;
    r.spec = spec_from_json(j.at("spec"));
    r.descriptor_before = descriptor_from_json(j.at("descriptor_before"));
    if (!j.at("descriptor_after").is_null()) {
        r.descriptor_after = descriptor_from_json(j.at("descriptor_after"));
    }
    r.J = j.at("J").get<double>();
    r.delta = j.at("delta").get<double>();
    r.window_len = j.at("window_len").get<std::int64_t>();
    r.deployed_at_step = j.at("deployed_at_step").get<std::int64_t>();
    return r;
}

} // namespace metaevolve
