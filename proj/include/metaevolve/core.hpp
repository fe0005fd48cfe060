#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include <json.hpp>

namespace metaevolve {

using json = nlohmann::json;

inline constexpr double kDefaultPenaltyFloor = -1e9;

// Linear interpolation between order statistics (input sorted ascending).
inline double percentile_interpolated(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw std::invalid_argument("percentile of empty set");
    if (sorted.size() == 1) return sorted[0];
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const auto hi = lo + 1 < sorted.size() ? lo + 1 : lo;
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

enum class PayloadKind { numeric_vector, text };
enum class TaskDirection { maximize, minimize };
enum class OperatorLabel { free_form, refine, diverge };

inline std::string to_string(OperatorLabel op) {
    switch (op) {
    case OperatorLabel::free_form: return "free_form";
    case OperatorLabel::refine: return "refine";
    case OperatorLabel::diverge: return "diverge";
    }
    return "free_form";
}

inline OperatorLabel operator_label_from_string(const std::string& s) {
    if (s == "free_form") return OperatorLabel::free_form;
    if (s == "refine") return OperatorLabel::refine;
    if (s == "diverge") return OperatorLabel::diverge;
    throw std::invalid_argument("unknown operator label: " + s);
}

// A candidate solution: either a numeric parameter vector or opaque text.
struct CandidatePayload {
    PayloadKind kind = PayloadKind::numeric_vector;
    std::vector<double> values;
    std::string text;

    static CandidatePayload numeric(std::vector<double> v) {
        CandidatePayload p;
        p.kind = PayloadKind::numeric_vector;
        p.values = std::move(v);
        for (double x : p.values) {
            if (!std::isfinite(x)) throw std::invalid_argument("numeric payload must be finite");
        }
        return p;
    }

    static CandidatePayload make_text(std::string t) {
        CandidatePayload p;
        p.kind = PayloadKind::text;
        p.text = std::move(t);
        return p;
    }

    bool operator==(const CandidatePayload&) const = default;
};

// Auxiliary evaluator outputs: scalar sub-scores, feature values, short logs.
using ArtifactValue = std::variant<double, std::string>;
using Artifacts = std::map<std::string, ArtifactValue>;

inline double internal_from_raw(double raw, TaskDirection dir) {
    return dir == TaskDirection::maximize ? raw : -raw;
}

struct Evaluation {
    double raw_score = 0.0;
    double internal_score = 0.0; // maximization convention
    bool valid = true;
    Artifacts artifacts;

    static Evaluation scored(double raw, TaskDirection dir, Artifacts arts = {}) {
        Evaluation e;
        e.raw_score = raw;
        e.internal_score = internal_from_raw(raw, dir);
        e.valid = true;
        e.artifacts = std::move(arts);
        return e;
    }

    static Evaluation invalid(double penalty_floor, Artifacts arts = {}) {
        Evaluation e;
        e.raw_score = penalty_floor;
        e.internal_score = penalty_floor;
        e.valid = false;
        e.artifacts = std::move(arts);
        return e;
    }

    bool operator==(const Evaluation&) const = default;
};

struct SolutionRecord {
    std::string id;
    CandidatePayload payload;
    Evaluation evaluation;
    std::int64_t iteration_found = 0;
    std::optional<std::string> parent_id;
    OperatorLabel operator_label = OperatorLabel::free_form;
    std::string strategy_id;
    std::int64_t timestamp = 0;

    bool operator==(const SolutionRecord&) const = default;
};

struct BestScore {
    double internal = 0.0;
    double raw = 0.0;
    std::string id;
};

// Append-only population of evaluated candidates. Records are never mutated
// or removed; std::deque keeps references stable across appends.
class SolutionDatabase {
public:
    void insert_record(SolutionRecord record) {
        if (index_.contains(record.id)) {
            throw std::invalid_argument("duplicate record id: " + record.id);
        }
        if (record.parent_id) {
            auto it = index_.find(*record.parent_id);
            if (it != index_.end() &&
                records_[it->second].iteration_found >= record.iteration_found) {
                throw std::invalid_argument("parent must precede child: " + record.id);
            }
        }
        const double s = record.evaluation.internal_score;
        if (records_.empty()) {
            prefix_best_.push_back(s);
            best_index_.push_back(0);
        } else {
            const std::size_t i = records_.size();
            if (s > prefix_best_.back()) {
                prefix_best_.push_back(s);
                best_index_.push_back(i);
            } else {
                prefix_best_.push_back(prefix_best_.back());
                best_index_.push_back(best_index_.back());
            }
        }
        index_.emplace(record.id, records_.size());
        records_.push_back(std::move(record));
    }

    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    std::int64_t step_count() const { return static_cast<std::int64_t>(records_.size()); }

    const SolutionRecord& at(std::size_t i) const { return records_.at(i); }

    const SolutionRecord* find(const std::string& id) const {
        auto it = index_.find(id);
        return it == index_.end() ? nullptr : &records_[it->second];
    }

    // Maximum internal score; ties broken by earliest iteration_found, then
    // lexicographically smallest id.
    BestScore best_score() const {
        const SolutionRecord& r = best_record();
        return {r.evaluation.internal_score, r.evaluation.raw_score, r.id};
    }

    const SolutionRecord& best_record() const {
        if (records_.empty()) throw std::runtime_error("best_score: empty population");
        const SolutionRecord* best = &records_[best_index_.back()];
        // prefix_best_ already favors the earliest record at each score level,
        // and ids of later duplicates cannot displace it unless lexicographically
        // smaller at the same iteration, which distinct iterations rule out.
        // A linear pass settles exact ties on (iteration, id).
        for (const SolutionRecord& r : records_) {
            if (r.evaluation.internal_score == best->evaluation.internal_score) {
                if (r.iteration_found < best->iteration_found ||
                    (r.iteration_found == best->iteration_found && r.id < best->id)) {
                    best = &r;
                }
            }
        }
        return *best;
    }

    // Best internal score among the first n records.
    double prefix_best(std::size_t n) const {
        if (n == 0 || n > records_.size()) {
            throw std::out_of_range("prefix_best: prefix length out of range");
        }
        return prefix_best_[n - 1];
    }

    // Improvement of the best-so-far score between two prefixes.
    double window_delta(std::int64_t t_start, std::int64_t t_end) const {
        if (t_start <= 0 || t_end < t_start || t_end > step_count()) {
            throw std::out_of_range("window_delta: indices out of range");
        }
        return prefix_best(static_cast<std::size_t>(t_end)) -
               prefix_best(static_cast<std::size_t>(t_start));
    }

    auto begin() const { return records_.begin(); }
    auto end() const { return records_.end(); }

private:
    std::deque<SolutionRecord> records_;
    std::unordered_map<std::string, std::size_t> index_;
    std::deque<double> prefix_best_;
    std::deque<std::size_t> best_index_;
};

// --- JSON serialization -----------------------------------------------------

inline json artifacts_to_json(const Artifacts& a) {
    json out = json::object();
    for (const auto& [k, v] : a) {
        if (std::holds_alternative<double>(v)) out[k] = std::get<double>(v);
        else out[k] = std::get<std::string>(v);
    }
    return out;
}

inline Artifacts artifacts_from_json(const json& j) {
    Artifacts a;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.value().is_string()) a[it.key()] = it.value().get<std::string>();
        else a[it.key()] = it.value().get<double>();
    }
    return a;
}

// One JSON object per line; field set is a stable external contract.
inline json record_to_json(const SolutionRecord& r) {
    json j;
    j["id"] = r.id;
    j["kind"] = r.payload.kind == PayloadKind::numeric_vector ? "numeric_vector" : "text";
    if (r.payload.kind == PayloadKind::numeric_vector) j["values"] = r.payload.values;
    else j["text"] = r.payload.text;
    j["raw_score"] = r.evaluation.raw_score;
    j["internal_score"] = r.evaluation.internal_score;
    j["valid"] = r.evaluation.valid;
    j["artifacts"] = artifacts_to_json(r.evaluation.artifacts);
    j["iteration_found"] = r.iteration_found;
    if (r.parent_id) j["parent_id"] = *r.parent_id;
    else j["parent_id"] = nullptr;
    j["operator_label"] = to_string(r.operator_label);
    j["strategy_id"] = r.strategy_id;
    j["timestamp"] = r.timestamp;
    return j;
}

inline SolutionRecord record_from_json(const json& j) {
    SolutionRecord r;
    r.id = j.at("id").get<std::string>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "numeric_vector") {
        r.payload.kind = PayloadKind::numeric_vector;
        r.payload.values = j.at("values").get<std::vector<double>>();
    } else if (kind == "text") {
        r.payload.kind = PayloadKind::text;
        r.payload.text = j.at("text").get<std::string>();
    } else {
        throw std::invalid_argument("unknown payload kind: " + kind);
    }
    r.evaluation.raw_score = j.at("raw_score").get<double>();
    r.evaluation.internal_score = j.at("internal_score").get<double>();
    r.evaluation.valid = j.at("valid").get<bool>();
    r.evaluation.artifacts = artifacts_from_json(j.at("artifacts"));
    r.iteration_found = j.at("iteration_found").get<std::int64_t>();
    if (!j.at("parent_id").is_null()) r.parent_id = j.at("parent_id").get<std::string>();
    r.operator_label = operator_label_from_string(j.at("operator_label").get<std::string>());
    r.strategy_id = j.at("strategy_id").get<std::string>();
    r.timestamp = j.at("timestamp").get<std::int64_t>();
    return r;
}

} // namespace metaevolve
