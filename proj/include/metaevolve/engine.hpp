#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "metaevolve/core.hpp"
#include "metaevolve/descriptor.hpp"
#include "metaevolve/event_log.hpp"
#include "metaevolve/meta.hpp"
#include "metaevolve/rng.hpp"
#include "metaevolve/solution_gen.hpp"
#include "metaevolve/strategy.hpp"
#include "metaevolve/tasks.hpp"

namespace metaevolve {

struct RunConfig {
    std::int64_t budget_T = 100;
    std::int64_t window_W = 0; // 0 -> ceil(0.10 * budget_T)
    enum class TauMode { relative, absolute };
    TauMode tau_mode = TauMode::relative;
    double tau_value = 1e-3;
    std::uint64_t seed = 1;
    TaskId task_id = TaskId::sphere;
    TaskParams task_params;
    GeneratorConfig generator;
    enum class StrategyGen { mutator_only, llm };
    StrategyGen strategy_generator = StrategyGen::mutator_only;
    std::optional<StrategySpec> initial_strategy;
    int retry_budget = 3;
    std::string log_path;
    enum class ClockMode { logical, system };
    ClockMode clock = ClockMode::logical;
    double penalty_floor = kDefaultPenaltyFloor;
    double meta_temperature = 0.5;
    std::int64_t prompt_char_budget = 32000;
    std::int64_t meta_inspirations = 2;

    std::int64_t effective_window() const {
        if (window_W > 0) return window_W;
        return (budget_T + 9) / 10;
    }

    double tau_for(double s_start) const {
        if (tau_mode == TauMode::absolute) return tau_value;
        return tau_value * std::max(std::abs(s_start), 1.0);
    }
};

inline std::vector<std::string> validate_config(const RunConfig& c) {
    std::vector<std::string> errors;
    if (c.budget_T < 1) errors.push_back("budget_T must be >= 1");
    const std::int64_t w = c.effective_window();
    if (w < 1) errors.push_back("window_W must be >= 1");
    if (c.budget_T >= 1 && w > c.budget_T) {
        errors.push_back("window_W must not exceed budget_T");
    }
    if (c.tau_value < 0.0) errors.push_back("tau must be >= 0");
    if (c.retry_budget < 0) errors.push_back("retry_budget must be >= 0");
    if (c.generator.kind == GeneratorConfig::Kind::scripted_numeric) {
        if (!(c.generator.scripted.refine_sigma > 0.0)) {
            errors.push_back("scripted generator: refine_sigma must be > 0");
        }
        const double f = c.generator.scripted.diverge_reinit_fraction;
        if (!(f > 0.0 && f <= 1.0)) {
            errors.push_back("scripted generator: diverge_reinit_fraction must be in (0,1]");
        }
    } else {
        if (c.generator.llm.endpoint.empty()) errors.push_back("llm generator: endpoint required");
        if (c.generator.llm.model.empty()) errors.push_back("llm generator: model required");
        if (c.generator.llm.max_retries < 0) errors.push_back("llm generator: retries must be >= 0");
    }
    if (c.initial_strategy) {
        for (auto& e : validate_spec(*c.initial_strategy)) {
            errors.push_back("initial_strategy: " + e);
        }
    }
    if (c.log_path.empty()) errors.push_back("log_path must be set");
    return errors;
}

// --- config serialization (run_started echo; resume reconstructs from it) ----

inline json task_params_to_json(const TaskParams& p) {
    json j;
    j["circles"] = p.circles;
    j["container"] = p.container == CircleContainer::square ? "square" : "rect";
    j["rect_aspect"] = p.rect_aspect;
    j["packing_mode"] =
        p.packing_mode == CirclePackingMode::sum_radii ? "sum_radii" : "common_radius";
    j["overlap_tol"] = p.overlap_tol;
    j["points"] = p.points;
    j["ratio_points"] = p.ratio_points;
    j["ratio_dim"] = p.ratio_dim;
    j["bins"] = p.bins;
    j["series_seed"] = p.series_seed;
    j["series_length"] = p.series_length;
    j["noise_sigma"] = p.noise_sigma;
    j["score_weights"] = p.score_weights;
    j["dim"] = p.dim;
    j["phase_gap"] = p.phase_gap;
    return j;
}

inline TaskParams task_params_from_json(const json& j) {
    TaskParams p;
    if (j.contains("circles")) p.circles = j.at("circles").get<std::int64_t>();
    if (j.contains("container")) {
        p.container = j.at("container").get<std::string>() == "rect" ? CircleContainer::rect
                                                                     : CircleContainer::square;
    }
    if (j.contains("rect_aspect")) p.rect_aspect = j.at("rect_aspect").get<double>();
    if (j.contains("packing_mode")) {
        p.packing_mode = j.at("packing_mode").get<std::string>() == "common_radius"
                             ? CirclePackingMode::common_radius
                             : CirclePackingMode::sum_radii;
    }
    if (j.contains("overlap_tol")) p.overlap_tol = j.at("overlap_tol").get<double>();
    if (j.contains("points")) p.points = j.at("points").get<std::int64_t>();
    if (j.contains("ratio_points")) p.ratio_points = j.at("ratio_points").get<std::int64_t>();
    if (j.contains("ratio_dim")) p.ratio_dim = j.at("ratio_dim").get<std::int64_t>();
    if (j.contains("bins")) p.bins = j.at("bins").get<std::int64_t>();
    if (j.contains("series_seed")) p.series_seed = j.at("series_seed").get<std::uint64_t>();
    if (j.contains("series_length")) p.series_length = j.at("series_length").get<std::int64_t>();
    if (j.contains("noise_sigma")) p.noise_sigma = j.at("noise_sigma").get<double>();
    if (j.contains("score_weights")) p.score_weights = j.at("score_weights").get<std::vector<double>>();
    if (j.contains("dim")) p.dim = j.at("dim").get<std::int64_t>();
    if (j.contains("phase_gap")) p.phase_gap = j.at("phase_gap").get<double>();
    return p;
}

inline json generator_config_to_json(const GeneratorConfig& g) {
    json j;
    j["kind"] = g.kind == GeneratorConfig::Kind::scripted_numeric ? "scripted_numeric" : "llm";
    if (g.kind == GeneratorConfig::Kind::scripted_numeric) {
        j["refine_sigma"] = g.scripted.refine_sigma;
        j["diverge_reinit_fraction"] = g.scripted.diverge_reinit_fraction;
        json bounds = json::array();
        for (const auto& [lo, hi] : g.scripted.clamp_bounds) bounds.push_back({lo, hi});
        j["clamp_bounds"] = bounds;
    } else {
        j["endpoint"] = g.llm.endpoint;
        j["model"] = g.llm.model;
        j["temperature"] = g.llm.temperature;
        j["max_retries"] = g.llm.max_retries;
        j["timeout_seconds"] = g.llm.timeout_seconds;
    }
    return j;
}

inline GeneratorConfig generator_config_from_json(const json& j) {
    GeneratorConfig g;
    if (j.at("kind").get<std::string>() == "llm") {
        g.kind = GeneratorConfig::Kind::llm;
        g.llm.endpoint = j.at("endpoint").get<std::string>();
        g.llm.model = j.at("model").get<std::string>();
        if (j.contains("temperature")) g.llm.temperature = j.at("temperature").get<double>();
        if (j.contains("max_retries")) g.llm.max_retries = j.at("max_retries").get<int>();
        if (j.contains("timeout_seconds")) g.llm.timeout_seconds = j.at("timeout_seconds").get<double>();
    } else {
        g.kind = GeneratorConfig::Kind::scripted_numeric;
        if (j.contains("refine_sigma")) g.scripted.refine_sigma = j.at("refine_sigma").get<double>();
        if (j.contains("diverge_reinit_fraction")) {
            g.scripted.diverge_reinit_fraction = j.at("diverge_reinit_fraction").get<double>();
        }
        if (j.contains("clamp_bounds")) {
            for (const auto& b : j.at("clamp_bounds")) {
                g.scripted.clamp_bounds.emplace_back(b.at(0).get<double>(), b.at(1).get<double>());
            }
        }
    }
    return g;
}

inline json run_config_to_json(const RunConfig& c) {
    json j;
    j["budget_T"] = c.budget_T;
    j["window_W"] = c.window_W;
    j["tau_mode"] = c.tau_mode == RunConfig::TauMode::relative ? "relative" : "absolute";
    j["tau_value"] = c.tau_value;
    j["seed"] = c.seed;
    j["task"] = to_string(c.task_id);
    j["task_params"] = task_params_to_json(c.task_params);
    j["generator"] = generator_config_to_json(c.generator);
    j["strategy_generator"] =
        c.strategy_generator == RunConfig::StrategyGen::mutator_only ? "mutator_only" : "llm";
    if (c.initial_strategy) j["initial_strategy"] = spec_to_json(*c.initial_strategy);
    else j["initial_strategy"] = nullptr;
    j["retry_budget"] = c.retry_budget;
    j["log_path"] = c.log_path;
    j["clock"] = c.clock == RunConfig::ClockMode::logical ? "logical" : "system";
    j["penalty_floor"] = c.penalty_floor;
    j["meta_temperature"] = c.meta_temperature;
    j["prompt_char_budget"] = c.prompt_char_budget;
    j["meta_inspirations"] = c.meta_inspirations;
    return j;
}

inline RunConfig run_config_from_json(const json& j) {
    RunConfig c;
    c.budget_T = j.at("budget_T").get<std::int64_t>();
    c.window_W = j.at("window_W").get<std::int64_t>();
    c.tau_mode = j.at("tau_mode").get<std::string>() == "absolute" ? RunConfig::TauMode::absolute
                                                                   : RunConfig::TauMode::relative;
    c.tau_value = j.at("tau_value").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.task_id = task_id_from_string(j.at("task").get<std::string>());
    c.task_params = task_params_from_json(j.at("task_params"));
    c.generator = generator_config_from_json(j.at("generator"));
    c.strategy_generator = j.at("strategy_generator").get<std::string>() == "llm"
                               ? RunConfig::StrategyGen::llm
                               : RunConfig::StrategyGen::mutator_only;
    if (!j.at("initial_strategy").is_null()) {
        c.initial_strategy = spec_from_json(j.at("initial_strategy"));
    }
    c.retry_budget = j.at("retry_budget").get<int>();
    c.log_path = j.at("log_path").get<std::string>();
    c.clock = j.at("clock").get<std::string>() == "system" ? RunConfig::ClockMode::system
                                                           : RunConfig::ClockMode::logical;
    c.penalty_floor = j.at("penalty_floor").get<double>();
    c.meta_temperature = j.at("meta_temperature").get<double>();
    c.prompt_char_budget = j.at("prompt_char_budget").get<std::int64_t>();
    if (j.contains("meta_inspirations")) {
        c.meta_inspirations = j.at("meta_inspirations").get<std::int64_t>();
    }
    return c;
}

inline std::string config_hash(const RunConfig& c) {
    const std::string dump = run_config_to_json(c).dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// --- run result ----------------------------------------------------------------

struct TimelineEntry {
    std::int64_t step = 0;
    std::string strategy_id;
    std::string reason; // "initial" or "stagnation"
};

struct RunResult {
    SolutionRecord best;
    std::vector<double> trajectory_raw; // best-so-far raw score per step
    std::vector<TimelineEntry> strategy_timeline;
    StrategyDatabase history;
    std::int64_t steps_executed = 0;
    std::int64_t switch_count = 0;
};

// --- engine ----------------------------------------------------------------------

// Algorithm: repeat windows of solution evolution under the active strategy,
// score each window, and evolve a replacement strategy whenever the window
// improvement falls below the stagnation threshold. The solution population
// is never reset on a switch.
class Engine {
public:
    explicit Engine(RunConfig cfg, ChatClient* chat = nullptr)
        : cfg_(std::move(cfg)), chat_(chat) {
        auto errors = validate_config(cfg_);
        if (!errors.empty()) {
            throw std::invalid_argument("invalid config: " + errors.front());
        }
        init_common();
        writer_.open_truncate(cfg_.log_path);
        emit_run_started();
    }

    // Reconstructs engine state by replaying a (possibly truncated) log.
    static Engine resume(const std::string& log_path, ChatClient* chat = nullptr) {
        LoadedLog loaded = load_event_log(log_path);
        if (loaded.events.empty()) {
            throw std::runtime_error(
                "log is empty; start a fresh run instead of resuming: " + log_path);
        }
        if (loaded.events.front().at("event") != "run_started") {
            throw std::runtime_error("log does not begin with run_started: " + log_path);
        }
        RunConfig cfg = run_config_from_json(loaded.events.front().at("config"));
        cfg.log_path = log_path; // the file may have been moved

        Engine e(cfg, chat, internal_resume_tag{});
        e.replay(loaded.events);
        if (loaded.truncated_tail) {
            rewrite_event_log(log_path, loaded.events);
            e.resume_warning_ = "dropped incomplete trailing data; resuming from last complete event";
        }
        e.writer_.open_append(log_path);
        return e;
    }

    bool complete() const { return finished_; }
    const std::string& resume_warning() const { return resume_warning_; }
    const RunConfig& config() const { return cfg_; }
    const SolutionDatabase& database() const { return db_; }

    RunResult run() {
        if (!finished_) {
            if (t_ == 0) seed_population();
            main_loop();
            emit_run_finished();
            finished_ = true;
        }
        return make_result();
    }

private:
    struct internal_resume_tag {};

    Engine(RunConfig cfg, ChatClient* chat, internal_resume_tag)
        : cfg_(std::move(cfg)), chat_(chat) {
        init_common();
    }

    void init_common() {
        task_ = make_task(cfg_.task_id, cfg_.task_params);
        task_.penalty_floor = cfg_.penalty_floor;
        if (cfg_.generator.kind == GeneratorConfig::Kind::scripted_numeric &&
            cfg_.generator.scripted.clamp_bounds.empty()) {
            cfg_.generator.scripted.clamp_bounds = task_.bounds;
        }
        active_spec_ = cfg_.initial_strategy ? *cfg_.initial_strategy : default_initial_strategy();
        sampler_ = std::make_unique<StrategySampler>(active_spec_);
        rng_strategy_ = Rng::substream(cfg_.seed, "strategy");
        rng_generator_ = Rng::substream(cfg_.seed, "generator");
        rng_meta_ = Rng::substream(cfg_.seed, "meta");
        if (cfg_.generator.kind == GeneratorConfig::Kind::llm && chat_) {
            prompts_ = instantiate_operator_prompts(task_.brief, chat_,
                                                    cfg_.generator.llm.max_retries);
        } else {
            prompts_ = static_operator_prompts(task_.brief);
        }
    }

    std::int64_t now() {
        if (cfg_.clock == RunConfig::ClockMode::logical) return t_;
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::system_clock::now().time_since_epoch())
            .count();
    }

    json rng_checkpoints() const {
        json j;
        j["strategy"] = rng_strategy_.checkpoint();
        j["generator"] = rng_generator_.checkpoint();
        j["meta"] = rng_meta_.checkpoint();
        return j;
    }

    void restore_rng(const json& j) {
        rng_strategy_ = Rng::from_checkpoint(j.at("strategy").get<std::string>());
        rng_generator_ = Rng::from_checkpoint(j.at("generator").get<std::string>());
        rng_meta_ = Rng::from_checkpoint(j.at("meta").get<std::string>());
    }

    void emit(const std::string& type, json body) {
        body["event"] = type;
        body["step"] = t_;
        body["rng"] = rng_checkpoints();
        writer_.write(body);
    }

    void emit_run_started() {
        json body;
        body["config"] = run_config_to_json(cfg_);
        body["config_hash"] = config_hash(cfg_);
        // The strategy score clamps its level weight at zero so it stays
        // defined for negative internal scores; recorded here so every log
        // names the exact scoring rule it was produced under.
        body["score_rule"] = "J = delta * log1p(max(s_start, 0)) / sqrt(W)";
        emit("run_started", std::move(body));
    }

    void emit_run_finished() {
        const auto& best = db_.best_record();
        json body;
        body["summary"] = {{"best_id", best.id},
                           {"best_raw", best.evaluation.raw_score},
                           {"best_internal", best.evaluation.internal_score},
                           {"steps_executed", t_},
                           {"switch_count", switch_count_}};
        emit("run_finished", std::move(body));
    }

    static std::string record_id(std::int64_t iteration) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "r%06lld", static_cast<long long>(iteration));
        return buf;
    }

    void append_record(SolutionRecord record) {
        db_.insert_record(record);
        t_ += 1;
        const auto best = db_.best_score();
        trajectory_raw_.push_back(best.raw);
        json body;
        body["record"] = record_to_json(record);
        emit("step", std::move(body));
    }

    void seed_population() {
        SolutionRecord seed;
        seed.id = record_id(0);
        seed.payload = task_.default_payload;
        seed.evaluation = evaluate(task_, seed.payload);
        seed.iteration_found = 0;
        seed.operator_label = OperatorLabel::free_form;
        seed.strategy_id = active_spec_.id;
        seed.timestamp = now();
        append_record(std::move(seed));
        timeline_.push_back({1, active_spec_.id, "initial"});
        window_start_ = 0;
        prev_window_start_ = 0;
    }

    std::span<const SolutionRecord> window_slice(std::int64_t begin, std::int64_t end) const {
        if (end <= begin) return {};
        scratch_.assign(db_.begin() + begin, db_.begin() + end);
        return {scratch_.data(), scratch_.size()};
    }

    void main_loop() {
        const std::int64_t T = cfg_.budget_T;
        const std::int64_t W = cfg_.effective_window();
        if (pending_phase3_) {
            // Resumed right after a window was scored: redo the stagnation
            // decision for that window before opening the next one.
            const double delta = h_.at(h_.size() - 1).delta;
            const double s_end = db_.prefix_best(static_cast<std::size_t>(t_));
            const double tau = cfg_.tau_for(s_end - delta);
            if (detect_stagnation(delta, tau)) attempt_switch(delta, tau);
            pending_phase3_ = false;
            in_window_ = false;
        }
        // `in_window_` keeps the loop alive after a resume that landed on the
        // final step of a still-unscored window.
        while (t_ < T || in_window_) {
            if (!in_window_) {
                prev_window_start_ = window_start_;
                window_start_ = t_;
                phi_window_ = compute_descriptor(db_, window_slice(prev_window_start_, t_));
                s_start_ = db_.prefix_best(static_cast<std::size_t>(t_));
                in_window_ = true;
            }
            const std::int64_t boundary = std::min(((window_start_ / W) + 1) * W, T);
            while (t_ < boundary) {
                step_once();
            }
            score_window();
            const double tau = cfg_.tau_for(s_start_);
            const double delta = db_.prefix_best(static_cast<std::size_t>(t_)) - s_start_;
            if (detect_stagnation(delta, tau)) {
                attempt_switch(delta, tau);
            }
            in_window_ = false;
        }
    }

    void step_once() {
        const GenerationContext ctx = sampler_->sample_context(db_, rng_strategy_);
        SolutionRecord rec;
        rec.id = record_id(t_);
        rec.iteration_found = t_;
        rec.parent_id = ctx.parent.id;
        rec.operator_label = ctx.op;
        rec.strategy_id = active_spec_.id;
        try {
            if (cfg_.generator.kind == GeneratorConfig::Kind::scripted_numeric) {
                rec.payload = propose_scripted(cfg_.generator.scripted, ctx, rng_generator_);
            } else {
                if (!chat_) throw GenerationFailure("llm generator configured without a client");
                rec.payload = propose_llm(*chat_, cfg_.generator.llm, ctx, prompts_, task_.brief,
                                          static_cast<std::size_t>(cfg_.prompt_char_budget));
            }
            rec.evaluation = evaluate(task_, rec.payload);
        } catch (const GenerationFailure& e) {
            // A failed generation still consumes a step so the budget stays exact.
            rec.payload = ctx.parent.payload;
            rec.evaluation = Evaluation::invalid(cfg_.penalty_floor,
                                                 {{"generation_error", std::string(e.what())}});
        }
        rec.timestamp = now();
        append_record(std::move(rec));
    }

    void score_window() {
        const std::int64_t window_len = t_ - window_start_;
        const double s_end = db_.prefix_best(static_cast<std::size_t>(t_));
        const auto phi_after = compute_descriptor(db_, window_slice(window_start_, t_));
        record_deployment(h_, active_spec_, phi_window_, phi_after, s_start_, s_end, window_len,
                          t_);
        json body;
        body["strategy_record"] = strategy_record_to_json(h_.at(h_.size() - 1));
        emit("window_scored", std::move(body));
    }

    void attempt_switch(double delta, double tau) {
        const auto phi_now = compute_descriptor(db_, window_slice(window_start_, t_));
        std::optional<std::size_t> parent_index;
        const StrategyRecord parent =
            select_parent_strategy(h_, phi_now, cfg_.meta_temperature, rng_meta_, &parent_index);

        // Fallback chain: LLM generation (with retries), then the rule-based
        // mutator, then keeping the current strategy.
        std::optional<StrategySpec> candidate;
        std::string source = "mutator";
        if (cfg_.strategy_generator == RunConfig::StrategyGen::llm && chat_) {
            const auto inspirations = select_inspiration_strategies(
                h_, phi_now, cfg_.meta_inspirations, rng_meta_, parent_index);
            const std::string new_id = detail::mutated_id(rng_meta_);
            auto generated = generate_strategy(*chat_, parent.spec, inspirations, phi_now, h_,
                                               cfg_.retry_budget, new_id);
            if (generated && validate_strategy(*generated, db_).empty()) {
                candidate = std::move(generated);
                source = "llm";
            }
        }
        if (!candidate) {
            for (int attempt = 0; attempt <= cfg_.retry_budget && !candidate; ++attempt) {
                StrategySpec mutated = mutate_strategy(parent.spec, phi_now, rng_meta_);
                if (validate_strategy(mutated, db_).empty()) candidate = std::move(mutated);
            }
        }

        const std::string outcome = candidate ? "applied" : "kept_previous";

        json body;
        body["trigger"] = "stagnation";
        body["outcome"] = outcome;
        body["delta"] = delta;
        body["tau"] = tau;
        body["parent_strategy_id"] = parent.spec.id;
        body["source"] = source;
        emit("switch_attempted", std::move(body));

        if (outcome == "applied") {
            apply_switch(*candidate);
            json applied;
            applied["spec"] = spec_to_json(active_spec_);
            emit("switch_applied", std::move(applied));
        }
    }

    void apply_switch(StrategySpec spec) {
        active_spec_ = std::move(spec);
        sampler_ = std::make_unique<StrategySampler>(active_spec_);
        deployment_start_ = t_;
        switch_count_ += 1;
        timeline_.push_back({t_, active_spec_.id, "stagnation"});
    }

    SolutionDatabase prefix_database(std::int64_t n) const {
        SolutionDatabase p;
        for (std::int64_t i = 0; i < n; ++i) p.insert_record(db_.at(static_cast<std::size_t>(i)));
        return p;
    }

    void replay(const std::vector<json>& events) {
        bool seeded = false;
        std::vector<std::int64_t> window_starts; // start step of window k, in order
        std::string last_type;
        for (const auto& ev : events) {
            const std::string type = ev.at("event").get<std::string>();
            if (type == "step") {
                SolutionRecord rec = record_from_json(ev.at("record"));
                db_.insert_record(rec);
                t_ += 1;
                trajectory_raw_.push_back(db_.best_score().raw);
                if (!seeded) {
                    timeline_.push_back({1, active_spec_.id, "initial"});
                    window_starts.push_back(1);
                    seeded = true;
                } else if (rec.parent_id) {
                    sampler_->note_parent_selected(*rec.parent_id);
                }
            } else if (type == "window_scored") {
                h_.append(strategy_record_from_json(ev.at("strategy_record")));
                window_starts.push_back(t_); // the next window opens here
            } else if (type == "switch_applied") {
                apply_switch(spec_from_json(ev.at("spec")));
            } else if (type == "run_finished") {
                finished_ = true;
            }
            if (type != "run_started") last_type = type;
        }
        if (!events.empty()) restore_rng(events.back().at("rng"));
        if (finished_ || !seeded) return;

        // window_starts = [1, B1, B2, ...]; the number of scored windows is
        // window_starts.size() - 1.
        const std::size_t scored = window_starts.size() - 1;
        if (last_type == "step") {
            // An open window: restore its entry state from the database prefix.
            in_window_ = true;
            window_start_ = window_starts[scored];
            prev_window_start_ = scored >= 1 ? window_starts[scored - 1] : 0;
            const SolutionDatabase prefix = prefix_database(window_start_);
            phi_window_ =
                compute_descriptor(prefix, window_slice(prev_window_start_, window_start_));
            s_start_ = db_.prefix_best(static_cast<std::size_t>(window_start_));
        } else if (last_type == "window_scored") {
            // Scored but the stagnation decision never ran; redo it on resume.
            pending_phase3_ = true;
            in_window_ = false;
            window_start_ = window_starts[scored - 1];
            prev_window_start_ = scored >= 2 ? window_starts[scored - 2] : 0;
        } else {
            // Phase III completed (switch_attempted / switch_applied): the next
            // window opens at the current step.
            in_window_ = false;
            window_start_ = window_starts[scored - 1];
            prev_window_start_ = scored >= 2 ? window_starts[scored - 2] : 0;
        }
    }

    RunResult make_result() {
        RunResult r;
        r.best = db_.best_record();
        r.trajectory_raw = trajectory_raw_;
        r.strategy_timeline = timeline_;
        r.history = h_;
        r.steps_executed = t_;
        r.switch_count = switch_count_;
        return r;
    }

    RunConfig cfg_;
    ChatClient* chat_ = nullptr;
    TaskSpec task_;
    SolutionDatabase db_;
    StrategyDatabase h_;
    StrategySpec active_spec_;
    std::unique_ptr<StrategySampler> sampler_;
    OperatorPrompts prompts_;
    Rng rng_strategy_, rng_generator_, rng_meta_;
    EventLogWriter writer_;

    std::int64_t t_ = 0;
    std::int64_t window_start_ = 0;
    std::int64_t prev_window_start_ = 0;
    std::int64_t deployment_start_ = 0;
    PopulationDescriptor phi_window_;
    double s_start_ = 0.0;
    bool in_window_ = false;
    bool pending_phase3_ = false;
    bool finished_ = false;
    std::vector<double> trajectory_raw_;
    std::vector<TimelineEntry> timeline_;
    std::int64_t switch_count_ = 0;
    std::string resume_warning_;

    mutable std::vector<SolutionRecord> scratch_;
};

} // namespace metaevolve
