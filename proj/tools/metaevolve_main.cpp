#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "metaevolve/config.hpp"
#include "metaevolve/engine.hpp"
#include "metaevolve/llm_client.hpp"
#include "metaevolve/report.hpp"

namespace fs = std::filesystem;
using namespace metaevolve;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::unique_ptr<ChatClient> make_chat_client(const RunConfig& cfg) {
    const bool needs_llm = cfg.generator.kind == GeneratorConfig::Kind::llm ||
                           cfg.strategy_generator == RunConfig::StrategyGen::llm;
    if (!needs_llm) return nullptr;
    std::string endpoint = cfg.generator.llm.endpoint;
    if (const char* env = std::getenv("METAEVOLVE_LLM_ENDPOINT")) endpoint = env;
    if (endpoint.empty()) {
        throw std::invalid_argument("llm mode requires an endpoint (config or METAEVOLVE_LLM_ENDPOINT)");
    }
    return std::make_unique<HttpChatClient>(endpoint, cfg.generator.llm.model,
                                            cfg.generator.llm.temperature,
                                            cfg.generator.llm.timeout_seconds);
}

std::string stem_of(const std::string& log_path) {
    return fs::path(log_path).stem().string();
}

int emit_report_for_log(const std::string& log_path, const std::string& out_dir) {
    const LogDigest digest = digest_log(log_path);
    fs::create_directories(out_dir);
    const ReportBundle bundle = write_report(digest, out_dir, stem_of(log_path));
    std::cout << bundle.summary_text;
    std::cout << "trajectory: " << bundle.trajectory_csv << "\n";
    std::cout << "timeline:   " << bundle.timeline_csv << "\n";
    std::cout << "figure:     " << bundle.figure_svg << "\n";
    return kExitOk;
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            std::optional<std::int64_t> budget, std::optional<std::string> task,
            std::string out_dir, bool mutator_only) {
    RunConfig cfg;
    try {
        cfg = load_run_config(config_path, out_dir + "/run.jsonl");
        if (seed) cfg.seed = *seed;
        if (budget) cfg.budget_T = *budget;
        if (task) cfg.task_id = task_id_from_string(*task);
        if (mutator_only) cfg.strategy_generator = RunConfig::StrategyGen::mutator_only;
        const auto errors = validate_config(cfg);
        if (!errors.empty()) {
            for (const auto& e : errors) std::cerr << "config error: " << e << "\n";
            return kExitUsage;
        }
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        fs::create_directories(out_dir);
        if (fs::path(cfg.log_path).has_parent_path()) {
            fs::create_directories(fs::path(cfg.log_path).parent_path());
        }
        auto chat = make_chat_client(cfg);
        Engine engine(cfg, chat.get());
        const RunResult result = engine.run();
        std::cout << "run complete: " << result.steps_executed << " steps, best raw score "
                  << format_double(result.best.evaluation.raw_score) << ", "
                  << result.switch_count << " strategy switches\n";
        return emit_report_for_log(cfg.log_path, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

int cmd_resume(const std::string& log_path) {
    if (!fs::exists(log_path)) {
        std::cerr << "log not found: " << log_path << "\n";
        return kExitUsage;
    }
    try {
        // Peek at the config first so an LLM client can be wired in before
        // the engine reopens the log.
        const LoadedLog peek = load_event_log(log_path);
        if (peek.events.empty()) {
            std::cerr << "log is empty; use `run` to start fresh: " << log_path << "\n";
            return kExitUsage;
        }
        const RunConfig cfg = run_config_from_json(peek.events.front().at("config"));
        const auto chat = make_chat_client(cfg);

        Engine engine = Engine::resume(log_path, chat.get());
        if (!engine.resume_warning().empty()) {
            std::cerr << "warning: " << engine.resume_warning() << "\n";
        }
        if (engine.complete()) {
            std::cout << "run already complete: " << log_path << "\n";
            return kExitOk;
        }
        const RunResult result = engine.run();
        std::cout << "resumed to completion: " << result.steps_executed << " steps, best raw score "
                  << format_double(result.best.evaluation.raw_score) << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

int cmd_compare(const std::vector<std::string>& logs, const std::string& out_dir) {
    if (logs.size() < 2) {
        std::cerr << "compare needs at least two logs\n";
        return kExitUsage;
    }
    try {
        std::vector<LogDigest> digests;
        for (const auto& path : logs) digests.push_back(digest_log(path));
        for (std::size_t i = 1; i < digests.size(); ++i) {
            if (digests[i].task != digests[0].task) {
                std::cerr << "mismatched tasks: " << digests[0].task << " vs " << digests[i].task
                          << "\n";
                return kExitUsage;
            }
        }
        fs::create_directories(out_dir);
        std::vector<CurveSeries> series;
        for (std::size_t i = 0; i < digests.size(); ++i) {
            series.push_back(curve_from_digest(
                digests[i], stem_of(logs[i]) + " (seed " + std::to_string(digests[i].seed) + ")"));
        }
        const std::string figure = out_dir + "/compare_convergence.svg";
        write_convergence_svg(series, "Best-so-far comparison (" + digests[0].task + ")", figure);
        std::cout << "run, final best raw, switches\n";
        for (std::size_t i = 0; i < digests.size(); ++i) {
            std::cout << stem_of(logs[i]) << ", " << format_double(digests[i].final_best_raw)
                      << ", " << digests[i].switch_count << "\n";
        }
        std::cout << "figure: " << figure << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

int cmd_report(const std::string& log_path, const std::string& out_dir) {
    if (!fs::exists(log_path)) {
        std::cerr << "log not found: " << log_path << "\n";
        return kExitUsage;
    }
    try {
        fs::create_directories(out_dir);
        return emit_report_for_log(log_path, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"metaevolve: two-level evolutionary search with self-adapting strategies"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "execute a run from a config file");
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> budget;
    std::optional<std::string> task;
    std::string out_dir = "out";
    bool mutator_only = false;
    run->add_option("--config", config_path, "TOML or JSON run config")->required();
    run->add_option("--seed", seed, "override the config seed");
    run->add_option("--budget", budget, "override the evaluation budget T");
    run->add_option("--task", task, "override the task id");
    run->add_option("--out", out_dir, "output directory for log and report");
    run->add_flag("--mutator-only", mutator_only, "disable LLM strategy generation");

    // resume
    auto* resume = app.add_subcommand("resume", "continue an interrupted run from its log");
    std::string resume_log;
    resume->add_option("--log", resume_log, "event log path")->required();

    // compare
    auto* compare = app.add_subcommand("compare", "overlay convergence curves of several runs");
    std::vector<std::string> compare_logs;
    std::string compare_out = "out";
    compare->add_option("--out", compare_out, "output directory");
    compare->add_option("logs", compare_logs, "event logs (same task)");

    // report
    auto* report = app.add_subcommand("report", "regenerate CSVs and figure from a log");
    std::string report_log;
    std::string report_out = "out";
    report->add_option("--log", report_log, "event log path")->required();
    report->add_option("--out", report_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (run->parsed()) return cmd_run(config_path, seed, budget, task, out_dir, mutator_only);
    if (resume->parsed()) return cmd_resume(resume_log);
    if (compare->parsed()) return cmd_compare(compare_logs, compare_out);
    if (report->parsed()) return cmd_report(report_log, report_out);
    return kExitUsage;
}
