#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "metaevolve/config.hpp"
#include "metaevolve/engine.hpp"
#include "metaevolve/report.hpp"

using namespace metaevolve;
namespace fs = std::filesystem;

namespace {

std::string temp_path(const std::string& stem) {
    static int counter = 0;
    const auto dir = fs::temp_directory_path() / "metaevolve_cfg_tests";
    fs::create_directories(dir);
    return (dir / (stem + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++)))
        .string();
}

std::string write_file(const std::string& stem, const std::string& body) {
    const std::string path = temp_path(stem);
    std::ofstream out(path);
    out << body;
    return path;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

TEST_CASE("toml parser handles tables, scalars, arrays, comments") {
    const json j = parse_toml(R"(
# run settings
budget_T = 100        # inline comment
tau_value = 1.5e-3
name = "two phase # not a comment"
flag = true

[task]
id = "two_phase"
dim = 4
weights = [0.4, 0.2, 0.2, 0.2]

[generator]
kind = "scripted_numeric"
)");
    REQUIRE(j.at("budget_T").get<std::int64_t>() == 100);
    REQUIRE(j.at("tau_value").get<double>() == Catch::Approx(1.5e-3));
    REQUIRE(j.at("name").get<std::string>() == "two phase # not a comment");
    REQUIRE(j.at("flag").get<bool>() == true);
    REQUIRE(j.at("task").at("id") == "two_phase");
    REQUIRE(j.at("task").at("weights").size() == 4);
    REQUIRE(j.at("generator").at("kind") == "scripted_numeric");

    REQUIRE_THROWS(parse_toml("key without equals"));
    REQUIRE_THROWS(parse_toml("[unclosed"));
    REQUIRE_THROWS(parse_toml("x = "));
}

TEST_CASE("TOML and JSON configs load to the same RunConfig") {
    const std::string toml_path = temp_path("cfg") + ".toml";
    std::ofstream(toml_path) << R"(
budget_T = 40
window_W = 8
seed = 3
log_path = "a.jsonl"

[task]
id = "two_phase"
dim = 4
phase_gap = 0.5

[generator]
kind = "scripted_numeric"
refine_sigma = 0.05
diverge_reinit_fraction = 0.5
)";
    const std::string json_path = temp_path("cfg") + ".json";
    std::ofstream(json_path) << R"({
  "budget_T": 40,
  "window_W": 8,
  "seed": 3,
  "log_path": "a.jsonl",
  "task": {"id": "two_phase", "dim": 4, "phase_gap": 0.5},
  "generator": {"kind": "scripted_numeric", "refine_sigma": 0.05,
                "diverge_reinit_fraction": 0.5}
})";

    const RunConfig a = load_run_config(toml_path);
    const RunConfig b = load_run_config(json_path);
    REQUIRE(run_config_to_json(a) == run_config_to_json(b));
    REQUIRE(a.budget_T == 40);
    REQUIRE(a.window_W == 8);
    REQUIRE(a.task_id == TaskId::two_phase);
    REQUIRE(a.generator.scripted.refine_sigma == Catch::Approx(0.05));
    REQUIRE(validate_config(a).empty());
}

TEST_CASE("builtin initial strategies are selectable by name") {
    const std::string path = temp_path("cfg_builtin") + ".toml";
    std::ofstream(path) << R"(
budget_T = 10
log_path = "b.jsonl"
initial_strategy = "greedy"
[task]
id = "sphere"
dim = 2
[generator]
kind = "scripted_numeric"
)";
    const RunConfig c = load_run_config(path);
    REQUIRE(c.initial_strategy.has_value());
    REQUIRE(c.initial_strategy->parent_selector.kind == ParentSelectorKind::greedy_best);
    const std::string bad = write_file("cfg_bad", "initial_strategy = \"nonsense\"\n");
    REQUIRE_THROWS(load_run_config(bad));
}

TEST_CASE("report artifacts are a pure function of the log") {
    RunConfig cfg;
    cfg.budget_T = 30;
    cfg.seed = 4;
    cfg.task_id = TaskId::two_phase;
    cfg.task_params.dim = 4;
    cfg.generator.kind = GeneratorConfig::Kind::scripted_numeric;
    cfg.log_path = temp_path("report") + ".jsonl";
    Engine(cfg).run();

    const LogDigest digest = digest_log(cfg.log_path);
    REQUIRE(digest.steps == 30);
    REQUIRE(digest.best_raw.size() == 30);
    REQUIRE(digest.task == "two_phase");

    const std::string out_dir_a = temp_path("report_out_a");
    const std::string out_dir_b = temp_path("report_out_b");
    fs::create_directories(out_dir_a);
    fs::create_directories(out_dir_b);
    const auto a = write_report(digest, out_dir_a, "run");
    const auto b = write_report(digest_log(cfg.log_path), out_dir_b, "run");
    REQUIRE(read_file(a.trajectory_csv) == read_file(b.trajectory_csv));
    REQUIRE(read_file(a.timeline_csv) == read_file(b.timeline_csv));
    REQUIRE(read_file(a.figure_svg) == read_file(b.figure_svg));

    // CSV row count equals steps executed (plus header)
    std::ifstream csv(a.trajectory_csv);
    std::string line;
    int rows = -1; // discount header
    while (std::getline(csv, line)) ++rows;
    REQUIRE(rows == 30);

    // figure is self-contained SVG
    const std::string svg = read_file(a.figure_svg);
    REQUIRE(svg.rfind("<svg", 0) == 0);
    REQUIRE(svg.find("polyline") != std::string::npos);
}

TEST_CASE("trajectory best-so-far columns are non-decreasing in internal score") {
    RunConfig cfg;
    cfg.budget_T = 25;
    cfg.seed = 6;
    cfg.task_id = TaskId::sphere;
    cfg.task_params.dim = 3;
    cfg.generator.kind = GeneratorConfig::Kind::scripted_numeric;
    cfg.log_path = temp_path("traj") + ".jsonl";
    Engine(cfg).run();
    const LogDigest d = digest_log(cfg.log_path);
    for (std::size_t i = 1; i < d.best_internal.size(); ++i) {
        REQUIRE(d.best_internal[i] >= d.best_internal[i - 1]);
    }
}

TEST_CASE("compare curves carry switch markers only where switches happened") {
    RunConfig fixed;
    fixed.budget_T = 30;
    fixed.seed = 8;
    fixed.task_id = TaskId::two_phase;
    fixed.generator.kind = GeneratorConfig::Kind::scripted_numeric;
    fixed.tau_mode = RunConfig::TauMode::absolute;
    fixed.tau_value = 0.0; // delta < 0 never holds: no switches ever
    fixed.log_path = temp_path("fixed") + ".jsonl";
    Engine(fixed).run();

    RunConfig adaptive = fixed;
    adaptive.tau_mode = RunConfig::TauMode::absolute;
    adaptive.tau_value = 1e12;
    adaptive.log_path = temp_path("adaptive") + ".jsonl";
    Engine(adaptive).run();

    const auto fixed_curve = curve_from_digest(digest_log(fixed.log_path), "fixed");
    const auto adaptive_curve = curve_from_digest(digest_log(adaptive.log_path), "adaptive");
    REQUIRE(fixed_curve.switch_steps.empty());
    REQUIRE_FALSE(adaptive_curve.switch_steps.empty());

    const std::string figure = temp_path("cmp") + ".svg";
    write_convergence_svg({fixed_curve, adaptive_curve}, "cmp", figure);
    const std::string svg = read_file(figure);
    REQUIRE(svg.find("circle") != std::string::npos);
    // legend order matches argument order
    REQUIRE(svg.find(">fixed<") < svg.find(">adaptive<"));
}
