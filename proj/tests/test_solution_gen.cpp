#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "metaevolve/solution_gen.hpp"
#include "test_support.hpp"

using namespace metaevolve;
using metaevolve::testing::ScriptedChatClient;
using metaevolve::testing::make_record;

namespace {

GenerationContext ctx_with(std::vector<double> parent_values, OperatorLabel op,
                           std::vector<SolutionRecord> inspirations = {}) {
    GenerationContext ctx;
    ctx.parent = make_record("parent", 1.25, 0, std::move(parent_values));
    ctx.op = op;
    ctx.inspirations = std::move(inspirations);
    ctx.strategy_id = "test";
    return ctx;
}

} // namespace

TEST_CASE("static operator prompts embed the problem brief") {
    const auto p = instantiate_operator_prompts("pack circles", nullptr);
    REQUIRE(p.refine.find("pack circles") != std::string::npos);
    REQUIRE(p.diverge.find("pack circles") != std::string::npos);
    REQUIRE(p.free_form.find("pack circles") != std::string::npos);
    REQUIRE_FALSE(p.refine.empty());
    REQUIRE_THROWS(instantiate_operator_prompts("", nullptr));
}

TEST_CASE("LLM-provided operator prompts are keyed correctly") {
    ScriptedChatClient chat({ScriptedChatClient::ok(
        "FREE_FORM: do anything useful\nREFINE: tweak gently\nDIVERGE: replace the design")});
    const auto p = instantiate_operator_prompts("brief", &chat);
    REQUIRE(p.free_form == "do anything useful");
    REQUIRE(p.refine == "tweak gently");
    REQUIRE(p.diverge == "replace the design");
}

TEST_CASE("missing sections fall back to static templates with a warning") {
    ScriptedChatClient chat({ScriptedChatClient::ok("REFINE: only one\nDIVERGE: two")});
    std::string warned;
    const auto p = instantiate_operator_prompts("brief", &chat, 1,
                                                [&](const std::string& w) { warned = w; });
    REQUIRE(p.free_form.find("brief") != std::string::npos);
    REQUIRE_FALSE(warned.empty());
    REQUIRE(chat.calls() == 2); // one retry before giving up
}

TEST_CASE("generation prompt contains the pieces in order") {
    auto insp1 = make_record("i1", 0.5, 1, {9.0, 8.0});
    auto insp2 = make_record("i2", 0.75, 2, {7.0, 6.0});
    const auto ctx = ctx_with({1.0, 2.0}, OperatorLabel::refine, {insp1, insp2});
    const auto prompts = static_operator_prompts("the brief");
    const std::string out = build_generation_prompt(ctx, prompts, "task text");

    const auto pos_task = out.find("task text");
    const auto pos_op = out.find(prompts.refine);
    const auto pos_parent = out.find("[1, 2]");
    const auto pos_heading = out.find("Inspirations:");
    const auto pos_i1 = out.find("[9, 8]");
    const auto pos_i2 = out.find("[7, 6]");
    REQUIRE(pos_task != std::string::npos);
    REQUIRE(pos_op != std::string::npos);
    REQUIRE(pos_parent != std::string::npos);
    REQUIRE(pos_heading != std::string::npos);
    REQUIRE(pos_i1 != std::string::npos);
    REQUIRE(pos_i2 != std::string::npos);
    REQUIRE(pos_task < pos_op);
    REQUIRE(pos_op < pos_parent);
    REQUIRE(pos_parent < pos_heading);
    REQUIRE(pos_i1 < pos_i2);
    REQUIRE(out.find(prompts.diverge) == std::string::npos);
    // parent appears exactly once
    REQUIRE(out.find("[1, 2]", pos_parent + 1) == std::string::npos);
}

TEST_CASE("empty inspirations produce no heading") {
    const auto ctx = ctx_with({1.0}, OperatorLabel::free_form);
    const std::string out =
        build_generation_prompt(ctx, static_operator_prompts("b"), "task");
    REQUIRE(out.find("Inspirations:") == std::string::npos);
}

TEST_CASE("prompt respects the character budget, dropping oldest inspirations first") {
    std::vector<SolutionRecord> insp;
    for (int i = 0; i < 10; ++i) {
        insp.push_back(make_record("i" + std::to_string(i), 0.1 * i, i + 1,
                                   std::vector<double>(40, 1.0 + i)));
    }
    const auto ctx = ctx_with({1.0}, OperatorLabel::free_form, insp);
    const auto prompts = static_operator_prompts("b");
    const std::string out = build_generation_prompt(ctx, prompts, "task", 900);
    REQUIRE(out.size() <= 900);
    // newest inspiration survives, oldest is dropped
    REQUIRE(out.find("10, 10") != std::string::npos);
    REQUIRE(out.find("1, 1,") == std::string::npos);
}

TEST_CASE("scripted refine with tiny sigma reproduces the parent") {
    ScriptedGenParams p;
    p.refine_sigma = 1e-12;
    p.clamp_bounds = {{-10, 10}, {-10, 10}};
    Rng rng = Rng::substream(1, "gen");
    const auto out = propose_scripted(p, ctx_with({1.0, -2.0}, OperatorLabel::refine), rng);
    REQUIRE(out.values[0] == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(out.values[1] == Catch::Approx(-2.0).margin(1e-9));
}

TEST_CASE("scripted diverge with fraction 1 replays the golden redraw trace") {
    ScriptedGenParams p;
    p.diverge_reinit_fraction = 1.0;
    p.clamp_bounds = {{0, 1}, {0, 1}, {0, 1}};
    Rng rng = Rng::substream(77, "diverge");
    const auto out = propose_scripted(p, ctx_with({0.5, 0.5, 0.5}, OperatorLabel::diverge), rng);
    Rng replayed = Rng::substream(77, "diverge");
    // fraction 1: a full permutation draw (d-1 swaps for d=3... the last pick is
    // over a single element) then one uniform per coordinate, in index order.
    std::vector<std::size_t> idx{0, 1, 2};
    for (std::size_t j = 0; j < 3; ++j) {
        const std::size_t pick = j + replayed.uniform_index(3 - j);
        std::swap(idx[j], idx[pick]);
    }
    std::vector<double> expect(3);
    for (std::size_t j = 0; j < 3; ++j) expect[idx[j]] = replayed.uniform(0, 1);
    REQUIRE(out.values == expect);
    for (double v : out.values) {
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
    }
}

TEST_CASE("scripted generation is deterministic and respects bounds") {
    ScriptedGenParams p;
    p.refine_sigma = 0.5;
    p.diverge_reinit_fraction = 0.5;
    p.clamp_bounds = {{0, 1}, {0, 1}, {0, 1}, {0, 1}};
    for (int trial = 0; trial < 200; ++trial) {
        Rng r1 = Rng::substream(trial, "detgen");
        Rng r2 = Rng::substream(trial, "detgen");
        const auto ctx = ctx_with({0.1, 0.9, 0.5, 0.3},
                                  trial % 2 ? OperatorLabel::refine : OperatorLabel::free_form);
        const auto a = propose_scripted(p, ctx, r1);
        const auto b = propose_scripted(p, ctx, r2);
        REQUIRE(a.values == b.values);
        for (double v : a.values) {
            REQUIRE(v >= 0.0);
            REQUIRE(v <= 1.0);
        }
    }
}

TEST_CASE("refine displacement matches sigma * sqrt(d) in squared norm") {
    ScriptedGenParams p;
    p.refine_sigma = 0.05;
    // generous bounds: no clamping interferes
    p.clamp_bounds = {{-100, 100}, {-100, 100}, {-100, 100}, {-100, 100}};
    const std::size_t d = 4;
    Rng rng = Rng::substream(10, "l2");
    const auto ctx = ctx_with({0, 0, 0, 0}, OperatorLabel::refine);
    double sum_sq = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const auto out = propose_scripted(p, ctx, rng);
        double norm_sq = 0.0;
        for (double v : out.values) norm_sq += v * v;
        sum_sq += norm_sq;
    }
    const double mean_sq = sum_sq / n;
    const double expect = d * p.refine_sigma * p.refine_sigma; // chi^2_d mean
    const double sigma_of_mean = expect * std::sqrt(2.0 / (d * n));
    REQUIRE(std::abs(mean_sq - expect) < 5 * sigma_of_mean);
}

TEST_CASE("scripted generator rejects text parents") {
    GenerationContext ctx;
    ctx.parent = make_record("p", 0.0, 0);
    ctx.parent.payload = CandidatePayload::make_text("not numeric");
    Rng rng = Rng::substream(2, "text");
    REQUIRE_THROWS_AS(propose_scripted({}, ctx, rng), GenerationFailure);
}

TEST_CASE("numeric extraction: first well-formed list of the right length") {
    REQUIRE(extract_numeric_list("[0.1, 0.2]", 2) == std::vector<double>{0.1, 0.2});
    REQUIRE(extract_numeric_list("noise [1,2,3] then [0.5, -0.5]", 2) ==
            std::vector<double>{0.5, -0.5});
    REQUIRE(extract_numeric_list("prose only", 2) == std::nullopt);
    REQUIRE(extract_numeric_list("[0.1, oops]", 2) == std::nullopt);
    REQUIRE(extract_numeric_list("[1, 2, 3]", 2) == std::nullopt);
    REQUIRE(extract_numeric_list("[1e-3, 2.5E2]", 2) == std::vector<double>{0.001, 250.0});
}

TEST_CASE("llm propose parses a bracketed reply") {
    ScriptedChatClient chat({ScriptedChatClient::ok("best guess: [0.1, 0.2]")});
    LlmGenParams params;
    params.max_retries = 0;
    const auto ctx = ctx_with({0.0, 0.0}, OperatorLabel::free_form);
    const auto out = propose_llm(chat, params, ctx, static_operator_prompts("b"), "task");
    REQUIRE(out.kind == PayloadKind::numeric_vector);
    REQUIRE(out.values == std::vector<double>{0.1, 0.2});
}

TEST_CASE("llm propose retries malformed replies then fails") {
    ScriptedChatClient chat({ScriptedChatClient::ok("nothing here"),
                             ScriptedChatClient::ok("still nothing")});
    LlmGenParams params;
    params.max_retries = 1;
    const auto ctx = ctx_with({0.0, 0.0}, OperatorLabel::free_form);
    REQUIRE_THROWS_AS(propose_llm(chat, params, ctx, static_operator_prompts("b"), "task"),
                      GenerationFailure);
    REQUIRE(chat.calls() == 2);

    ScriptedChatClient recover({ScriptedChatClient::ok("bad"),
                                ScriptedChatClient::ok("[1.5, 2.5]")});
    const auto out = propose_llm(recover, params, ctx, static_operator_prompts("b"), "task");
    REQUIRE(out.values == std::vector<double>{1.5, 2.5});
}
