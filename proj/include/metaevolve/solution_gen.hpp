#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "metaevolve/core.hpp"
#include "metaevolve/rng.hpp"
#include "metaevolve/strategy.hpp"

namespace metaevolve {

struct ChatMessage {
    std::string role;
    std::string content;
};

struct ChatResult {
    bool ok = false;
    std::string content;
    std::string error;
};

// Synchronous chat-completion client. The HTTP implementation lives in
// llm_client.hpp; tests inject scripted fakes.
class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual ChatResult chat(const std::vector<ChatMessage>& messages) = 0;
};

struct OperatorPrompts {
    std::string free_form;
    std::string refine;
    std::string diverge;

    const std::string& for_operator(OperatorLabel op) const {
        switch (op) {
        case OperatorLabel::free_form: return free_form;
        case OperatorLabel::refine: return refine;
        case OperatorLabel::diverge: return diverge;
        }
        return free_form;
    }
};

struct ScriptedGenParams {
    double refine_sigma = 0.05;
    double diverge_reinit_fraction = 0.5; // fraction of coordinates redrawn
    std::vector<std::pair<double, double>> clamp_bounds;
};

struct LlmGenParams {
    std::string endpoint;
    std::string model;
    double temperature = 0.7;
    int max_retries = 3;
    double timeout_seconds = 60.0;
};

struct GeneratorConfig {
    enum class Kind { scripted_numeric, llm };
    Kind kind = Kind::scripted_numeric;
    ScriptedGenParams scripted;
    LlmGenParams llm;
};

inline OperatorPrompts static_operator_prompts(const std::string& problem_brief) {
    OperatorPrompts p;
    p.free_form = "Improve the solution in any way you see fit. Problem: " + problem_brief;
    p.refine = "Make small, structure-preserving edits to the solution. Problem: " + problem_brief;
    p.diverge = "Redesign the overall approach; large exploratory changes are encouraged. "
                "Problem: " + problem_brief;
    return p;
}

namespace detail {

inline std::optional<std::string> labeled_section(const std::string& text,
                                                  const std::string& label) {
    const auto pos = text.find(label);
    if (pos == std::string::npos) return std::nullopt;
    const auto start = pos + label.size();
    auto end = text.size();
    for (const char* other : {"FREE_FORM:", "REFINE:", "DIVERGE:"}) {
        if (label == other) continue;
        const auto p = text.find(other, start);
        if (p != std::string::npos) end = std::min(end, p);
    }
    std::string out = text.substr(start, end - start);
    const auto first = out.find_first_not_of(" \t\r\n");
    const auto last = out.find_last_not_of(" \t\r\n");
    if (first == std::string::npos) return std::nullopt;
    return out.substr(first, last - first + 1);
}

} // namespace detail

// Requests three operator-specific prompt texts from the model; falls back to
// the static templates on any failure.
inline OperatorPrompts instantiate_operator_prompts(
    const std::string& problem_brief, ChatClient* llm, int max_retries = 1,
    const std::function<void(const std::string&)>& warn = {}) {
    if (problem_brief.empty()) {
        throw std::invalid_argument("instantiate_operator_prompts: empty problem brief");
    }
    if (!llm) return static_operator_prompts(problem_brief);

    const std::string request =
        "Write three short generation directives for an iterative optimizer working on the "
        "problem below. Answer with exactly three labeled sections:\n"
        "FREE_FORM: <directive imposing no constraints on the edit>\n"
        "REFINE: <directive asking for small, structure-preserving edits>\n"
        "DIVERGE: <directive asking for a coarse redesign>\n\n"
        "Problem:\n" + problem_brief;

    for (int attempt = 0; attempt <= max_retries; ++attempt) {
        const ChatResult res = llm->chat({{"system", "You write concise optimization directives."},
                                          {"user", request}});
        if (!res.ok) continue;
        const auto ff = detail::labeled_section(res.content, "FREE_FORM:");
        const auto rf = detail::labeled_section(res.content, "REFINE:");
        const auto dv = detail::labeled_section(res.content, "DIVERGE:");
        if (ff && rf && dv) return OperatorPrompts{*ff, *rf, *dv};
    }
    if (warn) warn("operator prompt generation failed; using static templates");
    return static_operator_prompts(problem_brief);
}

namespace detail {

inline std::string render_payload(const CandidatePayload& p) {
    if (p.kind == PayloadKind::text) return p.text;
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        if (i) os << ", ";
        os << p.values[i];
    }
    os << "]";
    return os.str();
}

} // namespace detail

// Assembles the generation prompt: task brief, operator directive, the parent
// with its raw score, then inspirations in context order. Inspirations are
// dropped oldest-first if the character budget would be exceeded.
inline std::string build_generation_prompt(const GenerationContext& ctx,
                                           const OperatorPrompts& prompts,
                                           const std::string& task_brief,
                                           std::size_t char_budget = 32000) {
    std::ostringstream head;
    head << task_brief << "\n\n";
    head << prompts.for_operator(ctx.op) << "\n\n";
    head << "Current solution (score " << ctx.parent.evaluation.raw_score << "):\n"
         << detail::render_payload(ctx.parent.payload) << "\n";

    std::vector<std::string> insp;
    for (const auto& r : ctx.inspirations) {
        std::ostringstream os;
        os << "- (score " << r.evaluation.raw_score << ") "
           << detail::render_payload(r.payload) << "\n";
        insp.push_back(os.str());
    }

    const std::string head_str = head.str();
    const std::string heading = "\nInspirations:\n";
    std::size_t start = 0;
    if (!insp.empty()) {
        std::size_t total = head_str.size() + heading.size();
        for (const auto& s : insp) total += s.size();
        while (start < insp.size() && total > char_budget) {
            total -= insp[start].size();
            ++start;
        }
    }

    std::string out = head_str;
    if (start < insp.size()) {
        out += heading;
        for (std::size_t i = start; i < insp.size(); ++i) out += insp[i];
    }
    return out;
}

// First well-formed bracketed list of exactly `dim` finite decimals, else
// nothing. Anything malformed is treated as a failed generation.
inline std::optional<std::vector<double>> extract_numeric_list(const std::string& reply,
                                                               std::size_t dim) {
    std::size_t pos = 0;
    while ((pos = reply.find('[', pos)) != std::string::npos) {
        const auto close = reply.find(']', pos);
        if (close == std::string::npos) return std::nullopt;
        const std::string body = reply.substr(pos + 1, close - pos - 1);
        std::vector<double> values;
        std::size_t i = 0;
        bool ok = true;
        while (i < body.size()) {
            while (i < body.size() && (body[i] == ' ' || body[i] == '\t' || body[i] == '\n' ||
                                       body[i] == '\r' || body[i] == ',')) {
                ++i;
            }
            if (i >= body.size()) break;
            std::size_t consumed = 0;
            double v = 0.0;
            try {
                v = std::stod(body.substr(i), &consumed);
            } catch (const std::exception&) {
                ok = false;
                break;
            }
            if (consumed == 0 || !std::isfinite(v)) {
                ok = false;
                break;
            }
            values.push_back(v);
            i += consumed;
        }
        if (ok && values.size() == dim) return values;
        pos = close + 1;
    }
    return std::nullopt;
}

class GenerationFailure : public std::runtime_error {
public:
    explicit GenerationFailure(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline double clamp_to(double v, const std::pair<double, double>& b) {
    return std::clamp(v, b.first, b.second);
}

inline std::pair<double, double> bound_for(const ScriptedGenParams& p, std::size_t i) {
    if (p.clamp_bounds.empty()) return {-std::numeric_limits<double>::infinity(),
                                        std::numeric_limits<double>::infinity()};
    return p.clamp_bounds[std::min(i, p.clamp_bounds.size() - 1)];
}

inline std::vector<double> scripted_refine(const std::vector<double>& parent,
                                           const ScriptedGenParams& p, Rng& rng) {
    std::vector<double> out(parent.size());
    for (std::size_t i = 0; i < parent.size(); ++i) {
        out[i] = clamp_to(parent[i] + rng.normal(0.0, p.refine_sigma), bound_for(p, i));
    }
    return out;
}

inline std::vector<double> scripted_diverge(const std::vector<double>& parent,
                                            const ScriptedGenParams& p, Rng& rng) {
    const std::size_t d = parent.size();
    const auto redraw = static_cast<std::size_t>(
        std::min<double>(static_cast<double>(d),
                         std::ceil(p.diverge_reinit_fraction * static_cast<double>(d))));
    std::vector<std::size_t> idx(d);
    for (std::size_t i = 0; i < d; ++i) idx[i] = i;
    for (std::size_t j = 0; j < redraw; ++j) {
        const std::size_t pick = j + rng.uniform_index(d - j);
        std::swap(idx[j], idx[pick]);
    }
    std::vector<double> out = parent;
    for (std::size_t j = 0; j < redraw; ++j) {
        const std::size_t i = idx[j];
        const auto b = bound_for(p, i);
        const double lo = std::isfinite(b.first) ? b.first : -1.0;
        const double hi = std::isfinite(b.second) ? b.second : 1.0;
        out[i] = rng.uniform(lo, hi);
    }
    return out;
}

} // namespace detail

// Deterministic numeric-payload generator for desk-scale runs: Gaussian
// refinement, partial uniform re-draws for diverge, a coin flip between the
// two for free-form.
inline CandidatePayload propose_scripted(const ScriptedGenParams& params,
                                         const GenerationContext& ctx, Rng& rng) {
    if (ctx.parent.payload.kind != PayloadKind::numeric_vector) {
        throw GenerationFailure("scripted generator requires a numeric parent payload");
    }
    const auto& parent = ctx.parent.payload.values;
    OperatorLabel op = ctx.op;
    if (op == OperatorLabel::free_form) {
        op = rng.uniform01() < 0.5 ? OperatorLabel::refine : OperatorLabel::diverge;
    }
    std::vector<double> out = op == OperatorLabel::refine
                                  ? detail::scripted_refine(parent, params, rng)
                                  : detail::scripted_diverge(parent, params, rng);
    return CandidatePayload::numeric(std::move(out));
}

// LLM-backed generation: send the assembled prompt, extract the payload from
// the reply, retry on malformed output up to the configured budget.
inline CandidatePayload propose_llm(ChatClient& client, const LlmGenParams& params,
                                    const GenerationContext& ctx, const OperatorPrompts& prompts,
                                    const std::string& task_brief, std::size_t char_budget = 32000) {
    const std::string prompt = build_generation_prompt(ctx, prompts, task_brief, char_budget);
    const bool numeric = ctx.parent.payload.kind == PayloadKind::numeric_vector;
    const std::size_t dim = numeric ? ctx.parent.payload.values.size() : 0;

    std::string last_error = "no attempts made";
    for (int attempt = 0; attempt <= params.max_retries; ++attempt) {
        const ChatResult res = client.chat(
            {{"system", "You are an optimizer proposing improved candidate solutions."},
             {"user", prompt}});
        if (!res.ok) {
            last_error = res.error.empty() ? "transport error" : res.error;
            continue;
        }
        if (!numeric) return CandidatePayload::make_text(res.content);
        if (auto values = extract_numeric_list(res.content, dim)) {
            return CandidatePayload::numeric(std::move(*values));
        }
        last_error = "malformed reply: no bracketed list of " + std::to_string(dim) + " decimals";
    }
    throw GenerationFailure("generation failed after retries: " + last_error);
}

} // namespace metaevolve
