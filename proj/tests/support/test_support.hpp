#pragma once

#include <string>
#include <vector>

#include "metaevolve/core.hpp"
#include "metaevolve/solution_gen.hpp"

namespace metaevolve::testing {

inline SolutionRecord make_record(const std::string& id, double internal_score,
                                  std::int64_t iteration, std::vector<double> values = {0.0},
                                  Artifacts artifacts = {}) {
    SolutionRecord r;
    r.id = id;
    r.payload = CandidatePayload::numeric(std::move(values));
    r.evaluation.raw_score = internal_score;
    r.evaluation.internal_score = internal_score;
    r.evaluation.valid = true;
    r.evaluation.artifacts = std::move(artifacts);
    r.iteration_found = iteration;
    r.strategy_id = "test";
    r.timestamp = iteration;
    return r;
}

inline SolutionDatabase db_from_scores(const std::vector<double>& scores) {
    SolutionDatabase db;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        db.insert_record(make_record("r" + std::to_string(100 + i), scores[i],
                                     static_cast<std::int64_t>(i)));
    }
    return db;
}

// Chat client replaying a fixed list of replies in order; records the
// prompts it saw. Once the scripted replies run out it keeps returning the
// last one (or a failure if the list is empty).
class ScriptedChatClient : public ChatClient {
public:
    explicit ScriptedChatClient(std::vector<ChatResult> replies) : replies_(std::move(replies)) {}

    static ChatResult ok(std::string content) {
        ChatResult r;
        r.ok = true;
        r.content = std::move(content);
        return r;
    }

    static ChatResult fail(std::string error) {
        ChatResult r;
        r.ok = false;
        r.error = std::move(error);
        return r;
    }

    ChatResult chat(const std::vector<ChatMessage>& messages) override {
        transcripts_.push_back(messages);
        if (replies_.empty()) return fail("no scripted reply");
        const std::size_t i = std::min(next_, replies_.size() - 1);
        ++next_;
        return replies_[i];
    }

    std::size_t calls() const { return transcripts_.size(); }
    const std::vector<std::vector<ChatMessage>>& transcripts() const { return transcripts_; }

private:
    std::vector<ChatResult> replies_;
    std::size_t next_ = 0;
    std::vector<std::vector<ChatMessage>> transcripts_;
};

} // namespace metaevolve::testing
