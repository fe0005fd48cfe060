#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "metaevolve/core.hpp"

namespace metaevolve {

// One JSONL event per line. Every event carries the step index and the
// checkpointed states of the named PRNG substreams, which is what makes
// resume-from-truncation byte-exact.
struct LoggedEvent {
    std::string type;
    std::int64_t step = 0;
    json body;
};

inline json parse_event_line(const std::string& line) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("event") || !j.contains("step")) {
        throw std::invalid_argument("malformed event line");
    }
    return j;
}

class EventLogWriter {
public:
    EventLogWriter() = default;

    void open_truncate(const std::string& path) {
        out_.open(path, std::ios::out | std::ios::trunc);
        if (!out_) throw std::runtime_error("cannot open log for writing: " + path);
    }

    void open_append(const std::string& path) {
        out_.open(path, std::ios::out | std::ios::app);
        if (!out_) throw std::runtime_error("cannot open log for append: " + path);
    }

    bool is_open() const { return out_.is_open(); }

    // Synchronous per event: each line is flushed so a crash loses at most
    // the line being written.
    void write(const json& event) {
        out_ << event.dump() << "\n";
        out_.flush();
    }

private:
    std::ofstream out_;
};

struct LoadedLog {
    std::vector<json> events;
    bool truncated_tail = false; // a corrupt or incomplete trailing line was dropped
};

// Reads a log, dropping a malformed trailing line and any switch_attempted
// left without its switch_applied by a crash mid-phase; both are redone
// deterministically from the preceding checkpoints.
inline LoadedLog load_event_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open log: " + path);
    LoadedLog out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            out.events.push_back(parse_event_line(line));
        } catch (const std::exception&) {
            out.truncated_tail = true;
            break;
        }
    }
    if (!out.events.empty()) {
        const json& last = out.events.back();
        if (last.at("event") == "switch_attempted" &&
            last.value("outcome", std::string()) == "applied") {
            out.events.pop_back();
            out.truncated_tail = true;
        }
    }
    return out;
}

// Rewrites the log to exactly the given events (used when resume had to drop
// an inconsistent tail before appending).
inline void rewrite_event_log(const std::string& path, const std::vector<json>& events) {
    std::ofstream out(path, std::ios::out | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot rewrite log: " + path);
    for (const auto& e : events) out << e.dump() << "\n";
}

} // namespace metaevolve
