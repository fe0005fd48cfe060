#pragma once

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "metaevolve/engine.hpp"

namespace metaevolve {

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        else if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

inline json toml_scalar(const std::string& raw) {
    const std::string v = trim(raw);
    if (v.empty()) throw std::invalid_argument("empty TOML value");
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"') throw std::invalid_argument("unterminated string");
        std::string out;
        for (std::size_t i = 1; i + 1 < v.size(); ++i) {
            if (v[i] == '\\' && i + 2 < v.size()) {
                ++i;
                switch (v[i]) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                default: out += v[i]; break;
                }
            } else {
                out += v[i];
            }
        }
        return json(out);
    }
    if (v == "true") return json(true);
    if (v == "false") return json(false);
    if (v.front() == '[') {
        if (v.back() != ']') throw std::invalid_argument("unterminated array");
        json arr = json::array();
        std::string body = v.substr(1, v.size() - 2);
        std::string item;
        int depth = 0;
        bool in_string = false;
        for (char c : body) {
            if (c == '"') in_string = !in_string;
            if (!in_string) {
                if (c == '[') ++depth;
                if (c == ']') --depth;
                if (c == ',' && depth == 0) {
                    if (!trim(item).empty()) arr.push_back(toml_scalar(item));
                    item.clear();
                    continue;
                }
            }
            item += c;
        }
        if (!trim(item).empty()) arr.push_back(toml_scalar(item));
        return arr;
    }
    // number: integer when it parses cleanly without . e E
    const bool looks_float = v.find_first_of(".eE") != std::string::npos;
    try {
        std::size_t used = 0;
        if (!looks_float) {
            const long long i = std::stoll(v, &used);
            if (used == v.size()) return json(i);
        }
        const double d = std::stod(v, &used);
        if (used == v.size()) return json(d);
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("cannot parse TOML value: " + v);
}

} // namespace detail

// Minimal TOML reader covering run-config needs: [section] and
// [section.sub] tables, key = value pairs with strings, numbers, booleans
// and flat arrays, and # comments.
inline json parse_toml(const std::string& text) {
    json root = json::object();
    json* current = &root;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = detail::trim(detail::strip_comment(line));
        if (stripped.empty()) continue;
        if (stripped.front() == '[') {
            if (stripped.back() != ']') {
                throw std::invalid_argument("line " + std::to_string(lineno) + ": bad table header");
            }
            const std::string path = detail::trim(stripped.substr(1, stripped.size() - 2));
            current = &root;
            std::size_t start = 0;
            while (start <= path.size()) {
                const auto dot = path.find('.', start);
                const std::string part =
                    detail::trim(path.substr(start, dot == std::string::npos ? std::string::npos
                                                                             : dot - start));
                if (part.empty()) {
                    throw std::invalid_argument("line " + std::to_string(lineno) +
                                                ": empty table name");
                }
                current = &(*current)[part];
                if (current->is_null()) *current = json::object();
                if (dot == std::string::npos) break;
                start = dot + 1;
            }
            continue;
        }
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = detail::trim(stripped.substr(0, eq));
        if (key.empty()) {
            throw std::invalid_argument("line " + std::to_string(lineno) + ": empty key");
        }
        (*current)[key] = detail::toml_scalar(stripped.substr(eq + 1));
    }
    return root;
}

// Run-config files: a top-level table plus [task], [generator],
// [initial_strategy] sub-tables. JSON configs use the same key layout.
inline RunConfig run_config_from_file_json(const json& j, const std::string& default_log) {
    RunConfig c;
    if (j.contains("budget_T")) c.budget_T = j.at("budget_T").get<std::int64_t>();
    if (j.contains("window_W")) c.window_W = j.at("window_W").get<std::int64_t>();
    if (j.contains("tau_mode")) {
        c.tau_mode = j.at("tau_mode").get<std::string>() == "absolute"
                         ? RunConfig::TauMode::absolute
                         : RunConfig::TauMode::relative;
    }
    if (j.contains("tau_value")) c.tau_value = j.at("tau_value").get<double>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("task")) {
        const auto& t = j.at("task");
        if (t.is_string()) {
            c.task_id = task_id_from_string(t.get<std::string>());
        } else {
            c.task_id = task_id_from_string(t.at("id").get<std::string>());
            c.task_params = task_params_from_json(t);
        }
    }
    if (j.contains("generator")) {
        c.generator = generator_config_from_json(j.at("generator"));
    }
    if (j.contains("strategy_generator")) {
        c.strategy_generator = j.at("strategy_generator").get<std::string>() == "llm"
                                   ? RunConfig::StrategyGen::llm
                                   : RunConfig::StrategyGen::mutator_only;
    }
    if (j.contains("initial_strategy")) {
        const auto& s = j.at("initial_strategy");
        if (s.is_string()) {
            const std::string name = s.get<std::string>();
            if (name == "random") c.initial_strategy = builtin_strategy(BuiltinStrategy::random);
            else if (name == "greedy") c.initial_strategy = builtin_strategy(BuiltinStrategy::greedy);
            else if (name == "beam") c.initial_strategy = builtin_strategy(BuiltinStrategy::beam);
            else if (name == "best_of_n") c.initial_strategy = builtin_strategy(BuiltinStrategy::best_of_n);
            else if (name == "top_k") c.initial_strategy = builtin_strategy(BuiltinStrategy::top_k);
            else if (name == "map_elites") c.initial_strategy = builtin_strategy(BuiltinStrategy::map_elites);
            else throw std::invalid_argument("unknown builtin strategy: " + name);
        } else if (!s.is_null()) {
            c.initial_strategy = spec_from_json(s);
        }
    }
    if (j.contains("retry_budget")) c.retry_budget = j.at("retry_budget").get<int>();
    if (j.contains("log_path")) c.log_path = j.at("log_path").get<std::string>();
    if (j.contains("clock")) {
        c.clock = j.at("clock").get<std::string>() == "system" ? RunConfig::ClockMode::system
                                                               : RunConfig::ClockMode::logical;
    }
    if (j.contains("penalty_floor")) c.penalty_floor = j.at("penalty_floor").get<double>();
    if (j.contains("meta_temperature")) c.meta_temperature = j.at("meta_temperature").get<double>();
    if (j.contains("prompt_char_budget")) {
        c.prompt_char_budget = j.at("prompt_char_budget").get<std::int64_t>();
    }
    if (j.contains("meta_inspirations")) {
        c.meta_inspirations = j.at("meta_inspirations").get<std::int64_t>();
    }
    if (c.log_path.empty()) c.log_path = default_log;
    return c;
}

inline RunConfig load_run_config(const std::string& path, const std::string& default_log = "run.jsonl") {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    json j;
    const bool is_json = path.size() > 5 && path.substr(path.size() - 5) == ".json";
    if (is_json) {
        j = json::parse(text);
    } else {
        j = parse_toml(text);
    }
    return run_config_from_file_json(j, default_log);
}

} // namespace metaevolve
