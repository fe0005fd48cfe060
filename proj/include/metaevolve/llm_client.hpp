#pragma once

#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "metaevolve/solution_gen.hpp"

namespace metaevolve {

// OpenAI-compatible chat-completions client. The bearer token comes from
// METAEVOLVE_API_KEY; endpoint and model come from the run config.
class HttpChatClient : public ChatClient {
public:
    HttpChatClient(std::string endpoint, std::string model, double temperature,
                   double timeout_seconds)
        : model_(std::move(model)), temperature_(temperature), timeout_seconds_(timeout_seconds) {
        parse_endpoint(std::move(endpoint));
        const char* key = std::getenv("METAEVOLVE_API_KEY");
        if (key) api_key_ = key;
    }

    ChatResult chat(const std::vector<ChatMessage>& messages) override {
        json body;
        body["model"] = model_;
        body["temperature"] = temperature_;
        body["messages"] = json::array();
        for (const auto& m : messages) {
            body["messages"].push_back({{"role", m.role}, {"content", m.content}});
        }

        httplib::Client client(host_.c_str());
        client.set_connection_timeout(static_cast<time_t>(timeout_seconds_));
        client.set_read_timeout(static_cast<time_t>(timeout_seconds_));
        httplib::Headers headers;
        if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

        const auto res = client.Post(path_.c_str(), headers, body.dump(), "application/json");
        ChatResult out;
        if (!res) {
            out.error = "transport failure: " + httplib::to_string(res.error());
            return out;
        }
        if (res->status < 200 || res->status >= 300) {
            out.error = "http status " + std::to_string(res->status);
            return out;
        }
        json reply = json::parse(res->body, nullptr, false);
        if (reply.is_discarded()) {
            out.error = "reply is not valid JSON";
            return out;
        }
        try {
            out.content = reply.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const std::exception& e) {
            out.error = std::string("unexpected reply shape: ") + e.what();
            return out;
        }
        out.ok = true;
        return out;
    }

private:
    void parse_endpoint(std::string endpoint) {
        // Split scheme://host[:port] from the path.
        const auto scheme_end = endpoint.find("://");
        std::size_t host_start = 0;
        if (scheme_end != std::string::npos) host_start = scheme_end + 3;
        const auto path_start = endpoint.find('/', host_start);
        if (path_start == std::string::npos) {
            host_ = endpoint;
            path_ = "/v1/chat/completions";
        } else {
            host_ = endpoint.substr(0, path_start);
            path_ = endpoint.substr(path_start);
        }
        if (host_.empty()) throw std::invalid_argument("llm endpoint: missing host");
    }

    std::string host_;
    std::string path_;
    std::string model_;
    std::string api_key_;
    double temperature_;
    double timeout_seconds_;
};

} // namespace metaevolve
