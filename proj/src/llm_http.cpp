#include <cstdlib>

#include <httplib.h>

#include "edaloop/errors.hpp"
#include "edaloop/llm.hpp"

namespace edaloop::llm {

HttpProvider::HttpProvider(Settings settings) : settings_(std::move(settings)) {}

nlohmann::json HttpProvider::request_body(const History& history, const LlmConfig& config) {
    nlohmann::json body{{"model", config.model_id}, {"messages", nlohmann::json::array()}};
    for (const auto& m : history)
        body["messages"].push_back({{"role", to_string(m.role)}, {"content", m.content}});
    if (config.max_tokens) body["max_tokens"] = *config.max_tokens;
    if (config.temperature) body["temperature"] = *config.temperature;
    if (config.top_p) body["top_p"] = *config.top_p;
    return body;
}

ProviderReply HttpProvider::send(const History& history, const LlmConfig& config) {
    const char* key = std::getenv(settings_.api_key_env.c_str());

    httplib::Client client(settings_.base_url);
    auto secs = static_cast<time_t>(settings_.timeout_s);
    client.set_connection_timeout(secs);
    client.set_read_timeout(secs);
    httplib::Headers headers;
    if (key && *key) headers.emplace("Authorization", std::string("Bearer ") + key);

    auto res = client.Post(settings_.path, headers, request_body(history, config).dump(),
                           "application/json");
    if (!res) throw TransportError("provider request failed: " + httplib::to_string(res.error()));
    if (res->status == 429 || res->status >= 500)
        throw TransportError("provider returned HTTP " + std::to_string(res->status));
    if (res->status != 200)
        throw ConfigError("provider rejected request with HTTP " + std::to_string(res->status));

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception&) {
        throw EmptyResponseError("provider returned a non-JSON body");
    }

    ProviderReply reply;
    try {
        const auto& msg = j.at("choices").at(0).at("message");
        if (msg.contains("content") && msg.at("content").is_string())
            reply.text = msg.at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
        throw EmptyResponseError("provider response has no choices[0].message");
    }
    if (j.contains("usage") && j.at("usage").is_object()) {
        const auto& u = j.at("usage");
        if (u.contains("prompt_tokens") && u.at("prompt_tokens").is_number_unsigned())
            reply.prompt_tokens = u.at("prompt_tokens").get<std::size_t>();
        if (u.contains("completion_tokens") && u.at("completion_tokens").is_number_unsigned())
            reply.completion_tokens = u.at("completion_tokens").get<std::size_t>();
    }
    return reply;
}

} // namespace edaloop::llm
