#include "edaloop/llm.hpp"

#include <thread>

#include "edaloop/errors.hpp"
#include "edaloop/util.hpp"

namespace edaloop::llm {

std::string_view to_string(Role role) {
    switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
    }
    return "user";
}

Role role_from_string(std::string_view text) {
    if (text == "system") return Role::system;
    if (text == "user") return Role::user;
    if (text == "assistant") return Role::assistant;
    throw ConfigError("unknown message role '" + std::string(text) + "'");
}

std::string_view to_string(TokenSource source) {
    return source == TokenSource::provider_metadata ? "provider_metadata" : "estimated";
}

void LlmConfig::validate() const {
    if (model_id.empty()) throw ConfigError("llm model_id is empty");
    if (max_tokens && *max_tokens <= 0) throw ConfigError("max_tokens must be positive");
    if (temperature && *temperature < 0) throw ConfigError("temperature must be non-negative");
    if (top_p && !(*top_p > 0 && *top_p <= 1)) throw ConfigError("top_p must lie in (0, 1]");
}

std::size_t estimate_tokens(std::string_view text) {
    return (text.size() + 3) / 4;
}

std::size_t estimate_tokens(const History& history) {
    std::size_t total = 0;
    for (const auto& m : history) total += estimate_tokens(m.content);
    return total;
}

ScriptedProvider::ScriptedProvider(std::vector<TranscriptTurn> turns) : turns_(std::move(turns)) {}

std::vector<TranscriptTurn> ScriptedProvider::parse_transcript(std::string_view jsonl) {
    std::vector<TranscriptTurn> turns;
    std::size_t line_no = 0;
    for (const auto& raw : util::split_lines(jsonl)) {
        ++line_no;
        auto line = util::trim(raw);
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("transcript line " + std::to_string(line_no) + ": " + e.what());
        }
        TranscriptTurn t;
        t.response = j.value("response", std::string{});
        if (j.contains("prompt_tokens")) t.prompt_tokens = j.at("prompt_tokens").get<std::size_t>();
        if (j.contains("completion_tokens"))
            t.completion_tokens = j.at("completion_tokens").get<std::size_t>();
        t.transport_error = j.value("transport_error", false);
        turns.push_back(std::move(t));
    }
    return turns;
}

std::string ScriptedProvider::format_transcript(const std::vector<TranscriptTurn>& turns) {
    std::string out;
    for (std::size_t i = 0; i < turns.size(); ++i) {
        const auto& t = turns[i];
        nlohmann::json j{{"turn", i + 1}, {"response", t.response}};
        if (t.prompt_tokens) j["prompt_tokens"] = *t.prompt_tokens;
        if (t.completion_tokens) j["completion_tokens"] = *t.completion_tokens;
        if (t.transport_error) j["transport_error"] = true;
        out += j.dump() + "\n";
    }
    return out;
}

std::shared_ptr<ScriptedProvider> ScriptedProvider::from_file(const std::filesystem::path& path) {
    return std::make_shared<ScriptedProvider>(parse_transcript(util::read_file(path)));
}

ProviderReply ScriptedProvider::send(const History& history, const LlmConfig&) {
    std::size_t turn = 0;
    for (const auto& m : history)
        if (m.role == Role::assistant) ++turn;
    if (turn >= turns_.size())
        throw TransportError("scripted transcript exhausted at turn " + std::to_string(turn + 1));
    const auto& t = turns_[turn];
    if (t.transport_error) throw TransportError("scripted transport failure");
    ProviderReply reply{t.response, t.prompt_tokens, t.completion_tokens};
    return reply;
}

namespace {

std::optional<std::string> find_module_header(std::string_view text) {
    std::size_t pos = 0;
    while ((pos = text.find("module", pos)) != std::string_view::npos) {
        bool left_ok = pos == 0 || !(std::isalnum(static_cast<unsigned char>(text[pos - 1])) ||
                                     text[pos - 1] == '_');
        bool right_ok = pos + 6 < text.size() &&
                        std::isspace(static_cast<unsigned char>(text[pos + 6]));
        if (left_ok && right_ok) {
            int depth = 0;
            for (std::size_t i = pos; i < text.size(); ++i) {
                if (text[i] == '(') ++depth;
                else if (text[i] == ')') --depth;
                else if (text[i] == ';' && depth == 0)
                    return std::string(text.substr(pos, i - pos + 1));
            }
            return std::nullopt;
        }
        pos += 6;
    }
    return std::nullopt;
}

} // namespace

ProviderReply HeaderEchoProvider::send(const History& history, const LlmConfig&) {
    for (auto it = history.rbegin(); it != history.rend(); ++it) {
        if (it->role != Role::user) continue;
        auto header = find_module_header(it->content);
        if (!header) break;
        std::string text = "Here is a behavioural implementation.\n\n```verilog\n" + *header +
                           "\n  // body elided by the offline echo provider\nendmodule\n```\n";
        return ProviderReply{text, std::nullopt, std::nullopt};
    }
    return ProviderReply{"I could not find a module header in the request.", std::nullopt,
                         std::nullopt};
}

LlmExchange complete(const History& history, const LlmConfig& config, Provider& provider,
                     const RetryPolicy& retry) {
    if (history.empty() || history.front().role != Role::system)
        throw ConfigError("history must start with a system message");
    for (std::size_t i = 1; i < history.size(); ++i)
        if (history[i].role == Role::system)
            throw ConfigError("history must contain exactly one system message");

    const int attempts = std::max(1, retry.max_attempts);
    for (int attempt = 1;; ++attempt) {
        try {
            auto start = std::chrono::steady_clock::now();
            ProviderReply reply = provider.send(history, config);
            auto stop = std::chrono::steady_clock::now();

            if (util::trim(reply.text).empty())
                throw EmptyResponseError("provider '" + provider.name() + "' returned empty text");

            LlmExchange ex;
            ex.request = history;
            ex.response = std::move(reply.text);
            ex.latency_s = std::chrono::duration<double>(stop - start).count();
            ex.model_id = config.model_id;
            if (reply.prompt_tokens && reply.completion_tokens) {
                ex.prompt_tokens = *reply.prompt_tokens;
                ex.completion_tokens = *reply.completion_tokens;
                ex.token_source = TokenSource::provider_metadata;
            } else {
                ex.prompt_tokens = estimate_tokens(history);
                ex.completion_tokens = estimate_tokens(ex.response);
                ex.token_source = TokenSource::estimated;
            }
            return ex;
        } catch (const TransportError& e) {
            if (attempt >= attempts) throw TransportError(e.what(), attempt);
            std::this_thread::sleep_for(retry.base_delay * (1 << (attempt - 1)));
        }
    }
}

History append_turn(History history, std::string user_text, const LlmExchange& exchange) {
    if (util::trim(user_text).empty()) throw ConfigError("feedback message is empty");
    history.push_back({Role::user, std::move(user_text)});
    history.push_back({Role::assistant, exchange.response});
    return history;
}

void to_json(nlohmann::json& j, const Message& m) {
    j = nlohmann::json{{"role", to_string(m.role)}, {"content", m.content}};
}

void from_json(const nlohmann::json& j, Message& m) {
    m.role = role_from_string(j.at("role").get<std::string>());
    m.content = j.at("content").get<std::string>();
    if (m.content.empty()) throw ConfigError("message content is empty");
}

void to_json(nlohmann::json& j, const LlmConfig& c) {
    j = nlohmann::json{{"model_id", c.model_id}};
    if (c.max_tokens) j["max_tokens"] = *c.max_tokens;
    if (c.temperature) j["temperature"] = *c.temperature;
    if (c.top_p) j["top_p"] = *c.top_p;
}

void from_json(const nlohmann::json& j, LlmConfig& c) {
    c = LlmConfig{};
    c.model_id = j.at("model_id").get<std::string>();
    if (j.contains("max_tokens") && !j.at("max_tokens").is_null()) c.max_tokens = j.at("max_tokens").get<int>();
    if (j.contains("temperature") && !j.at("temperature").is_null())
        c.temperature = j.at("temperature").get<double>();
    if (j.contains("top_p") && !j.at("top_p").is_null()) c.top_p = j.at("top_p").get<double>();
    c.validate();
}

void to_json(nlohmann::json& j, const LlmExchange& e) {
    j = nlohmann::json{{"request", e.request},
                       {"response", e.response},
                       {"prompt_tokens", e.prompt_tokens},
                       {"completion_tokens", e.completion_tokens},
                       {"latency_s", e.latency_s},
                       {"model_id", e.model_id},
                       {"token_source", to_string(e.token_source)}};
}

void from_json(const nlohmann::json& j, LlmExchange& e) {
    e.request = j.at("request").get<History>();
    e.response = j.at("response").get<std::string>();
    e.prompt_tokens = j.at("prompt_tokens").get<std::size_t>();
    e.completion_tokens = j.at("completion_tokens").get<std::size_t>();
    e.latency_s = j.at("latency_s").get<double>();
    e.model_id = j.at("model_id").get<std::string>();
    e.token_source = j.at("token_source").get<std::string>() == "provider_metadata"
                         ? TokenSource::provider_metadata
                         : TokenSource::estimated;
}

} // namespace edaloop::llm
