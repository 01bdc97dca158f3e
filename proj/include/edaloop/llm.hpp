#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace edaloop::llm {

enum class Role { system, user, assistant };

std::string_view to_string(Role role);
Role role_from_string(std::string_view text);

struct Message {
    Role role = Role::user;
    std::string content;

    friend bool operator==(const Message&, const Message&) = default;
};

using History = std::vector<Message>;

/// Sampling configuration. Absent fields mean provider defaults and are not sent.
struct LlmConfig {
    std::string model_id;
    std::optional<int> max_tokens;
    std::optional<double> temperature;
    std::optional<double> top_p;

    void validate() const;
    friend bool operator==(const LlmConfig&, const LlmConfig&) = default;
};

enum class TokenSource { provider_metadata, estimated };

std::string_view to_string(TokenSource source);

struct LlmExchange {
    History request;
    std::string response;
    std::size_t prompt_tokens = 0;
    std::size_t completion_tokens = 0;
    double latency_s = 0.0;
    std::string model_id;
    TokenSource token_source = TokenSource::estimated;
};

/// What a provider hands back for one call.
struct ProviderReply {
    std::string text;
    std::optional<std::size_t> prompt_tokens;
    std::optional<std::size_t> completion_tokens;
};

/// A chat-completion backend. Implementations must be safe to call concurrently.
class Provider {
public:
    virtual ~Provider() = default;

    /// Throws TransportError for failures worth retrying.
    virtual ProviderReply send(const History& history, const LlmConfig& config) = 0;
    virtual std::string name() const = 0;
};

/// One scripted turn of a transcript fixture.
struct TranscriptTurn {
    std::string response;
    std::optional<std::size_t> prompt_tokens;
    std::optional<std::size_t> completion_tokens;
    /// Simulates a transport failure for this turn.
    bool transport_error = false;
};

/// Replays a fixed transcript keyed by turn index.
///
/// The turn index is the number of assistant messages already in the history,
/// so the reply depends only on conversation position. Transcript files are
/// JSON Lines: one object per turn with a "response" field and optional
/// "prompt_tokens", "completion_tokens" and "transport_error".
class ScriptedProvider : public Provider {
public:
    explicit ScriptedProvider(std::vector<TranscriptTurn> turns);
    static std::shared_ptr<ScriptedProvider> from_file(const std::filesystem::path& path);
    static std::vector<TranscriptTurn> parse_transcript(std::string_view jsonl);
    static std::string format_transcript(const std::vector<TranscriptTurn>& turns);

    ProviderReply send(const History& history, const LlmConfig& config) override;
    std::string name() const override { return "scripted"; }
    std::size_t size() const { return turns_.size(); }

private:
    std::vector<TranscriptTurn> turns_;
};

/// Answers an HDL prompt with a module that echoes the header found in the
/// last user message. Used for offline benchmark runs.
class HeaderEchoProvider : public Provider {
public:
    ProviderReply send(const History& history, const LlmConfig& config) override;
    std::string name() const override { return "header-echo"; }
};

/// OpenAI-style chat-completion endpoint over HTTP(S).
///
/// The API key is read from `api_key_env` at call time and never stored.
class HttpProvider : public Provider {
public:
    struct Settings {
        std::string base_url = "https://api.openai.com";
        std::string path = "/v1/chat/completions";
        std::string api_key_env = "OPENAI_API_KEY";
        double timeout_s = 120.0;
    };

    explicit HttpProvider(Settings settings);

    ProviderReply send(const History& history, const LlmConfig& config) override;
    std::string name() const override { return "http"; }

    /// Request body for a call; exposed for inspection.
    static nlohmann::json request_body(const History& history, const LlmConfig& config);

private:
    Settings settings_;
};

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds base_delay{500};
};

/// Coarse token estimate: ceil(bytes / 4).
std::size_t estimate_tokens(std::string_view text);
std::size_t estimate_tokens(const History& history);

/// Sends `history` and returns the measured exchange.
///
/// `history` must begin with its only system message. Transport failures are
/// retried with exponential backoff; an empty reply is a hard error.
LlmExchange complete(const History& history, const LlmConfig& config, Provider& provider,
                     const RetryPolicy& retry = {});

/// Returns `history` extended by the user turn and the exchange's reply.
History append_turn(History history, std::string user_text, const LlmExchange& exchange);

void to_json(nlohmann::json& j, const Message& m);
void from_json(const nlohmann::json& j, Message& m);
void to_json(nlohmann::json& j, const LlmConfig& c);
void from_json(const nlohmann::json& j, LlmConfig& c);
void to_json(nlohmann::json& j, const LlmExchange& e);
void from_json(const nlohmann::json& j, LlmExchange& e);

} // namespace edaloop::llm
