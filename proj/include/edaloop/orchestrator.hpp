#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "edaloop/adapters.hpp"
#include "edaloop/core.hpp"
#include "edaloop/graph.hpp"
#include "edaloop/llm.hpp"
#include "edaloop/source_prep.hpp"

namespace edaloop::orchestrator {

enum class StrategyKind { fixed, until_met, interactive };

std::string_view to_string(StrategyKind kind);
/// Accepts "fixed", "until_met"/"until-met" and "interactive".
StrategyKind strategy_kind_from_string(std::string_view text);

struct Strategy {
    StrategyKind kind = StrategyKind::fixed;
    /// Iteration count for fixed, upper bound otherwise.
    int n = 1;

    /// Throws ConfigError when n < 1.
    static Strategy make(StrategyKind kind, int n);
};

struct SweepSpec {
    std::string parameter;
    double low = 0.0;
    double high = 0.0;
    int count = 1;
    std::uint64_t seed = 0;
    /// Draws at or below this value are redrawn (e.g. a device threshold).
    std::optional<double> exclusive_floor;

    /// Throws ConfigError unless low < high and count >= 1.
    void validate() const;
};

/// `count` uniform draws from [low, high], sorted ascending.
std::vector<double> sample_sweep(const SweepSpec& spec);

/// Like sample_sweep but redraws values rejected by `accept`.
/// Throws ConfigError when acceptance is too rare to fill the sweep.
std::vector<double> sample_sweep(const SweepSpec& spec, const std::function<bool(double)>& accept);

/// Replaces the value of `name` in a `parameters` statement of a
/// spectre-like deck, or adds such a statement when none defines it.
std::string substitute_parameter(const std::string& deck, const std::string& name, double value);

enum class ProviderKind { scripted, header_echo, http };

struct ProviderSpec {
    ProviderKind kind = ProviderKind::scripted;
    /// Scripted transcript (JSON Lines).
    std::filesystem::path transcript;
    llm::HttpProvider::Settings http;
};

std::shared_ptr<llm::Provider> make_provider(const ProviderSpec& spec);

struct SessionConfig {
    /// Generated when empty.
    std::string id;
    PromptBundle prompt;
    Strategy strategy;
    adapters::AdapterSpec adapter;
    llm::LlmConfig llm;
    ProviderSpec provider;
    /// Catalog file; the builtin catalog when empty.
    std::filesystem::path catalog;
    std::optional<source::PdkBinding> pdk;
    std::optional<SweepSpec> sweep;
    /// FPGA: expected module header source text.
    std::optional<std::string> header;
    std::optional<int> problem_id;
    std::filesystem::path workspace_root = "workspaces";
    std::filesystem::path sessions_dir = "sessions";

    /// Throws ConfigError.
    void validate() const;
};

nlohmann::json to_json(const SessionConfig& c);
/// Relative paths in `j` are resolved against `base_dir`.
SessionConfig session_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
SessionConfig load_session_config(const std::filesystem::path& path);

enum class IterationStatus { ok, failed_extraction, failed_validation, failed_run };

std::string_view to_string(IterationStatus status);
IterationStatus iteration_status_from_string(std::string_view text);

/// One evaluated point of a parameter sweep.
struct SweepPoint {
    double value = 0.0;
    adapters::RunResult run;
    MetricMap metrics;
    std::vector<ObjectiveCheck> checks;
    std::string error;
};

struct IterationRecord {
    int index = 1;
    llm::LlmExchange exchange;
    std::optional<source::SourceBundle> sources;
    std::vector<netlist::Violation> violations;
    std::optional<adapters::RunResult> run;
    MetricMap metrics;
    std::vector<ObjectiveCheck> checks;
    IterationStatus status = IterationStatus::ok;
    /// Feedback sent as the next user message.
    std::optional<std::string> feedback_out;
    /// Extraction, parse or run error text.
    std::string error;
    std::vector<SweepPoint> sweep;
    /// Sweep point whose checks stand for the iteration.
    std::optional<std::size_t> selected_point;
};

enum class Outcome { met, exhausted, aborted };

std::string_view to_string(Outcome outcome);
Outcome outcome_from_string(std::string_view text);

enum class SessionState { running, awaiting_feedback, done };

std::string_view to_string(SessionState state);
SessionState session_state_from_string(std::string_view text);

struct SessionRecord {
    std::string id;
    SessionConfig config;
    std::vector<IterationRecord> iterations;
    SessionState state = SessionState::running;
    std::optional<Outcome> outcome;
    std::string abort_reason;

    /// Last iteration with status ok.
    const IterationRecord* last_ok() const;
};

/// `max_points` limits every waveform trace (0 keeps all samples).
nlohmann::json to_json(const IterationRecord& r, std::size_t max_points = 0);
IterationRecord iteration_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SessionRecord& r, std::size_t max_points = 0);
SessionRecord session_from_json(const nlohmann::json& j);

std::filesystem::path session_path(const std::filesystem::path& sessions_dir, const std::string& id);
/// Atomic replace of sessions_dir/<id>.json.
void save_session(const SessionRecord& record);
SessionRecord load_session(const std::filesystem::path& path);

/// Objective lines, then violations, then the closing instruction.
/// `artifact` names what the model must send back ("netlist", "Verilog module").
std::string compose_feedback(const std::vector<ObjectiveCheck>& checks, const MetricMap& metrics,
                             const std::vector<netlist::Violation>& violations, std::string_view error = {},
                             std::string_view artifact = "netlist");

/// Initial conversation: the system prompt and the user prompt with its objectives.
llm::History initial_history(const PromptBundle& prompt, const std::optional<std::string>& header = {});

/// Metrics a run produced: the metrics report, FPGA report tables and
/// S11 read at any objective's frequency.
MetricMap collect_metrics(const adapters::RunResult& run, const std::vector<Objective>& objectives);

/// Hooks for callers that watch or steer a session.
struct SessionHooks {
    /// Called after every iteration and state change with the current record.
    std::function<void(const SessionRecord&)> on_update;
    /// Interactive strategy: blocks until a human replies. nullopt aborts.
    std::function<std::optional<std::string>(const SessionRecord&)> await_feedback;
    /// Checked between steps; true aborts the session.
    const std::atomic<bool>* abort = nullptr;
};

/// Runs the loop to completion, persisting after every iteration.
SessionRecord run_session(const SessionConfig& config, const SessionHooks& hooks = {});

/// Same as run_session with an explicit provider instance.
SessionRecord run_session(const SessionConfig& config, llm::Provider& provider, const SessionHooks& hooks = {});

/// Re-runs a persisted session's configuration under a new id.
SessionRecord replay_session(const SessionRecord& record, const std::string& new_id);

std::string new_session_id();

/// CSV tables of a sweep iteration keyed by file name:
///   sweep_gain_curves.csv  parameter value, frequency, open-loop gain
///   sweep_gain_pm.csv      per point: value, DC gain, phase margin
///   sweep_ugb_power.csv    per point: value, UGB, power
std::map<std::string, std::string> sweep_tables(const IterationRecord& it, const std::string& parameter);

} // namespace edaloop::orchestrator
