#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "edaloop/adapters.hpp"
#include "edaloop/analysis.hpp"
#include "edaloop/llm.hpp"
#include "edaloop/run_types.hpp"
#include "edaloop/util.hpp"

namespace edaloop::bench {

enum class TimingKind { max_delay_ns, clock_freq_hz };

struct TimingObjective {
    TimingKind kind = TimingKind::max_delay_ns;
    double value = 0.0;

    friend bool operator==(const TimingObjective&, const TimingObjective&) = default;
};

/// One dataset entry.
///
/// JSON schema (one object per problem):
///   problem_id      int, unique
///   category        text
///   top_module      identifier, equal to the header's module name
///   description     text
///   header          Verilog module header source
///   testbench       Verilog testbench source
///   lut_objective   int >= 0
///   max_delay_ns | clock_freq_hz   exactly one, positive
///   clock_attr      "port=<name> period=<ns>", present iff clock_freq_hz
struct BenchProblem {
    int problem_id = 0;
    std::string category;
    std::string top_module;
    std::string description;
    std::string header;
    std::string testbench;
    long long lut_objective = 0;
    TimingObjective timing;
    std::optional<std::string> clock_attr;

    friend bool operator==(const BenchProblem&, const BenchProblem&) = default;
};

nlohmann::json to_json(const BenchProblem& p);

/// Renames foreign dataset fields to ours: {"fields": {"top_module": "Module", ...}}.
struct FieldMapping {
    std::map<std::string, std::string> fields;

    static FieldMapping load(const std::filesystem::path& path);
    /// Copy of `entry` with mapped fields renamed to our names.
    nlohmann::json apply(const nlohmann::json& entry) const;
};

/// Accepts {"problems": [...]} or a bare array.
/// Throws DatasetError naming the problem index and field.
std::vector<BenchProblem> problems_from_json(const nlohmann::json& j, const FieldMapping* mapping = nullptr);
std::vector<BenchProblem> load_dataset(const std::filesystem::path& path, const FieldMapping* mapping = nullptr);
nlohmann::json dataset_json(const std::vector<BenchProblem>& problems);

/// Target maximum delay in ns: uniform over [1, 10], rounded to 0.01 ns.
double draw_max_delay_ns(util::SeededRng& rng);
/// Target clock in MHz: one of 100, 150, ..., 1000.
int draw_clock_mhz(util::SeededRng& rng);

/// Adds ids, objectives and clock attributes to a base dataset.
///
/// Base entries carry category, top_module, description, header and
/// testbench. Ids follow category order of first appearance. The LUT
/// objective comes from `lut_policy` keyed by top module. Designs whose
/// header has a clock port get a clock objective, the rest a delay objective.
/// Throws DatasetError on missing base fields or policy entries.
std::vector<BenchProblem> augment(const nlohmann::json& base, const std::map<std::string, long long>& lut_policy,
                                  std::uint64_t seed, const FieldMapping* mapping = nullptr);

/// Reads {"lut_objectives": {"module": n, ...}} or a flat object.
std::map<std::string, long long> load_lut_policy(const std::filesystem::path& path);

/// File-level augmentation; returns `out_path`. Same inputs give identical bytes.
std::filesystem::path augment_dataset(const std::filesystem::path& base_path, const std::filesystem::path& policy_path,
                                      std::uint64_t seed, const std::filesystem::path& out_path,
                                      const FieldMapping* mapping = nullptr);

/// User prompt for one problem: description, objectives and module header.
std::string problem_prompt(const BenchProblem& p);
const std::string& default_system_prompt();

struct BenchOptions {
    int runs_per_problem = 5;
    std::filesystem::path workspace_root = "workspaces";
    /// Concurrent runs; 0 picks min(4, hardware threads).
    int jobs = 0;
    std::string system_prompt = default_system_prompt();
};

/// runs_per_problem logs per problem, ordered by (problem_id, run).
/// Throws ConfigError when the adapter is not an FPGA adapter.
std::vector<BenchRunLog> run_benchmark(const std::vector<BenchProblem>& problems, const adapters::AdapterSpec& adapter,
                                       const llm::LlmConfig& llm_config, llm::Provider& provider,
                                       const BenchOptions& options = {});

/// One run; failures are recorded in the log, never thrown.
BenchRunLog run_problem(const BenchProblem& problem, int run, const adapters::AdapterSpec& adapter,
                        const llm::LlmConfig& llm_config, llm::Provider& provider, const BenchOptions& options);

/// Writes logs as <dir>/p<id>_r<run>.json.
void write_logs(const std::vector<BenchRunLog>& logs, const std::filesystem::path& dir);
/// Reads every *.json log in `dir`, ordered by (problem_id, run).
std::vector<BenchRunLog> load_logs(const std::filesystem::path& dir);

struct CategoryStats {
    std::string category;
    analysis::SummaryStats llm_time_s;
    analysis::SummaryStats tool_time_s;
    analysis::SummaryStats total_time_s;
    analysis::SummaryStats completion_tokens;
};

struct AggregateReport {
    std::vector<analysis::PassRateMatrix> matrices;  // one per BenchStage
    std::vector<CategoryStats> categories;           // sorted by name
    std::size_t log_count = 0;

    const analysis::PassRateMatrix& matrix(BenchStage stage) const;
};

/// Throws AggregationError on empty or inconsistent logs.
AggregateReport aggregate(const std::vector<BenchRunLog>& logs);

/// "stage,category,problem_id,successes,runs" rows for every stage.
std::string matrix_long_csv(const AggregateReport& report);
/// One row per category: "category,<id>:<successes>,..." for one stage.
std::string matrix_grid_csv(const analysis::PassRateMatrix& m);
/// Per-category time and token summaries.
std::string category_stats_csv(const AggregateReport& report);
nlohmann::json summary_json(const AggregateReport& report);

/// Writes summary.json, pass_rates.csv, stats.csv and one grid_<stage>.csv per stage.
void write_aggregate(const AggregateReport& report, const std::filesystem::path& dir);

} // namespace edaloop::bench
