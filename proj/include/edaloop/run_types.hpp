#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "edaloop/reports.hpp"

namespace edaloop {

enum class Stage { instantiate, simulate, synthesize, implement };

std::string_view to_string(Stage stage);
/// Throws ConfigError for an unknown name.
Stage stage_from_string(std::string_view text);

enum class StageStatus { pass, fail, skipped };

std::string_view to_string(StageStatus status);
StageStatus stage_status_from_string(std::string_view text);

struct StageOutcome {
    Stage stage = Stage::instantiate;
    StageStatus status = StageStatus::skipped;
    double duration_s = 0.0;
    std::string note;
};

/// Columns of the benchmark pass-rate matrices.
enum class BenchStage { simulate, synthesize, implement, lut_objective, timing_objective };

std::string_view to_string(BenchStage stage);
BenchStage bench_stage_from_string(std::string_view text);
const std::vector<BenchStage>& all_bench_stages();

/// Structured output of one benchmark run.
///
/// JSON field names are the published schema: problem_id, category, run,
/// top_module, clock_constraint, generated_source, prompt_tokens,
/// completion_tokens, llm_time_s, tool_time_s, stages {simulate, synthesize,
/// implement}, utilization, timing, power, lut_objective_met,
/// timing_objective_met, errors, note.
struct BenchRunLog {
    int problem_id = 0;
    std::string category;
    int run = 1;
    std::string top_module;
    std::string clock_constraint;
    std::string generated_source;
    std::size_t prompt_tokens = 0;
    std::size_t completion_tokens = 0;
    double llm_time_s = 0.0;
    double tool_time_s = 0.0;
    StageStatus simulate = StageStatus::skipped;
    StageStatus synthesize = StageStatus::skipped;
    StageStatus implement = StageStatus::skipped;
    std::optional<reports::UtilizationReport> utilization;
    std::optional<reports::TimingReport> timing;
    std::optional<reports::PowerReport> power;
    std::optional<bool> lut_objective_met;
    std::optional<bool> timing_objective_met;
    reports::LogDigest errors;
    /// Why the run stopped early (extraction failure, provider error, ...).
    std::string note;

    bool passed(BenchStage stage) const;
};

void to_json(nlohmann::json& j, const BenchRunLog& log);
void from_json(const nlohmann::json& j, BenchRunLog& log);

} // namespace edaloop
