#include "edaloop/run_types.hpp"

#include "edaloop/errors.hpp"

namespace edaloop {

std::string_view to_string(Stage stage) {
    switch (stage) {
    case Stage::instantiate: return "instantiate";
    case Stage::simulate: return "simulate";
    case Stage::synthesize: return "synthesize";
    case Stage::implement: return "implement";
    }
    return "instantiate";
}

Stage stage_from_string(std::string_view text) {
    if (text == "instantiate") return Stage::instantiate;
    if (text == "simulate") return Stage::simulate;
    if (text == "synthesize") return Stage::synthesize;
    if (text == "implement") return Stage::implement;
    throw ConfigError("unknown stage '" + std::string(text) + "'");
}

std::string_view to_string(StageStatus status) {
    switch (status) {
    case StageStatus::pass: return "pass";
    case StageStatus::fail: return "fail";
    case StageStatus::skipped: return "skipped";
    }
    return "skipped";
}

StageStatus stage_status_from_string(std::string_view text) {
    if (text == "pass") return StageStatus::pass;
    if (text == "fail") return StageStatus::fail;
    if (text == "skipped") return StageStatus::skipped;
    throw ConfigError("unknown stage status '" + std::string(text) + "'");
}

std::string_view to_string(BenchStage stage) {
    switch (stage) {
    case BenchStage::simulate: return "simulate";
    case BenchStage::synthesize: return "synthesize";
    case BenchStage::implement: return "implement";
    case BenchStage::lut_objective: return "lut_objective";
    case BenchStage::timing_objective: return "timing_objective";
    }
    return "simulate";
}

BenchStage bench_stage_from_string(std::string_view text) {
    for (auto s : all_bench_stages())
        if (to_string(s) == text) return s;
    if (text == "lut") return BenchStage::lut_objective;
    if (text == "timing") return BenchStage::timing_objective;
    throw ConfigError("unknown benchmark stage '" + std::string(text) + "'");
}

const std::vector<BenchStage>& all_bench_stages() {
    static const std::vector<BenchStage> all{BenchStage::simulate, BenchStage::synthesize,
                                             BenchStage::implement, BenchStage::lut_objective,
                                             BenchStage::timing_objective};
    return all;
}

bool BenchRunLog::passed(BenchStage stage) const {
    switch (stage) {
    case BenchStage::simulate: return simulate == StageStatus::pass;
    case BenchStage::synthesize: return synthesize == StageStatus::pass;
    case BenchStage::implement: return implement == StageStatus::pass;
    case BenchStage::lut_objective: return lut_objective_met.value_or(false);
    case BenchStage::timing_objective: return timing_objective_met.value_or(false);
    }
    return false;
}

namespace {

template <class T>
nlohmann::json opt(const std::optional<T>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <class T>
std::optional<T> get_opt(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<T>();
}

} // namespace

void to_json(nlohmann::json& j, const BenchRunLog& l) {
    j = nlohmann::json{{"problem_id", l.problem_id},
                       {"category", l.category},
                       {"run", l.run},
                       {"top_module", l.top_module},
                       {"clock_constraint", l.clock_constraint},
                       {"generated_source", l.generated_source},
                       {"prompt_tokens", l.prompt_tokens},
                       {"completion_tokens", l.completion_tokens},
                       {"llm_time_s", l.llm_time_s},
                       {"tool_time_s", l.tool_time_s},
                       {"stages", {{"simulate", to_string(l.simulate)},
                                   {"synthesize", to_string(l.synthesize)},
                                   {"implement", to_string(l.implement)}}},
                       {"utilization", opt(l.utilization)},
                       {"timing", opt(l.timing)},
                       {"power", opt(l.power)},
                       {"lut_objective_met", opt(l.lut_objective_met)},
                       {"timing_objective_met", opt(l.timing_objective_met)},
                       {"errors", l.errors},
                       {"note", l.note}};
}

void from_json(const nlohmann::json& j, BenchRunLog& l) {
    l = BenchRunLog{};
    l.problem_id = j.at("problem_id").get<int>();
    l.category = j.value("category", std::string{});
    l.run = j.value("run", 1);
    l.top_module = j.value("top_module", std::string{});
    l.clock_constraint = j.value("clock_constraint", std::string{});
    l.generated_source = j.value("generated_source", std::string{});
    l.prompt_tokens = j.value("prompt_tokens", std::size_t{0});
    l.completion_tokens = j.value("completion_tokens", std::size_t{0});
    l.llm_time_s = j.value("llm_time_s", 0.0);
    l.tool_time_s = j.value("tool_time_s", 0.0);
    const auto& st = j.at("stages");
    l.simulate = stage_status_from_string(st.at("simulate").get<std::string>());
    l.synthesize = stage_status_from_string(st.at("synthesize").get<std::string>());
    l.implement = stage_status_from_string(st.at("implement").get<std::string>());
    l.utilization = get_opt<reports::UtilizationReport>(j, "utilization");
    l.timing = get_opt<reports::TimingReport>(j, "timing");
    l.power = get_opt<reports::PowerReport>(j, "power");
    l.lut_objective_met = get_opt<bool>(j, "lut_objective_met");
    l.timing_objective_met = get_opt<bool>(j, "timing_objective_met");
    if (j.contains("errors")) l.errors = j.at("errors").get<reports::LogDigest>();
    l.note = j.value("note", std::string{});
}

} // namespace edaloop
