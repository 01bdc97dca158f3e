#include "edaloop/core.hpp"

#include <cmath>

#include "edaloop/errors.hpp"
#include "edaloop/util.hpp"

namespace edaloop {

std::string_view to_string(FlowKind flow) {
    switch (flow) {
    case FlowKind::analogue: return "analogue";
    case FlowKind::rf: return "rf";
    case FlowKind::fpga: return "fpga";
    }
    return "analogue";
}

FlowKind flow_from_string(std::string_view text) {
    auto t = util::to_lower(text);
    if (t == "analogue" || t == "analog") return FlowKind::analogue;
    if (t == "rf") return FlowKind::rf;
    if (t == "fpga") return FlowKind::fpga;
    throw ConfigError("unknown flow '" + std::string(text) + "'");
}

std::string_view to_string(Comparator cmp) {
    switch (cmp) {
    case Comparator::at_least: return ">=";
    case Comparator::at_most: return "<=";
    case Comparator::approx: return "approx";
    }
    return ">=";
}

Comparator comparator_from_string(std::string_view text) {
    auto t = util::trim(text);
    if (t == ">=" || t == ">") return Comparator::at_least;
    if (t == "<=" || t == "<") return Comparator::at_most;
    if (t == "approx" || t == "~" || t == "~=") return Comparator::approx;
    throw ConfigError("unknown comparator '" + std::string(text) + "'");
}

std::string_view to_string(CheckStatus status) {
    switch (status) {
    case CheckStatus::met: return "met";
    case CheckStatus::unmet: return "unmet";
    case CheckStatus::unmeasurable: return "unmeasurable";
    }
    return "unmeasurable";
}

CheckStatus check_status_from_string(std::string_view text) {
    if (text == "met") return CheckStatus::met;
    if (text == "unmet") return CheckStatus::unmet;
    if (text == "unmeasurable") return CheckStatus::unmeasurable;
    throw ConfigError("unknown check status '" + std::string(text) + "'");
}

MetricRegistry MetricRegistry::with_defaults() {
    MetricRegistry r;
    r.add("dc_gain_db", {"dB"});
    r.add("phase_margin_deg", {"deg"});
    r.add("ugb_hz", {"Hz"});
    r.add("power_w", {"W"});
    r.add("s11_db", {"dB", true, true});
    r.add("s11_min_db", {"dB", true});
    r.add("f_res_hz", {"Hz"});
    r.add("lut_count", {""});
    r.add("clock_freq_hz", {"Hz"});
    r.add("max_delay_ns", {"ns"});
    r.add("tphl_s", {"s"});
    r.add("tplh_s", {"s"});
    r.add("worst_delay_s", {"s"});
    r.add("nmh_v", {"V"});
    r.add("nml_v", {"V"});
    r.add("pdp_j", {"J"});
    return r;
}

void MetricRegistry::add(std::string name, MetricInfo info) {
    entries_.insert_or_assign(std::move(name), std::move(info));
}

const MetricInfo* MetricRegistry::find(std::string_view name) const {
    auto it = entries_.find(name);
    return it == entries_.end() ? nullptr : &it->second;
}

std::vector<std::string> MetricRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_) out.push_back(k);
    return out;
}

const MetricRegistry& default_metrics() {
    static const MetricRegistry registry = MetricRegistry::with_defaults();
    return registry;
}

Objective Objective::make(std::string metric, Comparator cmp, double target,
                          std::optional<double> tolerance, std::optional<double> at_frequency_hz,
                          const MetricRegistry& registry) {
    if (metric.empty()) throw ConfigError("objective metric is empty");
    if (!std::isfinite(target)) throw ConfigError("objective target must be finite: " + metric);
    if (tolerance && (!std::isfinite(*tolerance) || *tolerance < 0))
        throw ConfigError("objective tolerance must be non-negative: " + metric);
    if (cmp == Comparator::approx) {
        if (!tolerance) tolerance = 0.1 * std::abs(target);
        if (!(*tolerance > 0)) throw ConfigError("approx objective needs tolerance > 0: " + metric);
    }
    if (at_frequency_hz && !(*at_frequency_hz > 0))
        throw ConfigError("objective frequency must be positive: " + metric);
    if (const auto* info = registry.find(metric); info && info->needs_frequency && !at_frequency_hz)
        throw ConfigError("objective on " + metric + " requires at_frequency_hz");
    return Objective{std::move(metric), cmp, target, tolerance, at_frequency_hz};
}

std::string Objective::describe() const {
    std::string s = metric + " " + std::string(to_string(comparator)) + " " + util::shortest(target);
    if (comparator == Comparator::approx && tolerance) s += " +/- " + util::shortest(*tolerance);
    if (at_frequency_hz) s += " @ " + util::shortest(*at_frequency_hz) + " Hz";
    return s;
}

void PromptBundle::validate() const {
    if (util::trim(system_prompt).empty()) throw ConfigError("system prompt is empty");
    if (util::trim(user_prompt).empty()) throw ConfigError("user prompt is empty");
    if (flow != FlowKind::fpga && (testbench || clock_constraint))
        throw ConfigError("testbench and clock constraint are only allowed for the fpga flow");
}

std::optional<double> deviation_pct(double result, double target, bool magnitude) {
    if (target == 0.0) return std::nullopt;
    if (magnitude) return (std::abs(result) - std::abs(target)) / std::abs(target) * 100.0;
    return (result - target) / target * 100.0;
}

ObjectiveCheck evaluate_objective(const Objective& objective, const MetricMap& metrics,
                                  const MetricRegistry& registry) {
    ObjectiveCheck check{objective, std::nullopt, CheckStatus::unmeasurable, std::nullopt};
    auto it = metrics.find(objective.metric);
    if (it == metrics.end()) return check;

    const double m = it->second;
    check.measured = m;
    bool met = false;
    switch (objective.comparator) {
    case Comparator::at_least: met = m >= objective.target; break;
    case Comparator::at_most: met = m <= objective.target; break;
    case Comparator::approx: {
        double tol = objective.tolerance.value_or(0.1 * std::abs(objective.target));
        met = std::abs(m - objective.target) <= tol;
        break;
    }
    }
    check.status = met ? CheckStatus::met : CheckStatus::unmet;

    const auto* info = registry.find(objective.metric);
    const bool magnitude = objective.comparator == Comparator::at_most && info &&
                           info->magnitude_deviation;
    check.deviation_pct = deviation_pct(m, objective.target, magnitude);
    return check;
}

bool all_met(const std::vector<ObjectiveCheck>& checks) {
    if (checks.empty()) return false;
    for (const auto& c : checks)
        if (c.status != CheckStatus::met) return false;
    return true;
}

void to_json(nlohmann::json& j, const Objective& o) {
    j = nlohmann::json{{"metric", o.metric},
                       {"comparator", to_string(o.comparator)},
                       {"target", o.target}};
    if (o.tolerance) j["tolerance"] = *o.tolerance;
    if (o.at_frequency_hz) j["at_frequency_hz"] = *o.at_frequency_hz;
}

void from_json(const nlohmann::json& j, Objective& o) {
    std::optional<double> tol;
    std::optional<double> freq;
    if (j.contains("tolerance") && !j.at("tolerance").is_null()) tol = j.at("tolerance").get<double>();
    if (j.contains("at_frequency_hz") && !j.at("at_frequency_hz").is_null())
        freq = j.at("at_frequency_hz").get<double>();
    o = Objective::make(j.at("metric").get<std::string>(),
                        comparator_from_string(j.at("comparator").get<std::string>()),
                        j.at("target").get<double>(), tol, freq);
}

void to_json(nlohmann::json& j, const ObjectiveCheck& c) {
    j = nlohmann::json{{"objective", c.objective}, {"status", to_string(c.status)}};
    j["measured"] = c.measured ? nlohmann::json(*c.measured) : nlohmann::json(nullptr);
    j["deviation_pct"] = c.deviation_pct ? nlohmann::json(*c.deviation_pct) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, ObjectiveCheck& c) {
    c.objective = j.at("objective").get<Objective>();
    c.status = check_status_from_string(j.at("status").get<std::string>());
    c.measured.reset();
    c.deviation_pct.reset();
    if (j.contains("measured") && !j.at("measured").is_null()) c.measured = j.at("measured").get<double>();
    if (j.contains("deviation_pct") && !j.at("deviation_pct").is_null())
        c.deviation_pct = j.at("deviation_pct").get<double>();
}

void to_json(nlohmann::json& j, const PromptBundle& p) {
    j = nlohmann::json{{"flow", to_string(p.flow)},
                       {"system_prompt", p.system_prompt},
                       {"user_prompt", p.user_prompt},
                       {"objectives", p.objectives}};
    if (p.testbench) j["testbench"] = *p.testbench;
    if (p.clock_constraint) j["clock_constraint"] = *p.clock_constraint;
}

void from_json(const nlohmann::json& j, PromptBundle& p) {
    p.flow = flow_from_string(j.at("flow").get<std::string>());
    p.system_prompt = j.at("system_prompt").get<std::string>();
    p.user_prompt = j.at("user_prompt").get<std::string>();
    p.objectives = j.value("objectives", std::vector<Objective>{});
    p.testbench.reset();
    p.clock_constraint.reset();
    if (j.contains("testbench")) p.testbench = j.at("testbench").get<std::string>();
    if (j.contains("clock_constraint")) p.clock_constraint = j.at("clock_constraint").get<std::string>();
}

} // namespace edaloop
