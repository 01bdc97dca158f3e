#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace edaloop {

enum class FlowKind { analogue, rf, fpga };

std::string_view to_string(FlowKind flow);
FlowKind flow_from_string(std::string_view text);

enum class Comparator { at_least, at_most, approx };

std::string_view to_string(Comparator cmp);
Comparator comparator_from_string(std::string_view text);

/// Unit and deviation convention for one metric identifier.
struct MetricInfo {
    std::string unit;
    /// Deviation compares magnitudes, for metrics where more negative is better.
    bool magnitude_deviation = false;
    /// Objectives on this metric must name a frequency.
    bool needs_frequency = false;
};

/// Open registry of metric identifiers. New flows add metrics without type changes.
class MetricRegistry {
public:
    static MetricRegistry with_defaults();

    void add(std::string name, MetricInfo info);
    const MetricInfo* find(std::string_view name) const;
    std::vector<std::string> names() const;

private:
    std::map<std::string, MetricInfo, std::less<>> entries_;
};

const MetricRegistry& default_metrics();

/// A quantified design target, e.g. "dc_gain_db >= 40".
struct Objective {
    std::string metric;
    Comparator comparator = Comparator::at_least;
    double target = 0.0;
    std::optional<double> tolerance;
    std::optional<double> at_frequency_hz;

    /// Checks the invariants and fills the default approx tolerance (10 % of |target|).
    /// Throws ConfigError.
    static Objective make(std::string metric, Comparator cmp, double target,
                          std::optional<double> tolerance = std::nullopt,
                          std::optional<double> at_frequency_hz = std::nullopt,
                          const MetricRegistry& registry = default_metrics());

    std::string describe() const;

    friend bool operator==(const Objective&, const Objective&) = default;
};

enum class CheckStatus { met, unmet, unmeasurable };

std::string_view to_string(CheckStatus status);
CheckStatus check_status_from_string(std::string_view text);

struct ObjectiveCheck {
    Objective objective;
    std::optional<double> measured;
    CheckStatus status = CheckStatus::unmeasurable;
    std::optional<double> deviation_pct;

    friend bool operator==(const ObjectiveCheck&, const ObjectiveCheck&) = default;
};

struct PromptBundle {
    FlowKind flow = FlowKind::analogue;
    std::string system_prompt;
    std::string user_prompt;
    std::vector<Objective> objectives;
    std::optional<std::string> testbench;
    std::optional<std::string> clock_constraint;

    /// Throws ConfigError on empty prompts or FPGA-only fields on other flows.
    void validate() const;
};

using MetricMap = std::map<std::string, double, std::less<>>;

/// Percentage deviation of a result from its target.
///
/// (result - target) / target * 100, or on magnitudes when `magnitude` is set.
/// Empty when target is zero.
std::optional<double> deviation_pct(double result, double target, bool magnitude = false);

ObjectiveCheck evaluate_objective(const Objective& objective, const MetricMap& metrics,
                                  const MetricRegistry& registry = default_metrics());

bool all_met(const std::vector<ObjectiveCheck>& checks);

void to_json(nlohmann::json& j, const Objective& o);
void from_json(const nlohmann::json& j, Objective& o);
void to_json(nlohmann::json& j, const ObjectiveCheck& c);
void from_json(const nlohmann::json& j, ObjectiveCheck& c);
void to_json(nlohmann::json& j, const PromptBundle& p);
void from_json(const nlohmann::json& j, PromptBundle& p);

} // namespace edaloop
