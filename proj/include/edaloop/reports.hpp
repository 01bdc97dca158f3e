#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "edaloop/core.hpp"

// Report grammars
//
// metrics:      one "name = value [unit]" per line; '#' starts a comment line.
//
// tables:       rows are lines whose first non-blank character is '|'; cells are
//               split on '|' and trimmed. Lines starting with '+' are rules, any
//               other line is free text and ignored. A row with a cell named
//               "Used" (utilization) or "Value" (timing, power) is a header row
//               and selects the value column for the rows after it; without
//               one the second cell is used. Row names match case-insensitively
//               and may carry a trailing '*'. The first occurrence of a row wins.
//               Integers may use ',' thousands separators in groups of three;
//               decimal commas are rejected.
//
//   utilization rows: Slice LUTs, Slice Registers, Block RAM Tile, DSPs, Bonded IOB
//                     (CLB LUTs / CLB Registers accepted as aliases)
//   timing rows:      Data Path Delay, Logic Delay, Route Delay, Achieved Period;
//                     values in ns unless followed by "ps" or "ns"
//   power rows:       Total On-Chip Power (W), Dynamic (W), Device Static (W);
//                     values in W unless followed by "mW" or "W"
//
// logs:         lines beginning "ERROR:" or "CRITICAL WARNING:", optionally
//               followed by "[Code]" and ending in "[file:line]". The next line
//               is kept as context.
namespace edaloop::reports {

struct MetricEntry {
    double value = 0.0;
    std::string unit;

    friend bool operator==(const MetricEntry&, const MetricEntry&) = default;
};

struct MetricsReport {
    std::map<std::string, MetricEntry> entries;
    /// Lines that were neither blank, comments nor "name = value" records.
    std::size_t ignored_lines = 0;

    MetricMap values() const;
};

/// Throws ReportError on a duplicate name.
MetricsReport parse_metrics(std::string_view text);
std::string write_metrics(const MetricsReport& report);

struct UtilizationReport {
    long long lut = 0;
    long long ff = 0;
    long long bram = 0;
    long long dsp = 0;
    long long io = 0;

    friend bool operator==(const UtilizationReport&, const UtilizationReport&) = default;
};

struct TimingReport {
    double data_path_ns = 0.0;
    double logic_ns = 0.0;
    double route_ns = 0.0;
    double achieved_period_ns = 0.0;

    double achieved_freq_hz() const { return 1e9 / achieved_period_ns; }
};

struct PowerReport {
    double total_w = 0.0;
    double dynamic_w = 0.0;
    double static_w = 0.0;
};

/// Each throws ReportError naming the missing or inconsistent row.
UtilizationReport parse_utilization(std::string_view text);
TimingReport parse_timing(std::string_view text);
PowerReport parse_power(std::string_view text);

std::string write_utilization(const UtilizationReport& report);
std::string write_timing(const TimingReport& report);
std::string write_power(const PowerReport& report);

/// Parses "1,234" style integers. Empty on malformed input.
std::optional<long long> parse_grouped_int(std::string_view text);

struct LogEntry {
    std::string code;
    std::string message;
    std::optional<std::string> location;
    std::string context;
    std::size_t line = 0;

    friend bool operator==(const LogEntry&, const LogEntry&) = default;
};

struct LogDigest {
    std::vector<LogEntry> errors;
    std::vector<LogEntry> critical_warnings;

    bool has_errors() const { return !errors.empty(); }
    bool empty() const { return errors.empty() && critical_warnings.empty(); }
};

LogDigest scan_log(std::string_view text);

void to_json(nlohmann::json& j, const UtilizationReport& r);
void from_json(const nlohmann::json& j, UtilizationReport& r);
void to_json(nlohmann::json& j, const TimingReport& r);
void from_json(const nlohmann::json& j, TimingReport& r);
void to_json(nlohmann::json& j, const PowerReport& r);
void from_json(const nlohmann::json& j, PowerReport& r);
void to_json(nlohmann::json& j, const LogEntry& e);
void from_json(const nlohmann::json& j, LogEntry& e);
void to_json(nlohmann::json& j, const LogDigest& d);
void from_json(const nlohmann::json& j, LogDigest& d);

} // namespace edaloop::reports
