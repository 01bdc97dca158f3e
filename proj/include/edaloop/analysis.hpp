#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "edaloop/run_types.hpp"

namespace edaloop::analysis {

struct AcMetrics {
    double dc_gain_db = 0.0;
    std::optional<double> ugb_hz;
    std::optional<double> pm_deg;
    /// Magnitude crossed 0 dB more than once; the first crossing is reported.
    bool multiple_crossings = false;
};

/// Gain, unity-gain bandwidth and phase margin of an open-loop response.
///
/// `freq_hz` is ascending, positive and shared by both traces (at least 50
/// points). Crossings are interpolated linearly in log frequency.
AcMetrics ac_metrics(const std::vector<double>& freq_hz, const std::vector<double>& mag_db,
                     const std::vector<double>& phase_deg);

/// Linear interpolation of y at `x` with x taken on a log10 axis.
double interp_log_x(const std::vector<double>& x, const std::vector<double>& y, double at);
/// Plain linear interpolation; `at` must lie inside [x.front(), x.back()].
double interp(const std::vector<double>& x, const std::vector<double>& y, double at);

struct Delays {
    std::optional<double> tphl;
    std::optional<double> tplh;
    double worst = 0.0;
};

/// 50 % VDD propagation delays. Each input edge is paired with the next
/// output crossing; the first edge of each polarity is reported.
/// Throws DelayError when no output crossing follows any input edge.
Delays transient_delays(const std::vector<double>& t, const std::vector<double>& v_in,
                        const std::vector<double>& v_out, double vdd);

struct NoiseMargins {
    double voh = 0.0;
    double vol = 0.0;
    double vih = 0.0;
    double vil = 0.0;
    double nmh = 0.0;
    double nml = 0.0;
};

/// Unity-gain points of a non-increasing transfer curve, from central differences.
/// Throws MarginError when fewer than two slope = -1 points exist.
NoiseMargins noise_margins(const std::vector<double>& v_in, const std::vector<double>& v_out,
                           double vdd);

struct S11Summary {
    double s11_at_target_db = 0.0;
    double s11_min_db = 0.0;
    double f_res_hz = 0.0;
    /// Frequency spans with S11 below -10 dB, edges interpolated.
    std::vector<std::pair<double, double>> bands;
};

/// Throws SummaryError when `f_target_hz` lies outside the sweep.
S11Summary s11_summary(const std::vector<double>& freq_hz, const std::vector<double>& s11_db,
                       double f_target_hz, double band_level_db = -10.0);

struct ParetoPoint {
    double power_w = 0.0;
    double delay_s = 0.0;
    std::string label;

    friend bool operator==(const ParetoPoint&, const ParetoPoint&) = default;
};

/// a is no worse than b in both coordinates and better in at least one.
bool dominates(const ParetoPoint& a, const ParetoPoint& b);

/// Non-dominated subset, sorted by power, then delay, then label.
std::vector<ParetoPoint> pareto_front(const std::vector<ParetoPoint>& points);

/// Power-delay product. Throws EvalError on non-positive inputs.
double pdp(double power_w, double delay_s);

struct PassRateCell {
    std::string category;
    int problem_id = 0;
    int successes = 0;

    friend bool operator==(const PassRateCell&, const PassRateCell&) = default;
};

struct PassRateMatrix {
    BenchStage stage = BenchStage::implement;
    int runs_per_problem = 0;
    /// Sorted by problem id.
    std::vector<PassRateCell> cells;
    int problems_with_pass = 0;
    double at_least_one_pass_pct = 0.0;
};

/// Throws AggregationError on empty input, uneven run counts or a problem
/// listed under two categories.
PassRateMatrix pass_rate_matrix(const std::vector<BenchRunLog>& logs, BenchStage stage);

struct SummaryStats {
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    double p25 = 0.0;
    double p50 = 0.0;
    double p75 = 0.0;
};

/// Inclusive linear-interpolation quantile (position q * (n - 1)) of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double q);

/// Throws StatsError on empty or non-finite input.
SummaryStats summary_stats(std::vector<double> samples);

/// "x_name,y_name" CSV of paired columns.
std::string xy_csv(const std::string& x_name, const std::string& y_name,
                   const std::vector<double>& x, const std::vector<double>& y);

nlohmann::json to_json(const AcMetrics& m);
nlohmann::json to_json(const SummaryStats& s);
nlohmann::json to_json(const PassRateMatrix& m);
nlohmann::json to_json(const S11Summary& s);
nlohmann::json to_json(const NoiseMargins& n);

} // namespace edaloop::analysis
