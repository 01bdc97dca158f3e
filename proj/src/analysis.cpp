#include "edaloop/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "edaloop/errors.hpp"
#include "edaloop/util.hpp"

namespace edaloop::analysis {

namespace {

void check_grid(const std::vector<double>& x, std::size_t n, std::size_t min_points, bool positive) {
    if (x.size() < min_points)
        throw EvalError("trace needs at least " + std::to_string(min_points) + " points");
    if (n != x.size()) throw EvalError("traces do not share the sweep grid");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || (positive && x[i] <= 0)) throw EvalError("bad sweep value");
        if (i && !(x[i] > x[i - 1])) throw EvalError("sweep is not strictly increasing");
    }
}

// Position of `at` as (segment index, fraction) on an ascending grid.
std::pair<std::size_t, double> locate(const std::vector<double>& x, double at, bool log_axis) {
    if (x.size() == 1) return {0, 0.0};
    auto it = std::upper_bound(x.begin(), x.end(), at);
    std::size_t i = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
    if (i >= x.size() - 1) i = x.size() - 2;
    double a = x[i], b = x[i + 1];
    double f = log_axis ? (std::log10(at) - std::log10(a)) / (std::log10(b) - std::log10(a))
                        : (at - a) / (b - a);
    return {i, f};
}

} // namespace

double interp(const std::vector<double>& x, const std::vector<double>& y, double at) {
    auto [i, f] = locate(x, at, false);
    if (x.size() == 1) return y[0];
    return y[i] + f * (y[i + 1] - y[i]);
}

double interp_log_x(const std::vector<double>& x, const std::vector<double>& y, double at) {
    auto [i, f] = locate(x, at, true);
    if (x.size() == 1) return y[0];
    return y[i] + f * (y[i + 1] - y[i]);
}

AcMetrics ac_metrics(const std::vector<double>& freq_hz, const std::vector<double>& mag_db,
                     const std::vector<double>& phase_deg) {
    check_grid(freq_hz, mag_db.size(), 50, true);
    if (phase_deg.size() != freq_hz.size()) throw EvalError("traces do not share the sweep grid");

    AcMetrics m;
    m.dc_gain_db = mag_db.front();
    int crossings = 0;
    for (std::size_t i = 0; i + 1 < freq_hz.size(); ++i) {
        const double a = mag_db[i], b = mag_db[i + 1];
        const bool cross = (a >= 0 && b < 0) || (a < 0 && b >= 0);
        if (!cross) continue;
        if (++crossings > 1) continue;
        const double t = a / (a - b);
        const double la = std::log10(freq_hz[i]), lb = std::log10(freq_hz[i + 1]);
        m.ugb_hz = std::pow(10.0, la + t * (lb - la));
        m.pm_deg = 180.0 + phase_deg[i] + t * (phase_deg[i + 1] - phase_deg[i]);
    }
    m.multiple_crossings = crossings > 1;
    return m;
}

namespace {

struct Crossing {
    double time;
    bool rising;
};

std::vector<Crossing> crossings(const std::vector<double>& t, const std::vector<double>& v, double level) {
    std::vector<Crossing> out;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        const double a = v[i] - level, b = v[i + 1] - level;
        if ((a < 0 && b >= 0) || (a >= 0 && b < 0)) {
            // A sample exactly at the level belongs to the segment it ends.
            const double f = a == b ? 0.0 : a / (a - b);
            out.push_back({t[i] + f * (t[i + 1] - t[i]), b >= 0});
        }
    }
    return out;
}

} // namespace

Delays transient_delays(const std::vector<double>& t, const std::vector<double>& v_in,
                        const std::vector<double>& v_out, double vdd) {
    check_grid(t, v_in.size(), 2, false);
    if (v_out.size() != t.size()) throw EvalError("traces are not time-aligned");
    const double level = 0.5 * vdd;
    auto in = crossings(t, v_in, level);
    auto out = crossings(t, v_out, level);
    if (out.empty()) throw DelayError("output never crosses 50% of VDD");

    Delays d;
    std::size_t k = 0;
    for (const auto& edge : in) {
        while (k < out.size() && out[k].time < edge.time) ++k;
        if (k == out.size()) break;
        const double delay = out[k].time - edge.time;
        // Output falling means a high-to-low transition.
        if (!out[k].rising && !d.tphl) d.tphl = delay;
        if (out[k].rising && !d.tplh) d.tplh = delay;
        ++k;
    }
    if (!d.tphl && !d.tplh) throw DelayError("no output transition follows an input edge");
    d.worst = std::max(d.tphl.value_or(0.0), d.tplh.value_or(0.0));
    return d;
}

NoiseMargins noise_margins(const std::vector<double>& v_in, const std::vector<double>& v_out,
                           double vdd) {
    check_grid(v_in, v_out.size(), 3, false);
    for (std::size_t i = 1; i < v_out.size(); ++i)
        if (v_out[i] > v_out[i - 1] + 1e-9 * std::max(1.0, std::abs(vdd)))
            throw MarginError("transfer curve is not non-increasing");

    const std::size_t n = v_in.size();
    std::vector<double> slope(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t a = i == 0 ? 0 : i - 1;
        std::size_t b = i + 1 == n ? n - 1 : i + 1;
        slope[i] = (v_out[b] - v_out[a]) / (v_in[b] - v_in[a]);
    }
    // Points where slope + 1 changes sign, interpolated between samples.
    std::vector<double> unity;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double a = slope[i] + 1.0, b = slope[i + 1] + 1.0;
        if ((a > 0 && b <= 0) || (a <= 0 && b > 0)) {
            const double f = a / (a - b);
            unity.push_back(v_in[i] + f * (v_in[i + 1] - v_in[i]));
        }
    }
    if (unity.size() < 2) throw MarginError("transfer curve has fewer than two unity-gain points");

    NoiseMargins m;
    m.vil = unity.front();
    m.vih = unity.back();
    m.voh = interp(v_in, v_out, std::clamp(0.0, v_in.front(), v_in.back()));
    m.vol = interp(v_in, v_out, std::clamp(vdd, v_in.front(), v_in.back()));
    m.nmh = m.voh - m.vih;
    m.nml = m.vil - m.vol;
    return m;
}

S11Summary s11_summary(const std::vector<double>& freq_hz, const std::vector<double>& s11_db,
                       double f_target_hz, double band_level_db) {
    check_grid(freq_hz, s11_db.size(), 2, true);
    if (!(f_target_hz >= freq_hz.front() && f_target_hz <= freq_hz.back()))
        throw SummaryError("target frequency " + util::shortest(f_target_hz) + " Hz is outside the sweep");
    S11Summary s;
    s.s11_at_target_db = interp_log_x(freq_hz, s11_db, f_target_hz);
    auto it = std::min_element(s11_db.begin(), s11_db.end());
    s.s11_min_db = *it;
    s.f_res_hz = freq_hz[static_cast<std::size_t>(it - s11_db.begin())];

    auto edge = [&](std::size_t i) {
        const double a = s11_db[i] - band_level_db, b = s11_db[i + 1] - band_level_db;
        const double f = a / (a - b);
        const double la = std::log10(freq_hz[i]), lb = std::log10(freq_hz[i + 1]);
        return std::pow(10.0, la + f * (lb - la));
    };
    std::optional<double> open;
    if (s11_db.front() < band_level_db) open = freq_hz.front();
    for (std::size_t i = 0; i + 1 < freq_hz.size(); ++i) {
        const bool in_a = s11_db[i] < band_level_db, in_b = s11_db[i + 1] < band_level_db;
        if (!in_a && in_b) open = edge(i);
        if (in_a && !in_b) {
            s.bands.emplace_back(open.value_or(freq_hz.front()), edge(i));
            open.reset();
        }
    }
    if (open) s.bands.emplace_back(*open, freq_hz.back());
    return s;
}

bool dominates(const ParetoPoint& a, const ParetoPoint& b) {
    return a.power_w <= b.power_w && a.delay_s <= b.delay_s &&
           (a.power_w < b.power_w || a.delay_s < b.delay_s);
}

std::vector<ParetoPoint> pareto_front(const std::vector<ParetoPoint>& points) {
    std::vector<ParetoPoint> sorted = points;
    std::sort(sorted.begin(), sorted.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
        if (a.power_w != b.power_w) return a.power_w < b.power_w;
        if (a.delay_s != b.delay_s) return a.delay_s < b.delay_s;
        return a.label < b.label;
    });
    std::vector<ParetoPoint> front;
    double best_delay = std::numeric_limits<double>::infinity();
    std::size_t i = 0;
    while (i < sorted.size()) {
        // Group of equal power: only its minimum-delay members can survive.
        std::size_t j = i;
        while (j < sorted.size() && sorted[j].power_w == sorted[i].power_w) ++j;
        const double group_min = sorted[i].delay_s;
        if (group_min < best_delay) {
            for (std::size_t k = i; k < j && sorted[k].delay_s == group_min; ++k) front.push_back(sorted[k]);
            best_delay = group_min;
        }
        i = j;
    }
    return front;
}

double pdp(double power_w, double delay_s) {
    if (!(power_w > 0) || !(delay_s > 0) || !std::isfinite(power_w) || !std::isfinite(delay_s))
        throw EvalError("power-delay product needs positive finite inputs");
    return power_w * delay_s;
}

PassRateMatrix pass_rate_matrix(const std::vector<BenchRunLog>& logs, BenchStage stage) {
    if (logs.empty()) throw AggregationError("no run logs to aggregate");
    struct Acc {
        std::string category;
        int runs = 0;
        int successes = 0;
    };
    std::map<int, Acc> by_problem;
    for (const auto& l : logs) {
        auto [it, fresh] = by_problem.try_emplace(l.problem_id, Acc{l.category, 0, 0});
        if (!fresh && it->second.category != l.category)
            throw AggregationError("problem " + std::to_string(l.problem_id) + " appears under two categories");
        ++it->second.runs;
        if (l.passed(stage)) ++it->second.successes;
    }
    PassRateMatrix m;
    m.stage = stage;
    m.runs_per_problem = by_problem.begin()->second.runs;
    for (const auto& [id, acc] : by_problem) {
        if (acc.runs != m.runs_per_problem)
            throw AggregationError("problem " + std::to_string(id) + " has " + std::to_string(acc.runs) +
                                   " runs, expected " + std::to_string(m.runs_per_problem));
        m.cells.push_back({acc.category, id, acc.successes});
        if (acc.successes > 0) ++m.problems_with_pass;
    }
    m.at_least_one_pass_pct = 100.0 * m.problems_with_pass / static_cast<double>(m.cells.size());
    return m;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw StatsError("quantile of an empty sample");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

SummaryStats summary_stats(std::vector<double> samples) {
    if (samples.empty()) throw StatsError("summary of an empty sample");
    for (double v : samples)
        if (!std::isfinite(v)) throw StatsError("sample contains a non-finite value");
    std::sort(samples.begin(), samples.end());
    SummaryStats s;
    double sum = 0.0;
    for (double v : samples) sum += v;
    s.mean = sum / static_cast<double>(samples.size());
    s.min = samples.front();
    s.max = samples.back();
    s.p25 = quantile_sorted(samples, 0.25);
    s.p50 = quantile_sorted(samples, 0.50);
    s.p75 = quantile_sorted(samples, 0.75);
    return s;
}

std::string xy_csv(const std::string& x_name, const std::string& y_name,
                   const std::vector<double>& x, const std::vector<double>& y) {
    std::string out = x_name + "," + y_name + "\n";
    for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i)
        out += util::shortest(x[i]) + "," + util::shortest(y[i]) + "\n";
    return out;
}

nlohmann::json to_json(const AcMetrics& m) {
    return {{"dc_gain_db", m.dc_gain_db},
            {"ugb_hz", m.ugb_hz ? nlohmann::json(*m.ugb_hz) : nlohmann::json(nullptr)},
            {"pm_deg", m.pm_deg ? nlohmann::json(*m.pm_deg) : nlohmann::json(nullptr)},
            {"multiple_crossings", m.multiple_crossings}};
}

nlohmann::json to_json(const SummaryStats& s) {
    return {{"mean", s.mean}, {"min", s.min}, {"max", s.max},
            {"p25", s.p25}, {"p50", s.p50}, {"p75", s.p75}};
}

nlohmann::json to_json(const PassRateMatrix& m) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : m.cells)
        cells.push_back({{"category", c.category}, {"problem_id", c.problem_id}, {"successes", c.successes}});
    return {{"stage", to_string(m.stage)},
            {"runs_per_problem", m.runs_per_problem},
            {"cells", cells},
            {"problems_with_pass", m.problems_with_pass},
            {"at_least_one_pass_pct", m.at_least_one_pass_pct}};
}

nlohmann::json to_json(const S11Summary& s) {
    nlohmann::json bands = nlohmann::json::array();
    for (const auto& [lo, hi] : s.bands) bands.push_back({lo, hi});
    return {{"s11_at_target_db", s.s11_at_target_db},
            {"s11_min_db", s.s11_min_db},
            {"f_res_hz", s.f_res_hz},
            {"bands", bands}};
}

nlohmann::json to_json(const NoiseMargins& n) {
    return {{"voh", n.voh}, {"vol", n.vol}, {"vih", n.vih},
            {"vil", n.vil}, {"nmh", n.nmh}, {"nml", n.nml}};
}

} // namespace edaloop::analysis
