#pragma once

// Independent reference computations. Nothing here calls the library.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace oracle {

constexpr double pi = 3.14159265358979323846;

inline std::vector<double> log_grid(double f_lo, double f_hi, int per_decade) {
    const int n = static_cast<int>(std::round(std::log10(f_hi / f_lo) * per_decade));
    std::vector<double> f(n + 1);
    for (int i = 0; i <= n; ++i) f[i] = f_lo * std::pow(10.0, static_cast<double>(i) / per_decade);
    return f;
}

// Open-loop response with poles at p1 (and p2 when positive).
struct PoleModel {
    double a0 = 1.0;
    double p1 = 1.0;
    double p2 = 0.0;

    double mag_db(double f) const {
        double m = 20 * std::log10(a0) - 10 * std::log10(1 + (f / p1) * (f / p1));
        if (p2 > 0) m -= 10 * std::log10(1 + (f / p2) * (f / p2));
        return m;
    }
    double phase_deg(double f) const {
        double ph = -std::atan(f / p1);
        if (p2 > 0) ph -= std::atan(f / p2);
        return ph * 180 / pi;
    }
};

// Single pole: |H| = 1 at f = p1 * sqrt(a0^2 - 1).
inline double single_pole_ugb(double a0, double p1) { return p1 * std::sqrt(a0 * a0 - 1); }
inline double single_pole_pm(double a0) { return 180 - std::atan(std::sqrt(a0 * a0 - 1)) * 180 / pi; }

struct ScanResult {
    double ugb_hz = 0.0;
    double pm_deg = 0.0;
};

// Walks a dense log grid until the magnitude drops through 0 dB.
inline std::optional<ScanResult> dense_scan(const PoleModel& m, double f_lo, double f_hi, long points) {
    const double step = std::log10(f_hi / f_lo) / static_cast<double>(points - 1);
    double prev_f = f_lo, prev_m = m.mag_db(f_lo);
    for (long i = 1; i < points; ++i) {
        const double f = f_lo * std::pow(10.0, step * static_cast<double>(i));
        const double mag = m.mag_db(f);
        if (prev_m > 0 && mag <= 0) {
            const double fc = std::sqrt(prev_f * f);
            return ScanResult{fc, 180 + m.phase_deg(fc)};
        }
        prev_f = f;
        prev_m = mag;
    }
    return std::nullopt;
}

// Logistic inverter transfer curve.
inline double logistic_vtc(double vin, double vdd, double gain, double vm) {
    return vdd / (1 + std::exp(gain * (vin - vm)));
}

struct Margins {
    double vil = 0.0, vih = 0.0, voh = 0.0, vol = 0.0, nmh = 0.0, nml = 0.0;
};

// Forward-difference slope on every segment; the unity points are the
// sample points where the segment slope first reaches -1 and last leaves it.
inline std::optional<Margins> slope_scan(const std::vector<double>& vin, const std::vector<double>& vout) {
    std::optional<std::size_t> first, last;
    for (std::size_t i = 0; i + 1 < vin.size(); ++i) {
        const double s = (vout[i + 1] - vout[i]) / (vin[i + 1] - vin[i]);
        if (s <= -1) {
            if (!first) first = i;
            last = i;
        }
    }
    if (!first) return std::nullopt;
    Margins m;
    m.vil = vin[*first];
    m.vih = vin[*last + 1];
    m.voh = vout.front();
    m.vol = vout.back();
    m.nmh = m.voh - m.vih;
    m.nml = m.vil - m.vol;
    return m;
}

struct Point {
    double power = 0.0;
    double delay = 0.0;
    std::string label;
};

// Every point no other point dominates.
inline std::vector<Point> pareto_quadratic(const std::vector<Point>& pts) {
    std::vector<Point> out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < pts.size() && !dominated; ++j) {
            if (i == j) continue;
            const auto& a = pts[j];
            const auto& b = pts[i];
            dominated = a.power <= b.power && a.delay <= b.delay && (a.power < b.power || a.delay < b.delay);
        }
        if (!dominated) out.push_back(pts[i]);
    }
    std::sort(out.begin(), out.end(), [](const Point& a, const Point& b) {
        if (a.power != b.power) return a.power < b.power;
        if (a.delay != b.delay) return a.delay < b.delay;
        return a.label < b.label;
    });
    return out;
}

// Percentage deviation of a result from its target, optionally on magnitudes.
inline double deviation(double result, double target, bool magnitude) {
    if (magnitude) return (std::fabs(result) - std::fabs(target)) / std::fabs(target) * 100;
    return (result - target) / target * 100;
}

// Reflection coefficient magnitude in dB from an S11 deviation: the S11 value
// whose magnitude deviates by `pct` percent from |target|.
inline double s11_from_deviation(double pct, double target) {
    return -std::fabs(target) * (1 + pct / 100);
}

} // namespace oracle
