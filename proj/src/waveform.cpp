#include "edaloop/waveform.hpp"

#include <cmath>

#include "edaloop/errors.hpp"
#include "edaloop/util.hpp"

namespace edaloop {

void Trace::validate() const {
    if (x.empty()) throw EvalError("trace is empty");
    if (y.size() != x.size() || (!y_imag.empty() && y_imag.size() != x.size()))
        throw EvalError("trace columns have different lengths");
    for (std::size_t i = 1; i < x.size(); ++i)
        if (!(x[i] > x[i - 1])) throw EvalError("trace x values are not strictly increasing");
}

const Trace& WaveformSet::at(const std::string& name) const {
    auto it = traces.find(name);
    if (it == traces.end()) throw EvalError("no trace named '" + name + "'");
    return it->second;
}

Trace downsample(const Trace& trace, std::size_t max_points) {
    const std::size_t n = trace.size();
    if (max_points == 0 || n <= max_points) return trace;
    Trace out = trace;
    out.x.clear();
    out.y.clear();
    out.y_imag.clear();
    const std::size_t m = std::max<std::size_t>(max_points, 2);
    std::size_t last = n;
    for (std::size_t k = 0; k < m; ++k) {
        auto i = static_cast<std::size_t>(std::llround(static_cast<double>(k) * static_cast<double>(n - 1) /
                                                       static_cast<double>(m - 1)));
        if (i == last) continue;
        last = i;
        out.x.push_back(trace.x[i]);
        out.y.push_back(trace.y[i]);
        if (!trace.y_imag.empty()) out.y_imag.push_back(trace.y_imag[i]);
    }
    return out;
}

std::string trace_csv(const Trace& trace, const std::string& y_name) {
    std::string out = (trace.x_name.empty() ? "x" : trace.x_name) + "," + y_name;
    if (!trace.y_imag.empty()) out += "_re," + y_name + "_im";
    out += "\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        out += util::shortest(trace.x[i]) + "," + util::shortest(trace.y[i]);
        if (!trace.y_imag.empty()) out += "," + util::shortest(trace.y_imag[i]);
        out += "\n";
    }
    return out;
}

nlohmann::json trace_json(const Trace& trace, std::size_t max_points) {
    const Trace t = downsample(trace, max_points);
    nlohmann::json j{{"x_name", t.x_name}, {"x_unit", t.x_unit}, {"y_unit", t.y_unit},
                     {"x", t.x}, {"y", t.y}, {"points", trace.size()}};
    if (!t.y_imag.empty()) j["y_imag"] = t.y_imag;
    return j;
}

Trace trace_from_json(const nlohmann::json& j) {
    Trace t;
    t.x_name = j.value("x_name", std::string{});
    t.x_unit = j.value("x_unit", std::string{});
    t.y_unit = j.value("y_unit", std::string{});
    t.x = j.at("x").get<std::vector<double>>();
    t.y = j.at("y").get<std::vector<double>>();
    t.y_imag = j.value("y_imag", std::vector<double>{});
    return t;
}

nlohmann::json waveforms_json(const WaveformSet& set, std::size_t max_points) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, t] : set.traces) j[name] = trace_json(t, max_points);
    return j;
}

WaveformSet waveforms_from_json(const nlohmann::json& j) {
    WaveformSet set;
    for (const auto& [name, t] : j.items()) set.traces[name] = trace_from_json(t);
    return set;
}

} // namespace edaloop
