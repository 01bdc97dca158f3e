#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace edaloop {

/// One named numeric trace: y (optionally complex) against a strictly increasing x.
struct Trace {
    std::string x_name;
    std::string x_unit;
    std::string y_unit;
    std::vector<double> x;
    std::vector<double> y;
    /// Imaginary part; empty for real traces.
    std::vector<double> y_imag;

    std::size_t size() const { return x.size(); }
    /// Throws EvalError if empty, ragged or x is not strictly increasing.
    void validate() const;
};

struct WaveformSet {
    std::map<std::string, Trace> traces;

    /// Throws EvalError when absent.
    const Trace& at(const std::string& name) const;
    bool has(const std::string& name) const { return traces.count(name) > 0; }
};

/// At most `max_points` samples, evenly spaced by index, first and last kept.
Trace downsample(const Trace& trace, std::size_t max_points);

/// "x,y" CSV with a header row naming the columns.
std::string trace_csv(const Trace& trace, const std::string& y_name = "y");

/// `max_points` of 0 keeps every sample.
nlohmann::json trace_json(const Trace& trace, std::size_t max_points = 0);
Trace trace_from_json(const nlohmann::json& j);
nlohmann::json waveforms_json(const WaveformSet& set, std::size_t max_points = 0);
WaveformSet waveforms_from_json(const nlohmann::json& j);

} // namespace edaloop
