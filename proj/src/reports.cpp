#include "edaloop/reports.hpp"

#include <cctype>
#include <cmath>

#include "edaloop/errors.hpp"
#include "edaloop/util.hpp"

namespace edaloop::reports {

MetricMap MetricsReport::values() const {
    MetricMap out;
    for (const auto& [k, e] : entries) out[k] = e.value;
    return out;
}

namespace {

bool is_identifier(std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) return false;
    return true;
}

} // namespace

MetricsReport parse_metrics(std::string_view text) {
    MetricsReport r;
    std::size_t line_no = 0;
    for (const auto& raw : util::split_lines(text)) {
        ++line_no;
        auto line = util::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            ++r.ignored_lines;
            continue;
        }
        auto key = util::trim(line.substr(0, eq));
        auto rest = util::split_ws(line.substr(eq + 1));
        if (!is_identifier(key) || rest.empty() || rest.size() > 2) {
            ++r.ignored_lines;
            continue;
        }
        auto v = util::parse_double(rest[0]);
        if (!v || !std::isfinite(*v)) {
            ++r.ignored_lines;
            continue;
        }
        std::string name(key);
        if (r.entries.count(name))
            throw ReportError("duplicate metric '" + name + "'", name, {line_no, 1});
        r.entries[name] = {*v, rest.size() == 2 ? rest[1] : ""};
    }
    return r;
}

std::string write_metrics(const MetricsReport& report) {
    std::string out;
    for (const auto& [k, e] : report.entries) {
        out += k + " = " + util::shortest(e.value);
        if (!e.unit.empty()) out += " " + e.unit;
        out += "\n";
    }
    return out;
}

std::optional<long long> parse_grouped_int(std::string_view text) {
    if (text.empty()) return std::nullopt;
    if (text.find(',') == std::string_view::npos) return util::parse_int(text);
    std::string digits;
    std::size_t group = 0;
    bool first = true;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == ',') {
            if (first ? (group == 0 || group > 3) : group != 3) return std::nullopt;
            first = false;
            group = 0;
            continue;
        }
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) return std::nullopt;
        digits += text[i];
        ++group;
    }
    return util::parse_int(digits);
}

namespace {

struct Row {
    std::vector<std::string> cells;
    std::size_t line = 0;
    std::size_t value_col = 1;
};

std::string row_key(std::string_view name) {
    auto t = std::string(util::trim(name));
    while (!t.empty() && t.back() == '*') t.pop_back();
    return util::to_lower(util::trim(t));
}

// Collects table rows keyed by lowercase name; first occurrence wins.
std::map<std::string, Row> table_rows(std::string_view text, std::string_view value_header) {
    std::map<std::string, Row> rows;
    std::size_t value_col = 1;
    std::size_t line_no = 0;
    for (const auto& raw : util::split_lines(text)) {
        ++line_no;
        auto line = util::trim(raw);
        if (line.empty() || line.front() != '|') continue;
        std::vector<std::string> cells;
        std::size_t start = 1;
        while (start <= line.size()) {
            auto bar = line.find('|', start);
            if (bar == std::string_view::npos) {
                auto tail = util::trim(line.substr(start));
                if (!tail.empty()) cells.emplace_back(tail);
                break;
            }
            cells.emplace_back(util::trim(line.substr(start, bar - start)));
            start = bar + 1;
        }
        if (cells.empty()) continue;
        bool header = false;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (util::iequals(cells[i], value_header)) {
                value_col = i;
                header = true;
            }
        }
        if (header) continue;
        auto key = row_key(cells[0]);
        if (key.empty() || rows.count(key)) continue;
        rows[key] = Row{std::move(cells), line_no, value_col};
    }
    return rows;
}

const Row& require_row(const std::map<std::string, Row>& rows,
                       std::initializer_list<std::string_view> names) {
    for (auto n : names)
        if (auto it = rows.find(util::to_lower(n)); it != rows.end()) return it->second;
    throw ReportError("report is missing row '" + std::string(*names.begin()) + "'",
                      std::string(*names.begin()));
}

std::string value_cell(const Row& row, std::string_view name) {
    if (row.value_col >= row.cells.size() || row.cells[row.value_col].empty())
        throw ReportError("row '" + std::string(name) + "' has no value", std::string(name),
                          {row.line, 1});
    return row.cells[row.value_col];
}

long long int_row(const std::map<std::string, Row>& rows,
                  std::initializer_list<std::string_view> names, bool round_up = false) {
    const auto& row = require_row(rows, names);
    auto name = *names.begin();
    auto cell = value_cell(row, name);
    if (auto v = parse_grouped_int(cell)) {
        if (*v < 0) throw ReportError("negative count in row '" + std::string(name) + "'", std::string(name), {row.line, 1});
        return *v;
    }
    if (round_up && cell.find(',') == std::string::npos) {
        // Block RAM counts can be half tiles.
        if (auto d = util::parse_double(cell); d && *d >= 0 && std::isfinite(*d))
            return static_cast<long long>(std::ceil(*d));
    }
    throw ReportError("bad count '" + cell + "' in row '" + std::string(name) + "'",
                      std::string(name), {row.line, 1});
}

// Parses a value cell with an optional unit, either inside the cell or in the next one.
double scaled_row(const std::map<std::string, Row>& rows, std::string_view name,
                  const std::map<std::string, double>& units) {
    const auto& row = require_row(rows, {name});
    auto words = util::split_ws(value_cell(row, name));
    std::string number = words.empty() ? "" : words[0];
    std::string unit = words.size() > 1 ? words[1] : "";
    if (unit.empty()) {
        // "1.000ns"
        for (const auto& [u, _] : units) {
            if (number.size() > u.size() && number.compare(number.size() - u.size(), u.size(), u) == 0 &&
                !std::isalpha(static_cast<unsigned char>(number[number.size() - u.size() - 1]))) {
                unit = u;
                number.resize(number.size() - u.size());
                break;
            }
        }
    }
    if (unit.empty() && row.value_col + 1 < row.cells.size() && units.count(row.cells[row.value_col + 1]))
        unit = row.cells[row.value_col + 1];
    if (number.find(',') != std::string::npos)
        throw ReportError("decimal comma in row '" + std::string(name) + "'", std::string(name), {row.line, 1});
    auto v = util::parse_double(number);
    if (!v || !std::isfinite(*v) || *v < 0 || words.size() > 2)
        throw ReportError("bad value in row '" + std::string(name) + "'", std::string(name), {row.line, 1});
    double factor = 1.0;
    if (!unit.empty()) {
        auto it = units.find(unit);
        if (it == units.end())
            throw ReportError("unknown unit '" + unit + "' in row '" + std::string(name) + "'",
                              std::string(name), {row.line, 1});
        factor = it->second;
    }
    return *v * factor;
}

bool additive(double total, double a, double b) {
    if (total == 0.0) return std::abs(a + b) < 1e-12;
    return std::abs(a + b - total) <= 0.01 * std::abs(total);
}

} // namespace

UtilizationReport parse_utilization(std::string_view text) {
    auto rows = table_rows(text, "Used");
    UtilizationReport r;
    r.lut = int_row(rows, {"Slice LUTs", "CLB LUTs"});
    r.ff = int_row(rows, {"Slice Registers", "CLB Registers"});
    r.bram = int_row(rows, {"Block RAM Tile"}, true);
    r.dsp = int_row(rows, {"DSPs"});
    r.io = int_row(rows, {"Bonded IOB"});
    return r;
}

TimingReport parse_timing(std::string_view text) {
    auto rows = table_rows(text, "Value");
    static const std::map<std::string, double> units{{"ns", 1.0}, {"ps", 1e-3}};
    TimingReport r;
    r.data_path_ns = scaled_row(rows, "Data Path Delay", units);
    r.logic_ns = scaled_row(rows, "Logic Delay", units);
    r.route_ns = scaled_row(rows, "Route Delay", units);
    r.achieved_period_ns = scaled_row(rows, "Achieved Period", units);
    if (!(r.achieved_period_ns > 0))
        throw ReportError("achieved period must be positive", "Achieved Period",
                          {rows.at("achieved period").line, 1});
    if (!additive(r.data_path_ns, r.logic_ns, r.route_ns))
        throw ReportError("logic + route delay does not add up to the data path delay",
                          "Data Path Delay", {rows.at("data path delay").line, 1});
    return r;
}

PowerReport parse_power(std::string_view text) {
    auto rows = table_rows(text, "Value");
    static const std::map<std::string, double> units{{"W", 1.0}, {"mW", 1e-3}};
    PowerReport r;
    r.total_w = scaled_row(rows, "Total On-Chip Power (W)", units);
    r.dynamic_w = scaled_row(rows, "Dynamic (W)", units);
    r.static_w = scaled_row(rows, "Device Static (W)", units);
    if (!additive(r.total_w, r.dynamic_w, r.static_w))
        throw ReportError("dynamic + static power does not add up to the total",
                          "Total On-Chip Power (W)", {rows.at("total on-chip power (w)").line, 1});
    return r;
}

namespace {

std::string table(const std::string& title, const std::vector<std::string>& header,
                  const std::vector<std::vector<std::string>>& body) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
    for (const auto& r : body)
        for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
    std::string rule = "+";
    for (auto w : width) rule += std::string(w + 2, '-') + "+";
    auto line = [&](const std::vector<std::string>& cells) {
        std::string s = "|";
        for (std::size_t i = 0; i < cells.size(); ++i)
            s += " " + cells[i] + std::string(width[i] - cells[i].size(), ' ') + " |";
        return s + "\n";
    };
    std::string out = title + "\n" + std::string(title.size(), '-') + "\n\n" + rule + "\n" + line(header) + rule + "\n";
    for (const auto& r : body) out += line(r);
    return out + rule + "\n";
}

} // namespace

std::string write_utilization(const UtilizationReport& r) {
    auto row = [](const char* name, long long used, long long avail) {
        double pct = avail > 0 ? 100.0 * static_cast<double>(used) / static_cast<double>(avail) : 0.0;
        return std::vector<std::string>{name, std::to_string(used), "0", "0", std::to_string(avail),
                                        util::fixed(pct, 2)};
    };
    std::string out = "Utilization Design Information\n\n";
    out += table("1. Slice Logic", {"Site Type", "Used", "Fixed", "Prohibited", "Available", "Util%"},
                 {row("Slice LUTs", r.lut, 53200), row("  LUT as Logic", r.lut, 53200),
                  row("Slice Registers", r.ff, 106400)});
    out += "\n" + table("2. Memory", {"Site Type", "Used", "Fixed", "Prohibited", "Available", "Util%"},
                        {row("Block RAM Tile", r.bram, 140)});
    out += "\n" + table("3. DSP", {"Site Type", "Used", "Fixed", "Prohibited", "Available", "Util%"},
                        {row("DSPs", r.dsp, 220)});
    out += "\n" + table("4. IO and GT Specific", {"Site Type", "Used", "Fixed", "Prohibited", "Available", "Util%"},
                        {row("Bonded IOB", r.io, 125)});
    return out;
}

std::string write_timing(const TimingReport& r) {
    return "Timing Summary\n\n" +
           table("Worst Path", {"Metric", "Value"},
                 {{"Data Path Delay", util::fixed(r.data_path_ns, 3) + " ns"},
                  {"Logic Delay", util::fixed(r.logic_ns, 3) + " ns"},
                  {"Route Delay", util::fixed(r.route_ns, 3) + " ns"},
                  {"Achieved Period", util::fixed(r.achieved_period_ns, 3) + " ns"}});
}

std::string write_power(const PowerReport& r) {
    return "Power Report\n\n" +
           table("1. Summary", {"Metric", "Value"},
                 {{"Total On-Chip Power (W)", util::fixed(r.total_w, 3)},
                  {"Dynamic (W)", util::fixed(r.dynamic_w, 3)},
                  {"Device Static (W)", util::fixed(r.static_w, 3)}});
}

LogDigest scan_log(std::string_view text) {
    LogDigest d;
    auto lines = util::split_lines(text);
    auto kind_of = [](std::string_view t) -> int {
        if (t.substr(0, 6) == "ERROR:") return 1;
        if (t.substr(0, 17) == "CRITICAL WARNING:") return 2;
        return 0;
    };
    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto t = util::trim(lines[i]);
        int kind = kind_of(t);
        if (!kind) continue;
        LogEntry e;
        e.line = i + 1;
        auto rest = util::trim(t.substr(kind == 1 ? 6 : 17));
        if (!rest.empty() && rest.front() == '[') {
            auto close = rest.find(']');
            if (close != std::string_view::npos) {
                e.code = std::string(rest.substr(1, close - 1));
                rest = util::trim(rest.substr(close + 1));
            }
        }
        if (!rest.empty() && rest.back() == ']') {
            auto open = rest.rfind('[');
            if (open != std::string_view::npos) {
                auto inner = rest.substr(open + 1, rest.size() - open - 2);
                auto colon = inner.rfind(':');
                if (colon != std::string_view::npos && colon + 1 < inner.size() &&
                    util::parse_int(inner.substr(colon + 1))) {
                    e.location = std::string(inner);
                    rest = util::trim(rest.substr(0, open));
                }
            }
        }
        e.message = std::string(rest);
        if (i + 1 < lines.size()) {
            auto next = util::trim(lines[i + 1]);
            if (!kind_of(next)) e.context = std::string(next);
        }
        (kind == 1 ? d.errors : d.critical_warnings).push_back(std::move(e));
    }
    return d;
}

void to_json(nlohmann::json& j, const UtilizationReport& r) {
    j = {{"lut", r.lut}, {"ff", r.ff}, {"bram", r.bram}, {"dsp", r.dsp}, {"io", r.io}};
}

void from_json(const nlohmann::json& j, UtilizationReport& r) {
    r.lut = j.at("lut").get<long long>();
    r.ff = j.at("ff").get<long long>();
    r.bram = j.at("bram").get<long long>();
    r.dsp = j.at("dsp").get<long long>();
    r.io = j.at("io").get<long long>();
}

void to_json(nlohmann::json& j, const TimingReport& r) {
    j = {{"data_path_ns", r.data_path_ns}, {"logic_ns", r.logic_ns},
         {"route_ns", r.route_ns}, {"achieved_period_ns", r.achieved_period_ns}};
}

void from_json(const nlohmann::json& j, TimingReport& r) {
    r.data_path_ns = j.at("data_path_ns").get<double>();
    r.logic_ns = j.at("logic_ns").get<double>();
    r.route_ns = j.at("route_ns").get<double>();
    r.achieved_period_ns = j.at("achieved_period_ns").get<double>();
}

void to_json(nlohmann::json& j, const PowerReport& r) {
    j = {{"total_w", r.total_w}, {"dynamic_w", r.dynamic_w}, {"static_w", r.static_w}};
}

void from_json(const nlohmann::json& j, PowerReport& r) {
    r.total_w = j.at("total_w").get<double>();
    r.dynamic_w = j.at("dynamic_w").get<double>();
    r.static_w = j.at("static_w").get<double>();
}

void to_json(nlohmann::json& j, const LogEntry& e) {
    j = {{"code", e.code}, {"message", e.message}, {"context", e.context}, {"line", e.line}};
    j["location"] = e.location ? nlohmann::json(*e.location) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, LogEntry& e) {
    e.code = j.value("code", std::string{});
    e.message = j.value("message", std::string{});
    e.context = j.value("context", std::string{});
    e.line = j.value("line", std::size_t{0});
    e.location.reset();
    if (j.contains("location") && j.at("location").is_string()) e.location = j.at("location").get<std::string>();
}

void to_json(nlohmann::json& j, const LogDigest& d) {
    j = {{"errors", d.errors}, {"critical_warnings", d.critical_warnings}};
}

void from_json(const nlohmann::json& j, LogDigest& d) {
    d.errors = j.value("errors", std::vector<LogEntry>{});
    d.critical_warnings = j.value("critical_warnings", std::vector<LogEntry>{});
}

} // namespace edaloop::reports
