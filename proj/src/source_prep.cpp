#include "edaloop/source_prep.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <optional>
#include <set>

#include "edaloop/errors.hpp"
#include "edaloop/util.hpp"

namespace edaloop::source {

void SourceBundle::validate() const {
    if (files.empty()) throw ConfigError("source bundle has no files");
    for (const auto& [name, _] : files) {
        if (name.empty() || name == "." || name == ".." ||
            name.find_first_of("/\\") != std::string::npos)
            throw ConfigError("bad source file name '" + name + "'");
    }
}

// ---------------------------------------------------------------- extraction

namespace {

struct Fenced {
    std::string tag;
    std::string body;
};

std::vector<Fenced> fenced_blocks(std::string_view response) {
    std::vector<Fenced> out;
    std::optional<Fenced> open;
    for (const auto& line : util::split_lines(response)) {
        auto t = util::trim(line);
        if (t.substr(0, 3) == "```") {
            if (open) {
                out.push_back(std::move(*open));
                open.reset();
            } else {
                open = Fenced{util::to_lower(util::trim(t.substr(3))), ""};
            }
            continue;
        }
        if (open) open->body += line + "\n";
    }
    // A reply cut off mid-block still carries usable code.
    if (open) out.push_back(std::move(*open));
    return out;
}

bool tag_matches(std::string_view tag, BlockKind kind) {
    auto first = util::split_ws(tag);
    if (first.empty()) return false;
    static const std::set<std::string> verilog{"verilog", "v", "sv", "systemverilog"};
    static const std::set<std::string> net{"spice", "netlist", "spectre", "ads", "scs", "cir", "sp"};
    return kind == BlockKind::verilog ? verilog.count(first[0]) > 0 : net.count(first[0]) > 0;
}

bool has_module_line(std::string_view body) {
    for (const auto& line : util::split_lines(body)) {
        auto words = util::split_ws(line);
        if (!words.empty() && (words[0] == "module" || words[0].rfind("module(", 0) == 0))
            return true;
    }
    return false;
}

bool looks_like_netlist(std::string_view body) {
    if (has_module_line(body)) return false;
    for (const auto& line : util::split_lines(body)) {
        auto t = util::trim(line);
        if (t.empty()) continue;
        if (t.substr(0, 2) == "//" || t.front() == '*' || t.front() == '.' || t.front() == '#')
            return true;
        auto words = util::split_ws(t);
        const auto& w = words[0];
        if (w == "simulator" || w == "include" || w == "parameters" || w == "global" ||
            util::iequals(w, "Options"))
            return true;
        auto colon = w.find(':');
        if (colon != std::string::npos && colon > 0 && colon + 1 < w.size()) return true;
        if (words.size() >= 3 && std::isalpha(static_cast<unsigned char>(w[0])) &&
            (t.find('(') != std::string_view::npos || t.find('=') != std::string_view::npos ||
             std::string_view("RCLVIMrclvim").find(w[0]) != std::string_view::npos))
            return true;
        return false;
    }
    return false;
}

bool signature_matches(std::string_view body, BlockKind kind) {
    return kind == BlockKind::verilog ? has_module_line(body) : looks_like_netlist(body);
}

} // namespace

std::string extract_code_block(std::string_view response, BlockKind kind) {
    auto blocks = fenced_blocks(response);
    for (const auto& b : blocks)
        if (tag_matches(b.tag, kind) && !util::trim(b.body).empty()) return b.body;
    for (const auto& b : blocks)
        if (b.tag.empty() || !tag_matches(b.tag, kind == BlockKind::verilog ? BlockKind::netlist
                                                                           : BlockKind::verilog))
            if (signature_matches(b.body, kind)) return b.body;

    if (kind == BlockKind::verilog) {
        auto lines = util::split_lines(response);
        std::size_t begin = lines.size();
        for (std::size_t i = 0; i < lines.size(); ++i) {
            auto words = util::split_ws(lines[i]);
            if (begin == lines.size()) {
                if (!words.empty() && (words[0] == "module" || words[0].rfind("module(", 0) == 0))
                    begin = i;
                continue;
            }
            if (!words.empty() && words[0].rfind("endmodule", 0) == 0) {
                std::string out;
                for (std::size_t k = begin; k <= i; ++k) out += lines[k] + "\n";
                return out;
            }
        }
    }
    throw ExtractionError(kind == BlockKind::verilog ? "no Verilog block found in response"
                                                     : "no netlist block found in response");
}

// ---------------------------------------------------------------- repair

namespace {

bool replace_all(std::string& s, std::string_view from, std::string_view to) {
    bool changed = false;
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
        changed = true;
    }
    return changed;
}

// Byte offset where the comment part of a line starts, or npos.
std::size_t comment_start(std::string_view line) {
    auto t = util::trim(line);
    if (!t.empty() && t.front() == '*') return static_cast<std::size_t>(t.data() - line.data());
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (!in_string && line[i] == '/' && i + 1 < line.size() && line[i + 1] == '/') return i;
    }
    return std::string_view::npos;
}

bool rule_whitespace(std::string& line) {
    auto end = line.find_last_not_of(" \t\r");
    std::size_t keep = end == std::string::npos ? 0 : end + 1;
    if (keep == line.size()) return false;
    line.resize(keep);
    return true;
}

bool rule_characters(std::string& line) {
    bool changed = false;
    changed |= replace_all(line, "\xC2\xB5", "u");   // micro sign
    changed |= replace_all(line, "\xCE\xBC", "u");   // greek mu
    changed |= replace_all(line, "\xE2\x80\x9C", "\"");
    changed |= replace_all(line, "\xE2\x80\x9D", "\"");
    changed |= replace_all(line, "\xE2\x80\x98", "'");
    changed |= replace_all(line, "\xE2\x80\x99", "'");
    return changed;
}

bool rule_equals_spacing(std::string& code) {
    std::string out;
    out.reserve(code.size());
    bool changed = false;
    bool in_string = false;
    for (std::size_t i = 0; i < code.size(); ++i) {
        char c = code[i];
        if (c == '"') in_string = !in_string;
        if (!in_string && c == '=') {
            while (!out.empty() && (out.back() == ' ' || out.back() == '\t')) {
                out.pop_back();
                changed = true;
            }
            out += '=';
            std::size_t j = i + 1;
            while (j < code.size() && (code[j] == ' ' || code[j] == '\t')) ++j;
            if (j != i + 1) changed = true;
            i = j - 1;
            continue;
        }
        out += c;
    }
    if (changed) code = std::move(out);
    return changed;
}

bool rule_trailing_comma(std::string& code) {
    bool changed = false;
    for (std::size_t i = 0; i < code.size(); ++i) {
        if (code[i] != ',') continue;
        std::size_t j = i + 1;
        while (j < code.size() && (code[j] == ' ' || code[j] == '\t')) ++j;
        if (j == code.size() || code[j] == ')') {
            code.erase(i, 1);
            changed = true;
            --i;
        }
    }
    return changed;
}

bool rule_trailing_semicolon(std::string& code) {
    auto end = code.find_last_not_of(" \t");
    if (end == std::string::npos || code[end] != ';') return false;
    code.erase(end, 1);
    return true;
}

bool is_boundary(char c) { return c == ' ' || c == '\t' || c == '=' || c == '(' || c == ','; }

bool rule_unit_split(std::string& code) {
    static const std::array<std::string_view, 8> units{"kHz", "MHz", "GHz", "Hz", "mil", "mm", "um", "nm"};
    bool changed = false;
    std::size_t i = 0;
    while (i < code.size()) {
        if (!(i == 0 || is_boundary(code[i - 1])) ||
            !(std::isdigit(static_cast<unsigned char>(code[i])) || code[i] == '.' ||
              ((code[i] == '-' || code[i] == '+') && i + 1 < code.size() &&
               (std::isdigit(static_cast<unsigned char>(code[i + 1])) || code[i + 1] == '.')))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        if (code[j] == '-' || code[j] == '+') ++j;
        bool digit = false;
        while (j < code.size() && (std::isdigit(static_cast<unsigned char>(code[j])) || code[j] == '.')) {
            digit |= code[j] != '.';
            ++j;
        }
        if (digit && j + 1 < code.size() && (code[j] == 'e' || code[j] == 'E')) {
            std::size_t k = j + 1;
            if (code[k] == '-' || code[k] == '+') ++k;
            if (k < code.size() && std::isdigit(static_cast<unsigned char>(code[k]))) {
                while (k < code.size() && std::isdigit(static_cast<unsigned char>(code[k]))) ++k;
                j = k;
            }
        }
        if (!digit) {
            i = j + 1;
            continue;
        }
        for (auto u : units) {
            if (code.compare(j, u.size(), u) != 0) continue;
            std::size_t after = j + u.size();
            if (after < code.size() && code[after] != ' ' && code[after] != '\t' &&
                code[after] != ')' && code[after] != ',')
                continue;
            code.insert(j, " ");
            changed = true;
            j += 1 + u.size();
            break;
        }
        i = j;
        while (i < code.size() && !is_boundary(code[i])) ++i;
    }
    return changed;
}

} // namespace

RepairResult repair_syntax(std::string_view text, netlist::Dialect dialect) {
    (void)dialect;
    RepairResult result;
    auto lines = util::split_lines(text);
    static const std::array<const char*, 6> names{
        "trailing whitespace", "non-ASCII character", "spaces around '='",
        "trailing comma", "trailing semicolon", "unit suffix split"};

    for (std::size_t n = 0; n < lines.size(); ++n) {
        std::string& line = lines[n];
        std::array<bool, 6> applied{};
        for (int pass = 0; pass < 16; ++pass) {
            const std::string before = line;
            applied[0] |= rule_whitespace(line);
            applied[1] |= rule_characters(line);

            auto cut = comment_start(line);
            std::string code = line.substr(0, cut == std::string::npos ? line.size() : cut);
            std::string comment = cut == std::string::npos ? "" : line.substr(cut);
            auto lead = util::trim(code);
            if (!lead.empty()) {
                applied[2] |= rule_equals_spacing(code);
                applied[3] |= rule_trailing_comma(code);
                applied[4] |= rule_trailing_semicolon(code);
                applied[5] |= rule_unit_split(code);
            }
            line = code + comment;
            if (line == before) break;
        }
        for (std::size_t r = 0; r < names.size(); ++r)
            if (applied[r]) result.repairs.push_back("line " + std::to_string(n + 1) + ": " + names[r]);
    }
    result.text = util::join(lines, "\n");
    if (!text.empty() && (text.back() == '\n')) result.text += "\n";
    return result;
}

// ---------------------------------------------------------------- PDK binding

nlohmann::json to_json(const PdkBinding& binding) {
    return {{"model_includes", binding.model_includes},
            {"device_map", binding.device_map},
            {"corner", binding.corner}};
}

PdkBinding binding_from_json(const nlohmann::json& j) {
    try {
        PdkBinding b;
        b.model_includes = j.value("model_includes", std::vector<std::string>{});
        b.device_map = j.value("device_map", std::map<std::string, std::string>{});
        b.corner = j.value("corner", std::string{});
        return b;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad PDK binding: ") + e.what());
    }
}

bool is_primitive_master(std::string_view master) {
    return master.empty() || master == "resistor" || master == "capacitor" ||
           master == "inductor" || master == "vsource" || master == "isource";
}

std::string bind_pdk(std::string_view netlist_text, netlist::Dialect dialect,
                     const PdkBinding& binding) {
    auto nl = netlist::parse(netlist_text, dialect);

    std::set<std::string> bound_names;
    for (const auto& [_, model] : binding.device_map) bound_names.insert(model);

    // (line, column) -> replacement, applied right to left within each line.
    std::map<std::pair<std::size_t, std::size_t>, std::pair<std::size_t, std::string>> edits;
    if (dialect == netlist::Dialect::spectre_like) {
        for (const auto& c : nl.components) {
            if (is_primitive_master(c.master)) continue;
            auto it = binding.device_map.find(c.master);
            if (it == binding.device_map.end()) {
                if (bound_names.count(c.master)) continue;
                throw BindingError(c.master);
            }
            edits[{c.master_where.line, c.master_where.column}] = {c.master.size(), it->second};
        }
    }

    auto lines = util::split_lines(netlist_text);
    for (auto it = edits.rbegin(); it != edits.rend(); ++it) {
        auto [line, col] = it->first;
        lines.at(line - 1).replace(col - 1, it->second.first, it->second.second);
    }

    std::string out;
    for (auto inc : binding.model_includes) {
        replace_all(inc, "{corner}", binding.corner);
        out += inc + "\n";
    }
    std::string body = util::join(lines, "\n");
    if (!netlist_text.empty() && netlist_text.back() == '\n') body += "\n";
    return out + body;
}

// ---------------------------------------------------------------- module header

std::string_view to_string(PortDirection dir) {
    switch (dir) {
    case PortDirection::input: return "input";
    case PortDirection::output: return "output";
    case PortDirection::inout: return "inout";
    }
    return "input";
}

const Port* ModuleHeader::port(std::string_view name) const {
    for (const auto& p : ports)
        if (p.name == name) return &p;
    return nullptr;
}

namespace {

std::string strip_comments(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '/' && i + 1 < text.size() && text[i + 1] == '/') {
            while (i < text.size() && text[i] != '\n') ++i;
            out += '\n';
        } else if (text[i] == '/' && i + 1 < text.size() && text[i + 1] == '*') {
            auto end = text.find("*/", i + 2);
            if (end == std::string_view::npos) throw HeaderError("unterminated block comment");
            out += ' ';
            i = end + 1;
        } else if (text[i] == '"') {
            auto end = text.find('"', i + 1);
            if (end == std::string_view::npos) end = text.size() - 1;
            out += "\"\"";
            i = end;
        } else {
            out += text[i];
        }
    }
    return out;
}

struct VTok {
    std::string text;
    bool ident = false;
    bool number = false;
};

std::vector<VTok> vlex(std::string_view s) {
    std::vector<VTok> out;
    std::size_t i = 0;
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        if (std::isspace(c)) {
            ++i;
        } else if (std::isalpha(c) || c == '_' || c == '$' || c == '`' || c == '\\') {
            std::size_t j = i + 1;
            if (c == '\\') {
                while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
            } else {
                while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_' || s[j] == '$')) ++j;
            }
            out.push_back({std::string(s.substr(i, j - i)), true, false});
            i = j;
        } else if (std::isdigit(c)) {
            std::size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '\'' || s[j] == '_')) ++j;
            out.push_back({std::string(s.substr(i, j - i)), false, true});
            i = j;
        } else {
            out.push_back({std::string(1, static_cast<char>(c)), false, false});
            ++i;
        }
    }
    return out;
}

std::optional<PortDirection> direction_of(std::string_view w) {
    if (w == "input") return PortDirection::input;
    if (w == "output") return PortDirection::output;
    if (w == "inout") return PortDirection::inout;
    return std::nullopt;
}

bool is_type_word(std::string_view w) {
    return w == "wire" || w == "reg" || w == "logic" || w == "signed" || w == "unsigned" ||
           w == "tri" || w == "var" || w == "integer" || w == "bit";
}

long long number_value(std::string_view t) {
    // Plain decimal or sized literal such as 8'd255 / 4'hF.
    std::string s;
    for (char c : t)
        if (c != '_') s += c;
    auto tick = s.find('\'');
    if (tick == std::string::npos) {
        auto v = util::parse_int(s);
        if (!v) throw HeaderError("bad number '" + std::string(t) + "'");
        return *v;
    }
    std::string digits = s.substr(tick + 1);
    if (!digits.empty() && (digits[0] == 's' || digits[0] == 'S')) digits.erase(0, 1);
    if (digits.empty()) throw HeaderError("bad number '" + std::string(t) + "'");
    int base = 10;
    switch (std::tolower(static_cast<unsigned char>(digits[0]))) {
    case 'b': base = 2; break;
    case 'o': base = 8; break;
    case 'h': base = 16; break;
    case 'd': base = 10; break;
    default: throw HeaderError("bad number '" + std::string(t) + "'");
    }
    try {
        return std::stoll(digits.substr(1), nullptr, base);
    } catch (const std::exception&) {
        throw HeaderError("bad number '" + std::string(t) + "'");
    }
}

// Integer expression evaluator for ranges and parameter values.
class ExprEval {
public:
    ExprEval(const std::vector<VTok>& toks, std::size_t begin, std::size_t end,
             const std::map<std::string, long long>& params)
        : t_(toks), pos_(begin), end_(end), params_(params) {}

    long long run() {
        auto v = sum();
        if (pos_ != end_) throw HeaderError("unexpected '" + t_[pos_].text + "' in expression");
        return v;
    }

private:
    bool at(std::string_view s) const { return pos_ < end_ && t_[pos_].text == s; }

    long long sum() {
        auto v = product();
        while (at("+") || at("-")) {
            bool plus = t_[pos_++].text == "+";
            auto r = product();
            v = plus ? v + r : v - r;
        }
        return v;
    }

    long long product() {
        auto v = unary();
        while (at("*") || at("/") || at("%")) {
            char op = t_[pos_++].text[0];
            auto r = unary();
            if (op == '*') v *= r;
            else if (r == 0) throw HeaderError("division by zero in range");
            else v = op == '/' ? v / r : v % r;
        }
        return v;
    }

    long long unary() {
        if (at("-")) {
            ++pos_;
            return -unary();
        }
        if (at("+")) {
            ++pos_;
            return unary();
        }
        return primary();
    }

    long long primary() {
        if (pos_ >= end_) throw HeaderError("incomplete expression");
        const auto& tok = t_[pos_++];
        if (tok.text == "(") {
            auto v = sum();
            if (!at(")")) throw HeaderError("missing ')' in expression");
            ++pos_;
            return v;
        }
        if (tok.number) return number_value(tok.text);
        if (tok.ident) {
            if (auto it = params_.find(tok.text); it != params_.end()) return it->second;
            throw HeaderError("unknown parameter '" + tok.text + "'");
        }
        throw HeaderError("unexpected '" + tok.text + "' in expression");
    }

    const std::vector<VTok>& t_;
    std::size_t pos_;
    std::size_t end_;
    const std::map<std::string, long long>& params_;
};

std::size_t matching(const std::vector<VTok>& t, std::size_t open, std::string_view o,
                     std::string_view c) {
    int depth = 0;
    for (std::size_t i = open; i < t.size(); ++i) {
        if (t[i].text == o) ++depth;
        else if (t[i].text == c && --depth == 0) return i;
    }
    throw HeaderError("missing closing '" + std::string(c) + "'");
}

// Parses "[H:L]" starting at `i`; returns width and advances past ']'.
int parse_range(const std::vector<VTok>& t, std::size_t& i,
                const std::map<std::string, long long>& params) {
    std::size_t close = matching(t, i, "[", "]");
    std::size_t colon = i + 1;
    int depth = 0;
    for (; colon < close; ++colon) {
        if (t[colon].text == "(" || t[colon].text == "[") ++depth;
        if (t[colon].text == ")" || t[colon].text == "]") --depth;
        if (depth == 0 && t[colon].text == ":") break;
    }
    if (colon == close) throw HeaderError("port range needs ':'");
    auto hi = ExprEval(t, i + 1, colon, params).run();
    auto lo = ExprEval(t, colon + 1, close, params).run();
    i = close + 1;
    auto w = (hi >= lo ? hi - lo : lo - hi) + 1;
    if (w < 1 || w > 1'000'000) throw HeaderError("unreasonable port width");
    return static_cast<int>(w);
}

// Reads "NAME = expr" assignments separated by commas up to `end`.
void read_param_assignments(const std::vector<VTok>& t, std::size_t i, std::size_t end,
                            std::map<std::string, long long>& params) {
    while (i < end) {
        if (t[i].text == "parameter" || t[i].text == "localparam" || t[i].text == "integer" ||
            t[i].text == "," || is_type_word(t[i].text)) {
            ++i;
            continue;
        }
        if (t[i].text == "[") {
            matching(t, i, "[", "]");
            i = matching(t, i, "[", "]") + 1;
            continue;
        }
        if (!t[i].ident || i + 1 >= end || t[i + 1].text != "=")
            throw HeaderError("malformed parameter declaration near '" + t[i].text + "'");
        std::string name = t[i].text;
        std::size_t j = i + 2;
        int depth = 0;
        while (j < end && !(depth == 0 && t[j].text == ",")) {
            if (t[j].text == "(") ++depth;
            if (t[j].text == ")") --depth;
            ++j;
        }
        try {
            params[name] = ExprEval(t, i + 2, j, params).run();
        } catch (const HeaderError&) {
            // Non-integer parameters (strings, reals) cannot size ports; skip them.
        }
        i = j;
    }
}

} // namespace

ModuleHeader extract_module_header(std::string_view verilog_text) {
    auto toks = vlex(strip_comments(verilog_text));
    std::vector<std::size_t> starts;
    for (std::size_t i = 0; i < toks.size(); ++i)
        if (toks[i].text == "module" || toks[i].text == "macromodule") starts.push_back(i);
    if (starts.empty()) throw HeaderError("no module declaration found");
    if (starts.size() > 1) throw HeaderError("expected one module declaration, found " +
                                             std::to_string(starts.size()));

    std::size_t i = starts[0] + 1;
    if (i >= toks.size() || !toks[i].ident) throw HeaderError("module name missing");
    ModuleHeader h;
    h.module_name = toks[i++].text;

    std::map<std::string, long long> params;
    if (i < toks.size() && toks[i].text == "#") {
        ++i;
        if (i >= toks.size() || toks[i].text != "(") throw HeaderError("expected '(' after '#'");
        std::size_t close = matching(toks, i, "(", ")");
        read_param_assignments(toks, i + 1, close, params);
        i = close + 1;
    }

    std::size_t body_begin = i;
    std::vector<std::string> nonansi;
    if (i < toks.size() && toks[i].text == "(") {
        std::size_t close = matching(toks, i, "(", ")");
        std::size_t k = i + 1;
        std::optional<PortDirection> dir;
        int width = 1;
        bool ansi = false;
        while (k < close) {
            if (auto d = direction_of(toks[k].text)) {
                dir = d;
                width = 1;
                ansi = true;
                ++k;
                continue;
            }
            if (is_type_word(toks[k].text)) {
                ++k;
                continue;
            }
            if (toks[k].text == "[") {
                width = parse_range(toks, k, params);
                continue;
            }
            if (toks[k].ident) {
                if (ansi) {
                    if (!dir) throw HeaderError("port '" + toks[k].text + "' has no direction");
                    h.ports.push_back({*dir, width, toks[k].text});
                } else {
                    nonansi.push_back(toks[k].text);
                }
                ++k;
                if (k < close && toks[k].text == "[")
                    throw HeaderError("unpacked array ports are not supported");
                if (k < close && toks[k].text != ",")
                    throw HeaderError("expected ',' after port '" + toks[k - 1].text + "'");
                if (k < close) {
                    ++k;
                    if (k == close) throw HeaderError("trailing ',' in port list");
                }
                continue;
            }
            throw HeaderError("unexpected '" + toks[k].text + "' in port list");
        }
        if (ansi && !nonansi.empty()) throw HeaderError("mixed ANSI and non-ANSI port list");
        body_begin = close + 1;
    }
    if (body_begin >= toks.size() || toks[body_begin].text != ";")
        throw HeaderError("expected ';' after module header");

    if (!nonansi.empty()) {
        std::map<std::string, Port> declared;
        std::size_t k = body_begin + 1;
        while (k < toks.size() && toks[k].text != "endmodule") {
            if (toks[k].text == "parameter" || toks[k].text == "localparam") {
                std::size_t semi = k;
                while (semi < toks.size() && toks[semi].text != ";") ++semi;
                read_param_assignments(toks, k, semi, params);
                k = semi + 1;
                continue;
            }
            auto d = direction_of(toks[k].text);
            if (!d) {
                ++k;
                continue;
            }
            ++k;
            int width = 1;
            while (k < toks.size() && toks[k].text != ";") {
                if (is_type_word(toks[k].text) || toks[k].text == ",") {
                    ++k;
                } else if (toks[k].text == "[") {
                    width = parse_range(toks, k, params);
                } else if (toks[k].ident) {
                    declared[toks[k].text] = Port{*d, width, toks[k].text};
                    ++k;
                } else {
                    throw HeaderError("unexpected '" + toks[k].text + "' in port declaration");
                }
            }
            ++k;
        }
        for (const auto& name : nonansi) {
            auto it = declared.find(name);
            if (it == declared.end()) throw HeaderError("port '" + name + "' has no direction declaration");
            h.ports.push_back(it->second);
        }
    }

    std::set<std::string> seen;
    for (const auto& p : h.ports)
        if (!seen.insert(p.name).second) throw HeaderError("duplicate port '" + p.name + "'");
    return h;
}

std::string print_module_header(const ModuleHeader& header) {
    if (header.ports.empty()) return "module " + header.module_name + " ();";
    std::string out = "module " + header.module_name + " (\n";
    for (std::size_t i = 0; i < header.ports.size(); ++i) {
        const auto& p = header.ports[i];
        out += "    " + std::string(to_string(p.direction));
        if (p.width > 1) out += " [" + std::to_string(p.width - 1) + ":0]";
        out += " " + p.name;
        out += i + 1 < header.ports.size() ? ",\n" : "\n";
    }
    return out + ");";
}

nlohmann::json to_json(const ModuleHeader& header) {
    nlohmann::json ports = nlohmann::json::array();
    for (const auto& p : header.ports)
        ports.push_back({{"direction", to_string(p.direction)}, {"width", p.width}, {"name", p.name}});
    return {{"module_name", header.module_name}, {"ports", ports}};
}

// ---------------------------------------------------------------- constraints

namespace {

bool valid_port_name(std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    std::size_t i = 1;
    while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
    if (i == s.size()) return true;
    if (s[i] != '[' || s.back() != ']') return false;
    return util::parse_int(s.substr(i + 1, s.size() - i - 2)).has_value();
}

std::optional<double> period_value(std::string_view s) {
    std::string_view num = s;
    if (num.size() > 2 && num.substr(num.size() - 2) == "ns") num.remove_suffix(2);
    auto v = util::parse_double(num);
    if (!v || !std::isfinite(*v) || *v <= 0) return std::nullopt;
    return v;
}

} // namespace

ClockAttr parse_clock_attr(std::string_view clock_attr) {
    auto words = util::split_ws(clock_attr);
    if (words.empty()) throw ConstraintError("empty clock attribute");
    ClockAttr out;
    std::vector<std::string> positional;
    for (std::size_t i = 0; i < words.size(); ++i) {
        auto& w = words[i];
        auto eq = w.find('=');
        if (eq == std::string::npos) {
            // "1.0 ns" as two words
            if (w == "ns" && !positional.empty()) continue;
            positional.push_back(w);
            continue;
        }
        auto key = util::to_lower(w.substr(0, eq));
        auto val = w.substr(eq + 1);
        if (val.empty() && i + 1 < words.size()) val = words[++i];
        if (i + 1 < words.size() && words[i + 1] == "ns") ++i;
        if (key == "port" || key == "clock" || key == "clk") {
            if (!valid_port_name(val)) throw ConstraintError("bad clock port '" + val + "'");
            out.port = val;
        } else if (key == "period") {
            auto p = period_value(val);
            if (!p) throw ConstraintError("bad clock period '" + val + "'");
            out.period_ns = *p;
        } else {
            throw ConstraintError("unknown clock attribute key '" + key + "'");
        }
    }
    for (const auto& p : positional) {
        if (out.port.empty() && valid_port_name(p)) out.port = p;
        else if (out.period_ns == 0.0 && period_value(p)) out.period_ns = *period_value(p);
        else throw ConstraintError("unexpected clock attribute token '" + p + "'");
    }
    if (out.port.empty()) throw ConstraintError("clock attribute names no port");
    if (out.period_ns <= 0.0) throw ConstraintError("clock attribute names no period");
    return out;
}

std::string clock_attr_for(std::string_view port, double freq_hz) {
    if (!(freq_hz > 0) || !std::isfinite(freq_hz)) throw ConstraintError("clock frequency must be positive");
    return "port=" + std::string(port) + " period=" + util::fixed(1e9 / freq_hz, 3);
}

std::string make_constraints(std::string_view clock_attr) {
    auto c = parse_clock_attr(clock_attr);
    return "create_clock -period " + util::fixed(c.period_ns, 3) + " [get_ports " + c.port + "]";
}

} // namespace edaloop::source
