#include "edaloop/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <unordered_map>

#include "edaloop/util.hpp"

namespace edaloop::netlist {

std::string_view to_string(Dialect dialect) {
    return dialect == Dialect::ads_like ? "ads_like" : "spectre_like";
}

Dialect dialect_from_string(std::string_view text) {
    auto t = util::to_lower(text);
    if (t == "spectre_like" || t == "spectre" || t == "spice") return Dialect::spectre_like;
    if (t == "ads_like" || t == "ads") return Dialect::ads_like;
    throw ConfigError("unknown netlist dialect '" + std::string(text) + "'");
}

std::string_view to_string(DirectiveKind kind) {
    switch (kind) {
    case DirectiveKind::dc: return "dc";
    case DirectiveKind::ac: return "ac";
    case DirectiveKind::tran: return "tran";
    case DirectiveKind::sparams: return "sparams";
    case DirectiveKind::substrate: return "substrate";
    case DirectiveKind::include: return "include";
    case DirectiveKind::parameters: return "parameters";
    case DirectiveKind::model: return "model";
    case DirectiveKind::options: return "options";
    case DirectiveKind::simulator: return "simulator";
    case DirectiveKind::global: return "global";
    case DirectiveKind::end: return "end";
    }
    return "options";
}

bool is_ground(std::string_view net) {
    return net == "0" || util::iequals(net, "gnd") || util::iequals(net, "gnd!");
}

namespace {

const Param* find_param(const std::vector<Param>& params, std::string_view name) {
    for (const auto& p : params)
        if (!p.name.empty() && util::iequals(p.name, name)) return &p;
    return nullptr;
}

} // namespace

const Param* Component::param(std::string_view n) const { return find_param(params, n); }
const Param* Directive::param(std::string_view n) const { return find_param(params, n); }

const Component* Netlist::component(std::string_view name) const {
    for (const auto& c : components)
        if (c.name == name) return &c;
    return nullptr;
}

std::vector<const Directive*> Netlist::directives_of(DirectiveKind kind) const {
    std::vector<const Directive*> out;
    for (const auto& d : directives)
        if (d.kind == kind) out.push_back(&d);
    return out;
}

std::vector<std::string> Netlist::nets() const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& c : components)
        for (const auto& t : c.terminals)
            if (seen.insert(t).second) out.push_back(t);
    return out;
}

std::vector<double> Sweep::grid() const {
    std::vector<double> g;
    if (!(stop >= start)) return g;
    if (per_decade && *per_decade > 0 && start > 0) {
        const double decades = std::log10(stop / start);
        const long n = static_cast<long>(std::floor(decades * static_cast<double>(*per_decade) + 1e-9));
        for (long i = 0; i <= n && i < 10'000'000; ++i)
            g.push_back(start * std::pow(10.0, static_cast<double>(i) / static_cast<double>(*per_decade)));
        if (g.empty() || g.back() < stop * (1 - 1e-12)) g.push_back(stop);
        return g;
    }
    if (points && *points > 0) {
        const long n = std::min<long>(*points, 10'000'000);
        if (n == 1) return {start};
        for (long i = 0; i < n; ++i)
            g.push_back(start + (stop - start) * static_cast<double>(i) / static_cast<double>(n - 1));
        return g;
    }
    if (step && *step > 0) {
        const double span = (stop - start) / *step;
        if (span > 1e7) return g;
        const long n = static_cast<long>(std::floor(span + 1e-9)) + 1;
        for (long i = 0; i < n; ++i) g.push_back(start + *step * static_cast<double>(i));
        return g;
    }
    return g;
}

namespace {

struct UnitInfo {
    double factor;
    const char* base;
};

const std::unordered_map<std::string_view, UnitInfo>& unit_table() {
    static const std::unordered_map<std::string_view, UnitInfo> table{
        {"Hz", {1.0, "Hz"}},      {"kHz", {1e3, "Hz"}},      {"MHz", {1e6, "Hz"}},
        {"GHz", {1e9, "Hz"}},     {"THz", {1e12, "Hz"}},     {"mil", {25.4e-6, "m"}},
        {"mm", {1e-3, "m"}},      {"um", {1e-6, "m"}},       {"nm", {1e-9, "m"}},
        {"cm", {1e-2, "m"}},      {"Ohm", {1.0, "Ohm"}},     {"ohm", {1.0, "Ohm"}},
        {"kOhm", {1e3, "Ohm"}},   {"MOhm", {1e6, "Ohm"}},    {"V", {1.0, "V"}},
        {"mV", {1e-3, "V"}},      {"A", {1.0, "A"}},         {"mA", {1e-3, "A"}},
        {"uA", {1e-6, "A"}},      {"F", {1.0, "F"}},         {"uF", {1e-6, "F"}},
        {"nF", {1e-9, "F"}},      {"pF", {1e-12, "F"}},      {"fF", {1e-15, "F"}},
        {"H", {1.0, "H"}},        {"uH", {1e-6, "H"}},       {"nH", {1e-9, "H"}},
        {"pH", {1e-12, "H"}},     {"s", {1.0, "s"}},         {"ms", {1e-3, "s"}},
        {"us", {1e-6, "s"}},      {"ns", {1e-9, "s"}},       {"ps", {1e-12, "s"}},
        {"dB", {1.0, "dB"}},      {"deg", {1.0, "deg"}},
    };
    return table;
}

std::optional<double> scale_factor(std::string_view prefix) {
    if (prefix == "meg" || prefix == "MEG" || prefix == "Meg") return 1e6;
    if (prefix.size() != 1) return std::nullopt;
    switch (prefix[0]) {
    case 'a': return 1e-18;
    case 'f': return 1e-15;
    case 'p': return 1e-12;
    case 'n': return 1e-9;
    case 'u': return 1e-6;
    case 'm': return 1e-3;
    case 'k':
    case 'K': return 1e3;
    case 'M': return 1e6;
    case 'G': return 1e9;
    case 'T': return 1e12;
    default: return std::nullopt;
    }
}

bool is_base_unit(std::string_view s) {
    return s == "Hz" || s == "F" || s == "H" || s == "V" || s == "A" || s == "s" || s == "Ohm";
}

} // namespace

std::optional<ParamValue> parse_value(std::string_view token) {
    if (token.empty()) return std::nullopt;
    std::size_t i = 0;
    bool negative = false;
    if (token[0] == '+' || token[0] == '-') {
        negative = token[0] == '-';
        i = 1;
    }
    if (i >= token.size() || !(std::isdigit(static_cast<unsigned char>(token[i])) || token[i] == '.'))
        return std::nullopt;
    double mag = 0;
    auto [ptr, ec] = std::from_chars(token.data() + i, token.data() + token.size(), mag);
    if (ec != std::errc{} || !std::isfinite(mag)) return std::nullopt;
    std::string_view suffix(ptr, static_cast<std::size_t>(token.data() + token.size() - ptr));
    double v = negative ? -mag : mag;

    ParamValue pv{std::string(token), v, ""};
    if (suffix.empty()) return pv;
    if (auto it = unit_table().find(suffix); it != unit_table().end()) {
        pv.value = v * it->second.factor;
        pv.unit = it->second.base;
        return pv;
    }
    for (std::size_t plen : {std::size_t{3}, std::size_t{1}}) {
        if (suffix.size() < plen) continue;
        auto f = scale_factor(suffix.substr(0, plen));
        if (!f) continue;
        auto rest = suffix.substr(plen);
        if (!rest.empty() && !is_base_unit(rest)) continue;
        pv.value = v * *f;
        pv.unit = std::string(rest);
        return pv;
    }
    return std::nullopt;
}

namespace {

struct Token {
    enum Kind { word, equals, lparen, rparen, string } kind = word;
    std::string text;
    Location loc;
};

struct Statement {
    std::vector<Token> tokens;
};

bool is_word_char(char c) {
    return !std::isspace(static_cast<unsigned char>(c)) && c != '=' && c != '(' && c != ')' &&
           c != '"';
}

// Tokenizes one physical line; stops at an inline "//" comment.
void tokenize_line(std::string_view line, std::size_t line_no, std::vector<Token>& out) {
    std::size_t i = 0;
    while (i < line.size()) {
        char c = line[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        Location loc{line_no, i + 1};
        if (c == '/' && i + 1 < line.size() && line[i + 1] == '/') return;
        if (c == '=') {
            out.push_back({Token::equals, "=", loc});
            ++i;
        } else if (c == '(') {
            out.push_back({Token::lparen, "(", loc});
            ++i;
        } else if (c == ')') {
            out.push_back({Token::rparen, ")", loc});
            ++i;
        } else if (c == '"') {
            auto close = line.find('"', i + 1);
            if (close == std::string_view::npos)
                throw ParseError("unterminated string", loc, std::string(line.substr(i)));
            out.push_back({Token::string, std::string(line.substr(i, close - i + 1)), loc});
            i = close + 1;
        } else {
            std::size_t j = i;
            while (j < line.size() && is_word_char(line[j])) {
                if (line[j] == '/' && j + 1 < line.size() && line[j + 1] == '/') break;
                ++j;
            }
            out.push_back({Token::word, std::string(line.substr(i, j - i)), loc});
            i = j;
        }
    }
}

std::vector<Statement> split_statements(std::string_view text) {
    std::vector<Statement> stmts;
    bool continue_next = false;
    std::size_t line_no = 0;
    for (const auto& raw : util::split_lines(text)) {
        ++line_no;
        std::string_view line = raw;
        auto trimmed = util::trim(line);
        if (trimmed.empty()) {
            continue_next = false;
            continue;
        }
        if (trimmed.substr(0, 2) == "//" || trimmed.front() == '*') continue;

        bool plus = trimmed.front() == '+';
        std::size_t offset = static_cast<std::size_t>(trimmed.data() - line.data());
        std::string body(line);
        if (plus) body[offset] = ' ';

        bool trailing_backslash = false;
        {
            auto t = util::trim(body);
            if (!t.empty() && t.back() == '\\') {
                trailing_backslash = true;
                body[static_cast<std::size_t>(t.data() - body.data()) + t.size() - 1] = ' ';
            }
        }

        std::vector<Token> toks;
        tokenize_line(body, line_no, toks);
        if ((plus || continue_next) && !stmts.empty()) {
            auto& dst = stmts.back().tokens;
            dst.insert(dst.end(), toks.begin(), toks.end());
        } else if (plus) {
            throw ParseError("continuation line without a statement", {line_no, offset + 1}, "+");
        } else if (!toks.empty()) {
            stmts.push_back({std::move(toks)});
        }
        continue_next = trailing_backslash;
    }
    return stmts;
}

class StatementParser {
public:
    StatementParser(const std::vector<Token>& toks, std::size_t pos) : toks_(toks), pos_(pos) {}

    bool at_end() const { return pos_ >= toks_.size(); }
    const Token& peek() const { return toks_[pos_]; }
    std::size_t pos() const { return pos_; }

    bool at_param_start() const {
        return pos_ + 1 < toks_.size() && toks_[pos_].kind == Token::word &&
               toks_[pos_ + 1].kind == Token::equals;
    }

    /// Words and strings up to the first "key=" or end.
    std::vector<Token> positional() {
        std::vector<Token> out;
        while (!at_end() && !at_param_start()) {
            const auto& t = peek();
            if (t.kind == Token::equals)
                throw ParseError("'=' without a parameter name", t.loc, t.text);
            if (t.kind == Token::lparen || t.kind == Token::rparen)
                throw ParseError("unexpected parenthesis", t.loc, t.text);
            out.push_back(t);
            ++pos_;
        }
        return out;
    }

    std::vector<Param> params() {
        std::vector<Param> out;
        while (!at_end()) {
            const Token& key = peek();
            if (!at_param_start()) {
                if (key.kind == Token::equals)
                    throw ParseError("'=' without a parameter name", key.loc, key.text);
                throw ParseError("expected name=value", key.loc, key.text);
            }
            pos_ += 2;
            Param p;
            p.name = key.text;
            p.where = key.loc;
            p.value = value(key);
            out.push_back(std::move(p));
        }
        return out;
    }

private:
    ParamValue value(const Token& key) {
        if (at_end())
            throw ParseError("unterminated parameter assignment", key.loc, key.text + "=");
        const Token& t = peek();
        if (t.kind == Token::equals || t.kind == Token::rparen)
            throw ParseError("unterminated parameter assignment", t.loc, key.text + "=" + t.text);
        if (t.kind == Token::word && at_param_start())
            throw ParseError("unterminated parameter assignment", key.loc, key.text + "=");
        ++pos_;
        if (t.kind == Token::string) return ParamValue{t.text, std::nullopt, ""};
        if (t.kind == Token::lparen) {
            std::vector<std::string> inner;
            int depth = 1;
            while (!at_end()) {
                const Token& u = peek();
                ++pos_;
                if (u.kind == Token::lparen) ++depth;
                if (u.kind == Token::rparen && --depth == 0)
                    return ParamValue{"(" + util::join(inner, " ") + ")", std::nullopt, ""};
                inner.push_back(u.text);
            }
            throw ParseError("unbalanced parenthesis in value", t.loc, t.text);
        }
        auto pv = parse_value(t.text);
        if (!pv) return ParamValue{t.text, std::nullopt, ""};
        if (!at_end() && peek().kind == Token::word && !at_param_start() && pv->unit.empty()) {
            if (auto it = unit_table().find(peek().text); it != unit_table().end()) {
                pv->raw += " " + peek().text;
                *pv->value *= it->second.factor;
                pv->unit = it->second.base;
                ++pos_;
            }
        }
        return *pv;
    }

    const std::vector<Token>& toks_;
    std::size_t pos_;
};

std::vector<std::string> texts(const std::vector<Token>& toks) {
    std::vector<std::string> out;
    out.reserve(toks.size());
    for (const auto& t : toks) out.push_back(t.text);
    return out;
}

std::optional<double> param_number(const std::vector<Param>& params, std::string_view name) {
    auto* p = find_param(params, name);
    if (!p) return std::nullopt;
    return p->value.value;
}

std::optional<long> param_count(const std::vector<Param>& params, std::string_view name) {
    auto v = param_number(params, name);
    if (!v || *v < 1 || *v > 1e9) return std::nullopt;
    return static_cast<long>(std::llround(*v));
}

std::optional<Sweep> sweep_from_params(DirectiveKind kind, const std::vector<Param>& params) {
    Sweep s;
    auto start = param_number(params, "start");
    auto stop = param_number(params, "stop");
    if (!stop) return std::nullopt;
    s.stop = *stop;
    s.start = start.value_or(0.0);
    if (kind != DirectiveKind::tran && !start) return std::nullopt;
    s.step = param_number(params, "step");
    s.points = param_count(params, "points");
    if (!s.points) s.points = param_count(params, "lin");
    if (!s.points) s.points = param_count(params, "pts");
    s.per_decade = param_count(params, "dec");
    return s;
}

const std::unordered_map<std::string, std::string>& primitive_masters() {
    static const std::unordered_map<std::string, std::string> m{
        {"resistor", "R"}, {"capacitor", "C"}, {"inductor", "L"},
        {"vsource", "vsource"}, {"isource", "isource"}};
    return m;
}

std::optional<DirectiveKind> spectre_analysis(std::string_view word) {
    if (word == "ac") return DirectiveKind::ac;
    if (word == "dc") return DirectiveKind::dc;
    if (word == "tran") return DirectiveKind::tran;
    if (word == "sp") return DirectiveKind::sparams;
    return std::nullopt;
}

Directive parse_dot_card(const std::vector<Token>& toks) {
    const Token& head = toks[0];
    std::string kw = util::to_lower(head.text);
    StatementParser sp(toks, 1);
    Directive d;
    d.keyword = head.text;
    d.where = head.loc;
    d.args = texts(sp.positional());
    d.params = sp.params();

    auto num = [&](std::size_t i) -> std::optional<double> {
        if (i >= d.args.size()) return std::nullopt;
        auto v = parse_value(d.args[i]);
        return v ? v->value : std::nullopt;
    };

    if (kw == ".ac") {
        d.kind = DirectiveKind::ac;
        if (d.args.size() < 4) throw ParseError(".ac needs type, count, start and stop", head.loc, head.text);
        auto n = num(1);
        auto f1 = num(2);
        auto f2 = num(3);
        if (!n || !f1 || !f2) throw ParseError("non-numeric .ac argument", head.loc, head.text);
        Sweep s{*f1, *f2, std::nullopt, std::nullopt, std::nullopt};
        long count = static_cast<long>(std::llround(std::clamp(*n, 0.0, 1e9)));
        if (util::iequals(d.args[0], "dec")) s.per_decade = count;
        else s.points = count;
        d.sweep = s;
    } else if (kw == ".tran") {
        d.kind = DirectiveKind::tran;
        auto step = num(0);
        auto stop = num(1);
        if (!step || !stop) throw ParseError(".tran needs step and stop", head.loc, head.text);
        d.sweep = Sweep{0.0, *stop, *step, std::nullopt, std::nullopt};
    } else if (kw == ".dc") {
        d.kind = DirectiveKind::dc;
        auto a = num(1);
        auto b = num(2);
        auto c = num(3);
        if (a && b && c) d.sweep = Sweep{*a, *b, *c, std::nullopt, std::nullopt};
    } else if (kw == ".include" || kw == ".inc" || kw == ".lib") {
        d.kind = DirectiveKind::include;
    } else if (kw == ".param" || kw == ".params") {
        d.kind = DirectiveKind::parameters;
    } else if (kw == ".end") {
        d.kind = DirectiveKind::end;
    } else if (kw == ".model") {
        d.kind = DirectiveKind::model;
    } else if (kw == ".global") {
        d.kind = DirectiveKind::global;
    } else if (kw == ".option" || kw == ".options") {
        d.kind = DirectiveKind::options;
    } else {
        throw ParseError("unknown dot card", head.loc, head.text);
    }
    return d;
}

void parse_spectre_statement(const std::vector<Token>& toks, Netlist& nl) {
    const Token& head = toks[0];
    if (head.kind != Token::word) throw ParseError("statement must start with a name", head.loc, head.text);
    if (head.text.front() == '.') {
        nl.directives.push_back(parse_dot_card(toks));
        return;
    }

    static const std::unordered_map<std::string_view, DirectiveKind> keywords{
        {"simulator", DirectiveKind::simulator}, {"parameters", DirectiveKind::parameters},
        {"include", DirectiveKind::include},     {"global", DirectiveKind::global},
        {"model", DirectiveKind::model}};
    if (auto it = keywords.find(head.text); it != keywords.end()) {
        StatementParser sp(toks, 1);
        Directive d;
        d.kind = it->second;
        d.keyword = head.text;
        d.where = head.loc;
        d.args = texts(sp.positional());
        d.params = sp.params();
        if (d.kind == DirectiveKind::include && d.args.empty())
            throw ParseError("include needs a file name", head.loc, head.text);
        if (d.kind == DirectiveKind::model && d.args.size() < 2)
            throw ParseError("model needs a name and a type", head.loc, head.text);
        nl.directives.push_back(std::move(d));
        return;
    }

    if (toks.size() >= 2 && toks[1].kind == Token::word) {
        if (auto kind = spectre_analysis(toks[1].text);
            kind && (toks.size() == 2 || (toks.size() > 3 && toks[3].kind == Token::equals))) {
            StatementParser sp(toks, 2);
            Directive d;
            d.kind = *kind;
            d.keyword = toks[1].text;
            d.name = head.text;
            d.where = head.loc;
            d.params = sp.params();
            d.sweep = sweep_from_params(d.kind, d.params);
            nl.directives.push_back(std::move(d));
            return;
        }
    }

    Component c;
    c.name = head.text;
    c.where = head.loc;
    if (toks.size() >= 2 && toks[1].kind == Token::lparen) {
        c.parenthesized = true;
        std::size_t i = 2;
        for (; i < toks.size() && toks[i].kind != Token::rparen; ++i) {
            if (toks[i].kind != Token::word)
                throw ParseError("expected a net name", toks[i].loc, toks[i].text);
            c.terminals.push_back(toks[i].text);
        }
        if (i >= toks.size()) throw ParseError("missing ')' after terminal list", toks[1].loc, "(");
        ++i;
        if (i >= toks.size() || toks[i].kind != Token::word || (i + 1 < toks.size() && toks[i + 1].kind == Token::equals))
            throw ParseError("missing master after terminal list", toks[i - 1].loc, toks[i - 1].text);
        c.master = toks[i].text;
        c.master_where = toks[i].loc;
        StatementParser sp(toks, i + 1);
        auto extra = sp.positional();
        for (const auto& t : extra) {
            auto pv = parse_value(t.text);
            if (!pv) throw ParseError("unexpected token after master", t.loc, t.text);
            c.params.push_back({"", *pv, t.loc});
        }
        auto named = sp.params();
        c.params.insert(c.params.end(), named.begin(), named.end());
    } else {
        StatementParser sp(toks, 1);
        auto pos = sp.positional();
        for (const auto& t : pos)
            if (t.kind != Token::word) throw ParseError("unexpected string", t.loc, t.text);
        const char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(head.text[0])));
        const bool two_terminal = letter == 'R' || letter == 'C' || letter == 'L' || letter == 'V' ||
                                  letter == 'I';
        if (two_terminal) {
            std::optional<Param> positional_value;
            if (!pos.empty() && primitive_masters().count(pos.back().text)) {
                c.master = pos.back().text;
                c.master_where = pos.back().loc;
                pos.pop_back();
            } else if (pos.size() > 1) {
                if (auto pv = parse_value(pos.back().text)) {
                    positional_value = Param{"", *pv, pos.back().loc};
                    pos.pop_back();
                }
            }
            if (pos.empty()) throw ParseError("instance has no terminals", head.loc, head.text);
            c.terminals = texts(pos);
            if (positional_value) c.params.push_back(*positional_value);
        } else {
            if (pos.size() < 2)
                throw ParseError("instance needs terminals and a master", head.loc, head.text);
            c.master = pos.back().text;
            c.master_where = pos.back().loc;
            pos.pop_back();
            c.terminals = texts(pos);
        }
        auto named = sp.params();
        c.params.insert(c.params.end(), named.begin(), named.end());
    }

    if (!c.master.empty()) {
        auto it = primitive_masters().find(c.master);
        c.kind = it != primitive_masters().end() ? it->second : c.master;
    } else {
        const char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(c.name[0])));
        switch (letter) {
        case 'R': c.kind = "R"; break;
        case 'C': c.kind = "C"; break;
        case 'L': c.kind = "L"; break;
        case 'V': c.kind = "vsource"; break;
        default: c.kind = "isource"; break;
        }
    }
    nl.components.push_back(std::move(c));
}

std::optional<DirectiveKind> ads_directive(std::string_view kind) {
    if (util::iequals(kind, "MSUB")) return DirectiveKind::substrate;
    if (util::iequals(kind, "S_Param") || util::iequals(kind, "SP")) return DirectiveKind::sparams;
    if (util::iequals(kind, "AC")) return DirectiveKind::ac;
    if (util::iequals(kind, "DC")) return DirectiveKind::dc;
    if (util::iequals(kind, "Tran")) return DirectiveKind::tran;
    if (util::iequals(kind, "Options")) return DirectiveKind::options;
    return std::nullopt;
}

void parse_ads_statement(const std::vector<Token>& toks, Netlist& nl) {
    const Token& head = toks[0];
    if (head.kind != Token::word) throw ParseError("statement must start with Kind:Name", head.loc, head.text);

    if (head.text == "#include" || head.text == "#uselib") {
        StatementParser sp(toks, 1);
        Directive d;
        d.kind = DirectiveKind::include;
        d.keyword = head.text;
        d.where = head.loc;
        d.args = texts(sp.positional());
        d.params = sp.params();
        if (d.args.empty()) throw ParseError("include needs a file name", head.loc, head.text);
        nl.directives.push_back(std::move(d));
        return;
    }

    auto colon = head.text.find(':');
    if (colon == std::string::npos) {
        if (util::iequals(head.text, "Options")) {
            StatementParser sp(toks, 1);
            Directive d;
            d.kind = DirectiveKind::options;
            d.keyword = head.text;
            d.where = head.loc;
            d.args = texts(sp.positional());
            d.params = sp.params();
            nl.directives.push_back(std::move(d));
            return;
        }
        if (util::iequals(head.text, "define"))
            throw ParseError("subcircuit definitions are not supported", head.loc, head.text);
        throw ParseError("expected Kind:Name", head.loc, head.text);
    }

    std::string kind = head.text.substr(0, colon);
    std::string name = head.text.substr(colon + 1);
    if (kind.empty() || name.empty() || name.find(':') != std::string::npos)
        throw ParseError("malformed Kind:Name", head.loc, head.text);

    StatementParser sp(toks, 1);
    auto pos = sp.positional();
    for (const auto& t : pos)
        if (t.kind != Token::word) throw ParseError("unexpected string", t.loc, t.text);
    auto params = sp.params();

    if (auto dk = ads_directive(kind)) {
        Directive d;
        d.kind = *dk;
        d.keyword = kind;
        d.name = name;
        d.where = head.loc;
        d.args = texts(pos);
        d.params = std::move(params);
        if (d.kind == DirectiveKind::sparams || d.kind == DirectiveKind::ac ||
            d.kind == DirectiveKind::dc || d.kind == DirectiveKind::tran)
            d.sweep = sweep_from_params(d.kind, d.params);
        nl.directives.push_back(std::move(d));
        return;
    }

    Component c;
    c.name = name;
    c.kind = kind;
    c.master = kind;
    c.master_where = head.loc;
    c.where = head.loc;
    c.terminals = texts(pos);
    c.params = std::move(params);
    nl.components.push_back(std::move(c));
}

void resolve_parameters(Netlist& nl) {
    auto defs = parameter_values(nl);
    auto resolve = [&](std::vector<Param>& params) {
        for (auto& p : params) {
            if (p.value.value) continue;
            if (auto it = defs.find(p.value.raw); it != defs.end()) p.value.value = it->second;
        }
    };
    for (auto& c : nl.components) resolve(c.params);
    for (auto& d : nl.directives) {
        if (d.kind == DirectiveKind::parameters) continue;
        resolve(d.params);
        if ((d.kind == DirectiveKind::sparams || d.kind == DirectiveKind::ac ||
             d.kind == DirectiveKind::dc || d.kind == DirectiveKind::tran) &&
            d.keyword.front() != '.')
            d.sweep = sweep_from_params(d.kind, d.params);
    }
}

} // namespace

std::map<std::string, double> parameter_values(const Netlist& netlist) {
    std::map<std::string, double> defs;
    for (const auto& d : netlist.directives) {
        if (d.kind != DirectiveKind::parameters) continue;
        for (const auto& p : d.params) {
            if (p.value.value) defs[p.name] = *p.value.value;
            else if (auto it = defs.find(p.value.raw); it != defs.end()) defs[p.name] = it->second;
        }
    }
    return defs;
}

Netlist parse(std::string_view text, Dialect dialect) {
    Netlist nl;
    nl.dialect = dialect;
    for (const auto& st : split_statements(text)) {
        if (dialect == Dialect::ads_like) parse_ads_statement(st.tokens, nl);
        else parse_spectre_statement(st.tokens, nl);
    }
    std::set<std::string> names;
    for (const auto& c : nl.components) {
        if (!names.insert(c.name).second)
            throw ParseError("duplicate instance name", c.where, c.name);
        for (const auto& t : c.terminals)
            if (t.empty()) throw ParseError("empty net name", c.where, c.name);
    }
    if (nl.components.empty() && nl.directives.empty())
        throw ParseError("netlist has no statements", {1, 1}, "");
    resolve_parameters(nl);
    return nl;
}

namespace {

std::string print_params(const std::vector<Param>& params) {
    std::string out;
    for (const auto& p : params) {
        out += ' ';
        if (!p.name.empty()) out += p.name + "=";
        out += p.value.raw;
    }
    return out;
}

std::string print_component(const Component& c, Dialect dialect) {
    std::string out;
    if (dialect == Dialect::ads_like) {
        out = c.kind + ":" + c.name;
        for (const auto& t : c.terminals) out += " " + t;
    } else if (c.parenthesized) {
        out = c.name + " (" + util::join(c.terminals, " ") + ") " + c.master;
    } else {
        out = c.name;
        for (const auto& t : c.terminals) out += " " + t;
        if (!c.master.empty()) out += " " + c.master;
    }
    return out + print_params(c.params);
}

std::string print_directive(const Directive& d, Dialect dialect) {
    std::string out;
    if (d.name.empty()) out = d.keyword;
    else if (dialect == Dialect::ads_like) out = d.keyword + ":" + d.name;
    else out = d.name + " " + d.keyword;
    for (const auto& a : d.args) out += " " + a;
    return out + print_params(d.params);
}

bool same_params(const std::vector<Param>& a, const std::vector<Param>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].name != b[i].name || a[i].value.raw != b[i].value.raw ||
            a[i].value.value != b[i].value.value || a[i].value.unit != b[i].value.unit)
            return false;
    }
    return true;
}

} // namespace

std::string print(const Netlist& netlist) {
    struct Line {
        std::size_t order;
        std::size_t seq;
        std::string text;
    };
    std::vector<Line> lines;
    std::size_t seq = 0;
    for (const auto& c : netlist.components)
        lines.push_back({c.where.line, seq++, print_component(c, netlist.dialect)});
    for (const auto& d : netlist.directives)
        lines.push_back({d.where.line, seq++, print_directive(d, netlist.dialect)});
    std::stable_sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
        return a.order != b.order ? a.order < b.order : a.seq < b.seq;
    });
    std::string out;
    for (const auto& l : lines) out += l.text + "\n";
    return out;
}

bool same_ast(const Netlist& a, const Netlist& b) {
    if (a.dialect != b.dialect || a.components.size() != b.components.size() ||
        a.directives.size() != b.directives.size())
        return false;
    for (std::size_t i = 0; i < a.components.size(); ++i) {
        const auto& x = a.components[i];
        const auto& y = b.components[i];
        if (x.name != y.name || x.kind != y.kind || x.master != y.master ||
            x.terminals != y.terminals || x.parenthesized != y.parenthesized ||
            !same_params(x.params, y.params))
            return false;
    }
    for (std::size_t i = 0; i < a.directives.size(); ++i) {
        const auto& x = a.directives[i];
        const auto& y = b.directives[i];
        if (x.kind != y.kind || x.keyword != y.keyword || x.name != y.name || x.args != y.args ||
            x.sweep != y.sweep || !same_params(x.params, y.params))
            return false;
    }
    return true;
}

} // namespace edaloop::netlist
