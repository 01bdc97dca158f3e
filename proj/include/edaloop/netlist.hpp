#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edaloop/errors.hpp"

namespace edaloop::netlist {

enum class Dialect { spectre_like, ads_like };

std::string_view to_string(Dialect dialect);
Dialect dialect_from_string(std::string_view text);

/// A parameter value as written plus its SI-normalized number when it has one.
struct ParamValue {
    std::string raw;
    std::optional<double> value;
    std::string unit;
};

struct Param {
    std::string name;  // empty for positional values ("R1 a b 1k")
    ParamValue value;
    Location where;
};

struct Component {
    std::string name;
    /// Catalog key: R, C, L, vsource, isource, MLIN, Term, nmos, ...
    std::string kind;
    /// Master token as written ("resistor", "nmos", "MLIN"); empty for bare SPICE R/C/L/V/I.
    std::string master;
    std::vector<std::string> terminals;
    std::vector<Param> params;
    /// Spectre "(a b)" terminal list instead of bare positional nodes.
    bool parenthesized = false;
    Location where;
    Location master_where;

    const Param* param(std::string_view name) const;
};

enum class DirectiveKind {
    dc, ac, tran, sparams, substrate, include, parameters, model, options, simulator, global, end
};

std::string_view to_string(DirectiveKind kind);

/// Frequency or time sweep attached to an analysis directive.
struct Sweep {
    double start = 0.0;
    double stop = 0.0;
    std::optional<double> step;
    std::optional<long> points;
    std::optional<long> per_decade;

    /// Sample points of the sweep, ascending.
    std::vector<double> grid() const;

    friend bool operator==(const Sweep&, const Sweep&) = default;
};

struct Directive {
    DirectiveKind kind = DirectiveKind::options;
    /// Keyword as written: "ac", ".tran", "MSUB", "S_Param", "include", ...
    std::string keyword;
    /// Instance label ("ac1", "SP1"); empty when the statement has none.
    std::string name;
    std::vector<std::string> args;
    std::vector<Param> params;
    std::optional<Sweep> sweep;
    Location where;

    const Param* param(std::string_view name) const;
};

struct Netlist {
    Dialect dialect = Dialect::spectre_like;
    std::vector<Component> components;
    std::vector<Directive> directives;

    const Component* component(std::string_view name) const;
    /// Directives of one kind, in source order.
    std::vector<const Directive*> directives_of(DirectiveKind kind) const;
    /// Distinct net names in first-use order.
    std::vector<std::string> nets() const;
};

/// Parses a netlist. Throws ParseError with location and offending token.
///
/// Grammar (line oriented; "//" anywhere and "*" at line start are comments;
/// a leading "+" continues the previous line, a trailing "\" continues onto
/// the next):
///
///   spectre_like
///     name (n1 n2 ...) master p=v ...        instance with terminal list
///     name n1 n2 ... master p=v ...          M/Q/D/X bare instance
///     name n1 n2 [value] p=v ...             R/C/L/V/I bare instance
///     name ac|dc|tran|sp|noise p=v ...       analysis
///     simulator lang=spectre | parameters p=v ... | include "f" [section=s]
///     global n ... | model name type p=v ... | .ac/.dc/.tran/.param/.include/.end
///
///   ads_like
///     Kind:Name n1 n2 ... P=v [unit] ...     component (MLIN, MTEE, Term, ...)
///     MSUB:Name P=v ...                      substrate
///     S_Param:Name Start=v Stop=v Step=v     S-parameter sweep (also AC, DC, Tran)
///     Options P=v ... | #include "f"
///
/// Values accept scale suffixes (f p n u m k K M meg G T) and unit words
/// (Hz kHz MHz GHz mil mm um nm Ohm ...), attached ("2.4GHz") or separated
/// by a space ("2.4 GHz"). Named parameters that reference a `parameters`
/// definition resolve to its value.
Netlist parse(std::string_view text, Dialect dialect);

/// Canonical text of the netlist; parse(print(n)) is AST-equal to n.
std::string print(const Netlist& netlist);

/// Structural equality ignoring source locations.
bool same_ast(const Netlist& a, const Netlist& b);

/// Parses one value token such as "1k", "2.4GHz", "5p" (no separate unit).
std::optional<ParamValue> parse_value(std::string_view token);

/// Values defined by `parameters` / `.param` statements.
std::map<std::string, double> parameter_values(const Netlist& netlist);

bool is_ground(std::string_view net);

} // namespace edaloop::netlist
