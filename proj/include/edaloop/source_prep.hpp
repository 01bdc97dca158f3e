#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "edaloop/core.hpp"
#include "edaloop/netlist.hpp"

namespace edaloop::source {

/// Files handed to an adapter, keyed by file name (no directories).
struct SourceBundle {
    FlowKind flow = FlowKind::analogue;
    std::map<std::string, std::string> files;
    std::vector<std::string> repairs;

    /// Throws ConfigError when empty or a file name is not a plain name.
    void validate() const;
};

enum class BlockKind { netlist, verilog };

/// Pulls the code out of an LLM reply.
///
/// Fenced blocks win: first the first block whose language tag names the
/// kind, then the first whose opening line looks like the kind. Verilog
/// without fences falls back to the first module ... endmodule span.
/// Throws ExtractionError when nothing matches.
std::string extract_code_block(std::string_view response, BlockKind kind);

struct RepairResult {
    std::string text;
    std::vector<std::string> repairs;
};

/// Applies the closed whitelist of line-local rewrites:
///   1. CRLF line endings and trailing whitespace
///   2. micro sign to "u", typographic quotes to ASCII
///   3. spaces around "=" in assignments
///   4. trailing comma at end of line or before ")"
///   5. trailing semicolon
///   6. unit word glued to a number ("2.4GHz" -> "2.4 GHz")
/// Rules repeat per line until nothing changes, so the result is a fixpoint.
/// Comment text is only touched by rules 1 and 2.
RepairResult repair_syntax(std::string_view text, netlist::Dialect dialect);

struct PdkBinding {
    /// Lines prepended to the netlist; "{corner}" expands to `corner`.
    std::vector<std::string> model_includes;
    std::map<std::string, std::string> device_map;
    std::string corner;
};

nlohmann::json to_json(const PdkBinding& binding);
PdkBinding binding_from_json(const nlohmann::json& j);

/// Masters that never need a foundry model.
bool is_primitive_master(std::string_view master);

/// Prepends model includes and substitutes generic device masters.
/// Throws ParseError if the netlist does not parse and BindingError naming
/// the first generic master missing from the device map.
std::string bind_pdk(std::string_view netlist_text, netlist::Dialect dialect,
                     const PdkBinding& binding);

enum class PortDirection { input, output, inout };

std::string_view to_string(PortDirection dir);

struct Port {
    PortDirection direction = PortDirection::input;
    int width = 1;
    std::string name;

    friend bool operator==(const Port&, const Port&) = default;
};

struct ModuleHeader {
    std::string module_name;
    std::vector<Port> ports;

    const Port* port(std::string_view name) const;
    friend bool operator==(const ModuleHeader&, const ModuleHeader&) = default;
};

/// Parses the single module declaration in `verilog_text`.
///
/// Accepts ANSI port lists ("input wire [7:0] a, b"), non-ANSI lists with
/// body declarations, and "#(parameter W = 8)" ranges such as [W-1:0].
/// Throws HeaderError on zero or several modules or a malformed header.
ModuleHeader extract_module_header(std::string_view verilog_text);

/// ANSI header text for `header`, ending in ");".
std::string print_module_header(const ModuleHeader& header);

nlohmann::json to_json(const ModuleHeader& header);

struct ClockAttr {
    std::string port;
    double period_ns = 0.0;
};

/// Accepts "port=clk period=1.0", "period=1.0ns port=clk" and "clk 1.0".
/// Throws ConstraintError.
ClockAttr parse_clock_attr(std::string_view clock_attr);

/// Builds the clock attribute text for a port and frequency.
std::string clock_attr_for(std::string_view port, double freq_hz);

/// One constraint line: "create_clock -period 1.000 [get_ports clk]".
std::string make_constraints(std::string_view clock_attr);

} // namespace edaloop::source
