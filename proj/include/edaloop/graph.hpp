#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "edaloop/netlist.hpp"

namespace edaloop::netlist {

struct CatalogEntry {
    std::string kind;
    std::size_t arity = 0;
    std::vector<std::string> required_params;
};

/// Known component kinds. Ships as a JSON data file; extensible without code changes.
class Catalog {
public:
    Catalog() = default;
    explicit Catalog(std::vector<CatalogEntry> entries);

    /// Seed catalog: MLIN, MTEE, MSUB, Term, S_Param, R, C, L, nmos, pmos, vsource, ...
    static Catalog builtin();
    static Catalog from_json(const nlohmann::json& j);
    static Catalog load(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    /// Case-insensitive lookup by kind.
    const CatalogEntry* find(std::string_view kind) const;
    void add(CatalogEntry entry);
    const std::vector<CatalogEntry>& entries() const { return entries_; }

private:
    std::vector<CatalogEntry> entries_;
};

enum class NodeKind { component, net };

struct GraphNode {
    NodeKind kind = NodeKind::component;
    std::string label;

    friend auto operator<=>(const GraphNode&, const GraphNode&) = default;
};

struct GraphEdge {
    std::string component;
    std::string net;
    std::size_t terminal = 0;

    friend auto operator<=>(const GraphEdge&, const GraphEdge&) = default;
};

/// Bipartite component-net graph. Terminal-less items are kept as annotations.
struct NetGraph {
    std::vector<GraphNode> nodes;   // sorted
    std::vector<GraphEdge> edges;   // sorted
    std::vector<std::string> annotations;  // "MSUB:Sub1", "S_Param:SP1", ...

    std::size_t component_count() const;
    std::size_t net_count() const;
};

NetGraph build_graph(const Netlist& netlist);

enum class ViolationKind { unknown_kind, wrong_arity, missing_param, floating_net, disconnected_subgraph };

std::string_view to_string(ViolationKind kind);

struct Violation {
    ViolationKind kind = ViolationKind::unknown_kind;
    /// Component, directive or net the violation is about.
    std::string subject;
    std::optional<std::size_t> expected;
    std::optional<std::size_t> got;
    std::string param;
    Location where;

    std::string message() const;
    friend bool operator==(const Violation& a, const Violation& b) {
        return a.kind == b.kind && a.subject == b.subject && a.expected == b.expected &&
               a.got == b.got && a.param == b.param;
    }
};

/// Connectivity and catalog checks. Violations are data, never exceptions.
///
/// Ground nets ("0", "gnd") are exempt from the floating check. Directives
/// whose keyword is in the catalog are checked for required parameters.
std::vector<Violation> validate(const Netlist& netlist, const Catalog& catalog);

/// Number of connected components among component nodes (nets link them).
std::size_t island_count(const NetGraph& graph);

/// Deterministic DOT text; nodes and edges emitted in sorted order.
std::string export_dot(const NetGraph& graph);

/// Node/edge payload for the service and dashboard.
nlohmann::json graph_json(const NetGraph& graph);

void to_json(nlohmann::json& j, const Violation& v);
void from_json(const nlohmann::json& j, Violation& v);

} // namespace edaloop::netlist
