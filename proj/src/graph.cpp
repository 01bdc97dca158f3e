#include "edaloop/graph.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "edaloop/util.hpp"

namespace edaloop::netlist {

Catalog::Catalog(std::vector<CatalogEntry> entries) : entries_(std::move(entries)) {}

Catalog Catalog::builtin() {
    return Catalog({
        {"MLIN", 2, {"W", "L"}},
        {"MTEE", 3, {"W1", "W2", "W3"}},
        {"MLEF", 1, {"W", "L"}},
        {"MSUB", 0, {"H", "Er"}},
        {"Term", 2, {"Num", "Z"}},
        {"S_Param", 0, {"Start", "Stop"}},
        {"R", 2, {}},
        {"C", 2, {}},
        {"L", 2, {}},
        {"nmos", 4, {"w", "l"}},
        {"pmos", 4, {"w", "l"}},
        {"vsource", 2, {}},
        {"isource", 2, {}},
    });
}

Catalog Catalog::from_json(const nlohmann::json& j) {
    const auto& arr = j.is_object() && j.contains("components") ? j.at("components") : j;
    if (!arr.is_array()) throw ConfigError("catalog must be a JSON array of entries");
    std::vector<CatalogEntry> entries;
    for (const auto& e : arr) {
        CatalogEntry c;
        c.kind = e.at("kind").get<std::string>();
        c.arity = e.at("arity").get<std::size_t>();
        c.required_params = e.value("required_params", std::vector<std::string>{});
        entries.push_back(std::move(c));
    }
    return Catalog(std::move(entries));
}

Catalog Catalog::load(const std::filesystem::path& path) {
    try {
        return from_json(nlohmann::json::parse(util::read_file(path)));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad catalog " + path.string() + ": " + e.what());
    }
}

nlohmann::json Catalog::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : entries_)
        arr.push_back({{"kind", e.kind}, {"arity", e.arity}, {"required_params", e.required_params}});
    return {{"components", arr}};
}

const CatalogEntry* Catalog::find(std::string_view kind) const {
    for (const auto& e : entries_)
        if (util::iequals(e.kind, kind)) return &e;
    return nullptr;
}

void Catalog::add(CatalogEntry entry) {
    for (auto& e : entries_)
        if (util::iequals(e.kind, entry.kind)) {
            e = std::move(entry);
            return;
        }
    entries_.push_back(std::move(entry));
}

std::size_t NetGraph::component_count() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const GraphNode& n) {
        return n.kind == NodeKind::component;
    }));
}

std::size_t NetGraph::net_count() const { return nodes.size() - component_count(); }

NetGraph build_graph(const Netlist& netlist) {
    NetGraph g;
    std::set<std::string> nets;
    for (const auto& c : netlist.components) {
        if (c.terminals.empty()) {
            g.annotations.push_back(c.kind + ":" + c.name);
            continue;
        }
        g.nodes.push_back({NodeKind::component, c.name});
        for (std::size_t i = 0; i < c.terminals.size(); ++i) {
            nets.insert(c.terminals[i]);
            g.edges.push_back({c.name, c.terminals[i], i});
        }
    }
    for (const auto& n : nets) g.nodes.push_back({NodeKind::net, n});
    for (const auto& d : netlist.directives) {
        if (d.kind == DirectiveKind::substrate || d.kind == DirectiveKind::sparams ||
            d.kind == DirectiveKind::ac || d.kind == DirectiveKind::dc || d.kind == DirectiveKind::tran)
            g.annotations.push_back(d.name.empty() ? d.keyword : d.keyword + ":" + d.name);
    }
    std::sort(g.nodes.begin(), g.nodes.end());
    std::sort(g.edges.begin(), g.edges.end());
    std::sort(g.annotations.begin(), g.annotations.end());
    return g;
}

std::string_view to_string(ViolationKind kind) {
    switch (kind) {
    case ViolationKind::unknown_kind: return "unknown_kind";
    case ViolationKind::wrong_arity: return "wrong_arity";
    case ViolationKind::missing_param: return "missing_param";
    case ViolationKind::floating_net: return "floating_net";
    case ViolationKind::disconnected_subgraph: return "disconnected_subgraph";
    }
    return "unknown_kind";
}

std::string Violation::message() const {
    switch (kind) {
    case ViolationKind::unknown_kind:
        return "component " + subject + " has unknown kind '" + param + "'";
    case ViolationKind::wrong_arity:
        return "component " + subject + " has " + std::to_string(got.value_or(0)) +
               " terminals but its kind expects " + std::to_string(expected.value_or(0)) +
               " (wrong_arity(" + std::to_string(expected.value_or(0)) + "," +
               std::to_string(got.value_or(0)) + "))";
    case ViolationKind::missing_param:
        return subject + " is missing required parameter '" + param + "'";
    case ViolationKind::floating_net:
        return "net " + subject + " is connected to only one terminal";
    case ViolationKind::disconnected_subgraph:
        return "circuit splits into " + std::to_string(got.value_or(0)) +
               " disconnected parts";
    }
    return {};
}

std::size_t island_count(const NetGraph& graph) {
    std::map<std::string, std::size_t> index;
    for (const auto& n : graph.nodes)
        index.emplace((n.kind == NodeKind::component ? "c:" : "n:") + n.label, index.size());
    std::vector<std::size_t> parent(index.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& e : graph.edges) {
        auto a = find(index.at("c:" + e.component));
        auto b = find(index.at("n:" + e.net));
        if (a != b) parent[a] = b;
    }
    std::set<std::size_t> roots;
    for (const auto& n : graph.nodes)
        if (n.kind == NodeKind::component) roots.insert(find(index.at("c:" + n.label)));
    return roots.size();
}

std::vector<Violation> validate(const Netlist& netlist, const Catalog& catalog) {
    std::vector<Violation> out;
    for (const auto& c : netlist.components) {
        const auto* entry = catalog.find(c.kind);
        if (!entry) {
            out.push_back({ViolationKind::unknown_kind, c.name, std::nullopt, std::nullopt, c.kind, c.where});
            continue;
        }
        if (c.terminals.size() != entry->arity)
            out.push_back({ViolationKind::wrong_arity, c.name, entry->arity, c.terminals.size(), "", c.where});
        for (const auto& req : entry->required_params)
            if (!c.param(req))
                out.push_back({ViolationKind::missing_param, c.name, std::nullopt, std::nullopt, req, c.where});
    }
    for (const auto& d : netlist.directives) {
        const auto* entry = catalog.find(d.keyword);
        if (!entry) continue;
        const std::string subject = d.name.empty() ? d.keyword : d.keyword + ":" + d.name;
        for (const auto& req : entry->required_params)
            if (!d.param(req))
                out.push_back({ViolationKind::missing_param, subject, std::nullopt, std::nullopt, req, d.where});
    }

    std::set<std::string> globals;
    for (const auto* d : netlist.directives_of(DirectiveKind::global))
        for (const auto& a : d->args) globals.insert(a);

    std::map<std::string, std::size_t> degree;
    std::map<std::string, Location> first_use;
    std::vector<std::string> order;
    for (const auto& c : netlist.components)
        for (const auto& t : c.terminals) {
            if (degree[t]++ == 0) {
                order.push_back(t);
                first_use[t] = c.where;
            }
        }
    for (const auto& n : order)
        if (degree[n] == 1 && !is_ground(n) && !globals.count(n))
            out.push_back({ViolationKind::floating_net, n, std::nullopt, 1, "", first_use[n]});

    auto islands = island_count(build_graph(netlist));
    if (islands > 1)
        out.push_back({ViolationKind::disconnected_subgraph, "netlist", 1, islands, "", {}});
    return out;
}

namespace {

std::string dot_quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

std::string node_id(NodeKind kind, std::string_view label) {
    return (kind == NodeKind::component ? "c:" : "n:") + std::string(label);
}

} // namespace

std::string export_dot(const NetGraph& graph) {
    std::string out = "graph netlist {\n";
    for (const auto& n : graph.nodes) {
        const bool comp = n.kind == NodeKind::component;
        out += "  " + dot_quote(node_id(n.kind, n.label)) + " [kind=" +
               (comp ? "\"component\"" : "\"net\"") + ", label=" + dot_quote(n.label) +
               ", shape=" + (comp ? "box" : "ellipse") + "];\n";
    }
    for (const auto& a : graph.annotations)
        out += "  " + dot_quote("a:" + a) + " [kind=\"annotation\", label=" + dot_quote(a) +
               ", shape=note];\n";
    for (const auto& e : graph.edges)
        out += "  " + dot_quote(node_id(NodeKind::component, e.component)) + " -- " +
               dot_quote(node_id(NodeKind::net, e.net)) + " [terminal=" +
               std::to_string(e.terminal) + "];\n";
    out += "}\n";
    return out;
}

nlohmann::json graph_json(const NetGraph& graph) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : graph.nodes)
        nodes.push_back({{"id", node_id(n.kind, n.label)},
                         {"kind", n.kind == NodeKind::component ? "component" : "net"},
                         {"label", n.label}});
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : graph.edges)
        edges.push_back({{"source", node_id(NodeKind::component, e.component)},
                         {"target", node_id(NodeKind::net, e.net)},
                         {"terminal", e.terminal}});
    return {{"nodes", nodes}, {"edges", edges}, {"annotations", graph.annotations}};
}

void to_json(nlohmann::json& j, const Violation& v) {
    j = nlohmann::json{{"kind", to_string(v.kind)},
                       {"subject", v.subject},
                       {"message", v.message()},
                       {"line", v.where.line},
                       {"column", v.where.column}};
    if (v.expected) j["expected"] = *v.expected;
    if (v.got) j["got"] = *v.got;
    if (!v.param.empty()) j["param"] = v.param;
}

void from_json(const nlohmann::json& j, Violation& v) {
    static const std::map<std::string, ViolationKind> kinds{
        {"unknown_kind", ViolationKind::unknown_kind},
        {"wrong_arity", ViolationKind::wrong_arity},
        {"missing_param", ViolationKind::missing_param},
        {"floating_net", ViolationKind::floating_net},
        {"disconnected_subgraph", ViolationKind::disconnected_subgraph}};
    auto it = kinds.find(j.at("kind").get<std::string>());
    if (it == kinds.end()) throw ConfigError("unknown violation kind");
    v = Violation{};
    v.kind = it->second;
    v.subject = j.at("subject").get<std::string>();
    if (j.contains("expected")) v.expected = j.at("expected").get<std::size_t>();
    if (j.contains("got")) v.got = j.at("got").get<std::size_t>();
    v.param = j.value("param", std::string{});
    v.where = {j.value("line", std::size_t{0}), j.value("column", std::size_t{0})};
}

} // namespace edaloop::netlist
