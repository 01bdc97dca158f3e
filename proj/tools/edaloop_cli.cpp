#include <csignal>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "edaloop/adapters.hpp"
#include "edaloop/bench.hpp"
#include "edaloop/errors.hpp"
#include "edaloop/graph.hpp"
#include "edaloop/netlist.hpp"
#include "edaloop/orchestrator.hpp"
#include "edaloop/reports.hpp"
#include "edaloop/service.hpp"
#include "edaloop/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace edaloop;

namespace {

std::string out_path;

// Prints to stdout, or writes the file given by --out.
void emit(const std::string& text) {
    if (out_path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    if (fs::path(out_path).has_parent_path()) fs::create_directories(fs::path(out_path).parent_path());
    util::write_file(out_path, text);
}

netlist::Dialect dialect_for(const std::string& file, const std::string& flag) {
    if (!flag.empty()) return netlist::dialect_from_string(flag);
    auto ext = util::to_lower(fs::path(file).extension().string());
    return ext == ".net" || ext == ".ads" ? netlist::Dialect::ads_like : netlist::Dialect::spectre_like;
}

std::string session_summary(const orchestrator::SessionRecord& rec) {
    std::ostringstream s;
    s << "session " << rec.id << "\n";
    for (const auto& it : rec.iterations) {
        s << "  iteration " << it.index << ": " << orchestrator::to_string(it.status);
        for (const auto& c : it.checks) {
            s << "  " << c.objective.metric << "=" << (c.measured ? util::fixed(*c.measured, 3) : std::string("n/a"))
              << " (" << to_string(c.status) << ")";
        }
        if (!it.error.empty()) s << "  [" << it.error << "]";
        s << "\n";
    }
    s << "outcome: " << (rec.outcome ? std::string(orchestrator::to_string(*rec.outcome)) : std::string("none"));
    if (!rec.abort_reason.empty()) s << " (" << rec.abort_reason << ")";
    s << "\n";
    return s.str();
}

struct SessionArgs {
    std::string config;
    std::string strategy;
    int max = 0;
    std::string id;
    std::string sessions_dir;
    std::string workspaces;
    std::string tables;
    bool json_out = false;
};

int cmd_session_run(const SessionArgs& a) {
    auto cfg = orchestrator::load_session_config(a.config);
    if (!a.strategy.empty() || a.max > 0) {
        auto kind = a.strategy.empty() ? cfg.strategy.kind : orchestrator::strategy_kind_from_string(a.strategy);
        cfg.strategy = orchestrator::Strategy::make(kind, a.max > 0 ? a.max : cfg.strategy.n);
    }
    if (!a.id.empty()) cfg.id = a.id;
    if (!a.sessions_dir.empty()) cfg.sessions_dir = a.sessions_dir;
    if (!a.workspaces.empty()) cfg.workspace_root = a.workspaces;

    orchestrator::SessionHooks hooks;
    if (cfg.strategy.kind == orchestrator::StrategyKind::interactive) {
        hooks.await_feedback = [](const orchestrator::SessionRecord& rec) -> std::optional<std::string> {
            std::cerr << session_summary(rec) << "feedback (one line, EOF aborts)> " << std::flush;
            std::string line;
            if (!std::getline(std::cin, line)) return std::nullopt;
            return line;
        };
    }
    auto rec = orchestrator::run_session(cfg, hooks);
    if (!a.tables.empty()) {
        const auto* ok = rec.last_ok();
        if (ok && cfg.sweep) {
            fs::create_directories(a.tables);
            for (const auto& [name, csv] : orchestrator::sweep_tables(*ok, cfg.sweep->parameter))
                util::write_file(fs::path(a.tables) / name, csv);
        }
    }
    emit(a.json_out ? orchestrator::to_json(rec).dump(2) : session_summary(rec));
    return rec.outcome == orchestrator::Outcome::aborted ? 1 : 0;
}

int cmd_session_replay(const std::string& record, const std::string& id) {
    auto rec = orchestrator::load_session(record);
    auto again = orchestrator::replay_session(rec, id.empty() ? rec.id + "-replay" : id);
    bool same = again.iterations.size() == rec.iterations.size();
    for (std::size_t i = 0; same && i < rec.iterations.size(); ++i)
        same = rec.iterations[i].checks == again.iterations[i].checks && rec.iterations[i].status == again.iterations[i].status;
    emit(session_summary(again) + (same ? "replay matches the record\n" : "replay differs from the record\n"));
    return same ? 0 : 1;
}

llm::LlmConfig llm_config(const std::string& model) {
    llm::LlmConfig c;
    c.model_id = model;
    return c;
}

int cmd_bench_run(const std::string& dataset, const std::string& adapter_file, int runs, const std::string& provider,
                  const std::string& transcript, const std::string& model, const std::string& logs_dir,
                  const std::string& workspaces, int jobs, const std::string& mapping) {
    std::optional<bench::FieldMapping> fm;
    if (!mapping.empty()) fm = bench::FieldMapping::load(mapping);
    auto problems = bench::load_dataset(dataset, fm ? &*fm : nullptr);
    json aj = json::parse(util::read_file(adapter_file));
    if (aj.contains("fixtures") && aj.at("fixtures").is_string() && fs::path(aj.at("fixtures").get<std::string>()).is_relative())
        aj["fixtures"] = (fs::path(adapter_file).parent_path() / aj.at("fixtures").get<std::string>()).string();
    auto adapter = adapters::adapter_spec_from_json(aj);

    orchestrator::ProviderSpec ps;
    ps.kind = provider == "scripted" ? orchestrator::ProviderKind::scripted
              : provider == "http"   ? orchestrator::ProviderKind::http
                                     : orchestrator::ProviderKind::header_echo;
    ps.transcript = transcript;
    auto p = orchestrator::make_provider(ps);

    bench::BenchOptions opt;
    opt.runs_per_problem = runs;
    opt.workspace_root = workspaces;
    opt.jobs = jobs;
    auto logs = bench::run_benchmark(problems, adapter, llm_config(model), *p, opt);
    bench::write_logs(logs, logs_dir);
    auto report = bench::aggregate(logs);
    std::ostringstream s;
    s << logs.size() << " run logs written to " << logs_dir << "\n";
    for (const auto& m : report.matrices)
        s << "  " << to_string(m.stage) << ": " << m.problems_with_pass << "/" << m.cells.size()
          << " problems with at least one pass (" << util::fixed(m.at_least_one_pass_pct, 1) << "%)\n";
    emit(s.str());
    return 0;
}

int cmd_bench_aggregate(const std::string& logs_dir, const std::string& stage, const std::string& out_dir) {
    auto report = bench::aggregate(bench::load_logs(logs_dir));
    if (!out_dir.empty()) bench::write_aggregate(report, out_dir);
    if (!stage.empty()) emit(bench::matrix_grid_csv(report.matrix(bench_stage_from_string(stage))));
    else emit(bench::matrix_long_csv(report));
    return 0;
}

int cmd_netlist_validate(const std::string& file, const std::string& catalog, const std::string& dialect, bool as_json) {
    auto nl = netlist::parse(util::read_file(file), dialect_for(file, dialect));
    auto cat = catalog.empty() ? netlist::Catalog::builtin() : netlist::Catalog::load(catalog);
    auto violations = netlist::validate(nl, cat);
    if (as_json) {
        emit(json{{"file", file}, {"violations", violations}}.dump(2));
    } else {
        std::string s;
        for (const auto& v : violations) s += v.message() + "\n";
        if (violations.empty()) s = file + ": no violations\n";
        emit(s);
    }
    return violations.empty() ? 0 : 1;
}

int cmd_graph_export(const std::string& file, const std::string& format, const std::string& dialect) {
    auto g = netlist::build_graph(netlist::parse(util::read_file(file), dialect_for(file, dialect)));
    if (format == "dot") emit(netlist::export_dot(g));
    else emit(netlist::graph_json(g).dump(2));
    return 0;
}

int cmd_report_parse(const std::string& file, const std::string& kind) {
    const auto text = util::read_file(file);
    json j;
    if (kind == "metrics") {
        auto m = reports::parse_metrics(text);
        j = json::object();
        for (const auto& [k, e] : m.entries) j["metrics"][k] = {{"value", e.value}, {"unit", e.unit}};
        j["ignored_lines"] = m.ignored_lines;
    } else if (kind == "utilization") {
        j = reports::parse_utilization(text);
    } else if (kind == "timing") {
        j = reports::parse_timing(text);
    } else if (kind == "power") {
        j = reports::parse_power(text);
    } else {
        j = reports::scan_log(text);
    }
    emit(j.dump(2));
    return 0;
}

service::Service* running_service = nullptr;

void on_signal(int) {
    if (running_service) running_service->stop();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"edaloop: LLM-driven EDA loops, benchmarks and report tooling"};
    app.require_subcommand(1);
    app.add_option("--out", out_path, "Write the command's output to this file");

    int rc = 0;

    auto* session = app.add_subcommand("session", "Run or replay design sessions");
    session->require_subcommand(1);
    SessionArgs sa;
    auto* srun = session->add_subcommand("run", "Run a session from a JSON config");
    srun->add_option("config", sa.config, "Session config file")->required()->check(CLI::ExistingFile);
    srun->add_option("--strategy", sa.strategy, "fixed, until-met or interactive")
        ->check(CLI::IsMember({"fixed", "until-met", "until_met", "interactive"}));
    srun->add_option("--max", sa.max, "Iteration count or bound")->check(CLI::PositiveNumber);
    srun->add_option("--id", sa.id, "Session id");
    srun->add_option("--sessions-dir", sa.sessions_dir, "Where session records go");
    srun->add_option("--workspaces", sa.workspaces, "Workspace root");
    srun->add_option("--tables", sa.tables, "Directory for sweep CSV tables");
    srun->add_flag("--json", sa.json_out, "Print the full record as JSON");
    srun->callback([&] { rc = cmd_session_run(sa); });

    std::string replay_record, replay_id;
    auto* sreplay = session->add_subcommand("replay", "Re-run a persisted session and compare checks");
    sreplay->add_option("record", replay_record, "Session record file")->required()->check(CLI::ExistingFile);
    sreplay->add_option("--id", replay_id, "Id for the replayed session");
    sreplay->callback([&] { rc = cmd_session_replay(replay_record, replay_id); });

    auto* bench_cmd = app.add_subcommand("bench", "Benchmark datasets");
    bench_cmd->require_subcommand(1);
    std::string base, policy, mapping;
    std::uint64_t seed = 0;
    auto* baug = bench_cmd->add_subcommand("augment", "Add ids, objectives and clock attributes to a dataset");
    baug->add_option("base", base, "Base dataset JSON")->required()->check(CLI::ExistingFile);
    baug->add_option("--policy", policy, "LUT objective policy JSON")->required()->check(CLI::ExistingFile);
    baug->add_option("--seed", seed, "Random seed")->required();
    baug->add_option("--mapping", mapping, "Field mapping for foreign datasets")->check(CLI::ExistingFile);
    baug->callback([&] {
        std::optional<bench::FieldMapping> fm;
        if (!mapping.empty()) fm = bench::FieldMapping::load(mapping);
        auto problems = bench::augment(json::parse(util::read_file(base)), bench::load_lut_policy(policy), seed,
                                       fm ? &*fm : nullptr);
        emit(bench::dataset_json(problems).dump(2) + "\n");
    });

    std::string dataset, adapter_file, provider = "header-echo", transcript, model = "offline", logs_dir = "logs",
                                      workspaces = "workspaces";
    int runs = 5, jobs = 0;
    auto* brun = bench_cmd->add_subcommand("run", "Run every problem through the FPGA pipeline");
    brun->add_option("dataset", dataset, "Augmented dataset JSON")->required()->check(CLI::ExistingFile);
    brun->add_option("--adapter", adapter_file, "Adapter spec JSON")->required()->check(CLI::ExistingFile);
    brun->add_option("--runs", runs, "Runs per problem")->check(CLI::PositiveNumber);
    brun->add_option("--provider", provider, "header-echo, scripted or http")
        ->check(CLI::IsMember({"header-echo", "scripted", "http"}));
    brun->add_option("--transcript", transcript, "Scripted transcript");
    brun->add_option("--model", model, "Model id");
    brun->add_option("--logs", logs_dir, "Directory for run logs");
    brun->add_option("--workspaces", workspaces, "Workspace root");
    brun->add_option("--jobs", jobs, "Concurrent runs");
    brun->add_option("--mapping", mapping, "Field mapping for foreign datasets")->check(CLI::ExistingFile);
    brun->callback([&] {
        rc = cmd_bench_run(dataset, adapter_file, runs, provider, transcript, model, logs_dir, workspaces, jobs, mapping);
    });

    std::string agg_dir, agg_stage, agg_out_dir;
    auto* bagg = bench_cmd->add_subcommand("aggregate", "Pass-rate matrices and time/token statistics");
    bagg->add_option("logs", agg_dir, "Directory of run logs")->required()->check(CLI::ExistingDirectory);
    bagg->add_option("--stage", agg_stage, "Print the grid matrix of one stage")
        ->check(CLI::IsMember({"simulate", "synthesize", "implement", "lut_objective", "timing_objective", "lut", "timing"}));
    bagg->add_option("--out-dir", agg_out_dir, "Write summary.json and CSV tables here");
    bagg->callback([&] { rc = cmd_bench_aggregate(agg_dir, agg_stage, agg_out_dir); });

    std::string nl_file, catalog, dialect;
    bool nl_json = false;
    auto* nl_cmd = app.add_subcommand("netlist", "Netlist tools");
    nl_cmd->require_subcommand(1);
    auto* nval = nl_cmd->add_subcommand("validate", "Check a netlist against the component catalog");
    nval->add_option("file", nl_file, "Netlist")->required()->check(CLI::ExistingFile);
    nval->add_option("--catalog", catalog, "Catalog JSON")->check(CLI::ExistingFile);
    nval->add_option("--dialect", dialect, "spectre or ads (default from extension)");
    nval->add_flag("--json", nl_json, "JSON output");
    nval->callback([&] { rc = cmd_netlist_validate(nl_file, catalog, dialect, nl_json); });

    std::string format = "json";
    auto* g_cmd = app.add_subcommand("graph", "Connectivity graph tools");
    g_cmd->require_subcommand(1);
    auto* gexp = g_cmd->add_subcommand("export", "Export the component-net graph");
    gexp->add_option("file", nl_file, "Netlist")->required()->check(CLI::ExistingFile);
    gexp->add_option("--format", format, "dot or json")->check(CLI::IsMember({"dot", "json"}));
    gexp->add_option("--dialect", dialect, "spectre or ads (default from extension)");
    gexp->callback([&] { rc = cmd_graph_export(nl_file, format, dialect); });

    std::string report_file, kind;
    auto* r_cmd = app.add_subcommand("report", "Report tools");
    r_cmd->require_subcommand(1);
    auto* rparse = r_cmd->add_subcommand("parse", "Parse a tool report or log into JSON");
    rparse->add_option("file", report_file, "Report file")->required()->check(CLI::ExistingFile);
    rparse->add_option("--kind", kind, "metrics, utilization, timing, power or log")
        ->required()
        ->check(CLI::IsMember({"metrics", "utilization", "timing", "power", "log"}));
    rparse->callback([&] { rc = cmd_report_parse(report_file, kind); });

    std::string gc_root = "workspaces", gc_session;
    long long gc_age = 0;
    auto* gc = app.add_subcommand("gc", "Remove old iteration workspaces");
    gc->add_option("--root", gc_root, "Workspace root");
    gc->add_option("--session", gc_session, "Only this session");
    gc->add_option("--min-age-s", gc_age, "Minimum age in seconds")->check(CLI::NonNegativeNumber);
    gc->callback([&] {
        auto n = adapters::gc_workspaces(gc_root, gc_session, std::chrono::seconds(gc_age));
        emit("removed " + std::to_string(n) + " workspace(s)\n");
    });

    service::ServiceConfig sc;
    std::string token_env;
    auto* serve = app.add_subcommand("serve", "Run the HTTP session service");
    serve->add_option("--host", sc.host, "Bind address");
    serve->add_option("--port", sc.port, "Port")->check(CLI::Range(1, 65535));
    serve->add_option("--sessions-dir", sc.sessions_dir, "Session records");
    serve->add_option("--workspaces", sc.workspace_root, "Workspace root");
    serve->add_option("--bench-dir", sc.bench_dir, "Aggregate outputs to publish");
    serve->add_option("--token-env", token_env, "Environment variable holding the shared token");
    serve->callback([&] {
        if (!token_env.empty()) {
            const char* t = std::getenv(token_env.c_str());
            if (!t || !*t) throw ConfigError("token variable " + token_env + " is not set");
            sc.token = t;
        }
        service::Service svc(sc);
        running_service = &svc;
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        std::cerr << "listening on " << sc.host << ":" << sc.port << "\n";
        if (!svc.listen()) throw ConfigError("cannot listen on " + sc.host + ":" + std::to_string(sc.port));
        running_service = nullptr;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
