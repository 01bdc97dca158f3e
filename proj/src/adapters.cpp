#include "edaloop/adapters.hpp"

#include <chrono>
#include <cstdio>
#include <mutex>
#include <set>

#include "edaloop/errors.hpp"
#include "edaloop/reports.hpp"
#include "edaloop/util.hpp"

namespace fs = std::filesystem;

namespace edaloop::adapters {

std::string_view to_string(AdapterMode mode) {
    switch (mode) {
    case AdapterMode::external: return "external";
    case AdapterMode::mock: return "mock";
    case AdapterMode::replay: return "replay";
    }
    return "mock";
}

AdapterMode adapter_mode_from_string(std::string_view text) {
    if (text == "external") return AdapterMode::external;
    if (text == "mock") return AdapterMode::mock;
    if (text == "replay") return AdapterMode::replay;
    throw ConfigError("unknown adapter mode '" + std::string(text) + "'");
}

std::vector<Stage> AdapterSpec::default_stages(FlowKind flow) {
    if (flow == FlowKind::fpga)
        return {Stage::instantiate, Stage::simulate, Stage::synthesize, Stage::implement};
    return {Stage::instantiate, Stage::simulate};
}

AdapterSpec AdapterSpec::make(FlowKind flow, AdapterMode mode) {
    AdapterSpec s;
    s.flow = flow;
    s.mode = mode;
    s.stages = default_stages(flow);
    if (mode == AdapterMode::external) s.timeout_s = 300.0;
    return s;
}

void AdapterSpec::validate() const {
    if (mode == AdapterMode::external && (!command_template || util::trim(*command_template).empty()))
        throw ConfigError("external adapter needs a command template");
    if (mode != AdapterMode::external && command_template)
        throw ConfigError("command template is only valid for external adapters");
    if (timeout_s && !(*timeout_s > 0)) throw ConfigError("timeout must be positive");
    if (stages.empty()) throw ConfigError("adapter has no stages");
    const auto allowed = default_stages(flow);
    std::size_t pos = 0;
    for (auto s : stages) {
        auto it = std::find(allowed.begin() + static_cast<long>(pos), allowed.end(), s);
        if (it == allowed.end())
            throw ConfigError("stage '" + std::string(to_string(s)) + "' is not valid for the " +
                              std::string(edaloop::to_string(flow)) + " flow or is out of order");
        pos = static_cast<std::size_t>(it - allowed.begin()) + 1;
    }
    if (mode == AdapterMode::replay && flow == FlowKind::analogue)
        throw ConfigError("the analogue flow has no replay adapter");
    if (mode == AdapterMode::replay && fixtures.empty())
        throw ConfigError("replay adapter needs a fixtures path");
}

nlohmann::json to_json(const AdapterSpec& spec) {
    nlohmann::json stages = nlohmann::json::array();
    for (auto s : spec.stages) stages.push_back(to_string(s));
    nlohmann::json j{{"flow", edaloop::to_string(spec.flow)},
                     {"mode", to_string(spec.mode)},
                     {"stages", stages},
                     {"part_id", spec.part_id},
                     {"fixtures", spec.fixtures.string()}};
    j["command_template"] = spec.command_template ? nlohmann::json(*spec.command_template) : nlohmann::json(nullptr);
    j["timeout_s"] = spec.timeout_s ? nlohmann::json(*spec.timeout_s) : nlohmann::json(nullptr);
    return j;
}

AdapterSpec adapter_spec_from_json(const nlohmann::json& j) {
    try {
        auto flow = flow_from_string(j.at("flow").get<std::string>());
        auto mode = adapter_mode_from_string(j.value("mode", std::string("mock")));
        AdapterSpec s = AdapterSpec::make(flow, mode);
        if (j.contains("stages") && j.at("stages").is_array()) {
            s.stages.clear();
            for (const auto& st : j.at("stages")) s.stages.push_back(stage_from_string(st.get<std::string>()));
        }
        if (j.contains("command_template") && j.at("command_template").is_string())
            s.command_template = j.at("command_template").get<std::string>();
        if (j.contains("timeout_s") && j.at("timeout_s").is_number())
            s.timeout_s = j.at("timeout_s").get<double>();
        s.part_id = j.value("part_id", s.part_id);
        s.fixtures = j.value("fixtures", std::string{});
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad adapter spec: ") + e.what());
    }
}

bool RunResult::all_passed() const {
    if (stage_outcomes.empty()) return false;
    for (const auto& o : stage_outcomes)
        if (o.status != StageStatus::pass) return false;
    return true;
}

StageStatus RunResult::status(Stage stage) const {
    for (const auto& o : stage_outcomes)
        if (o.stage == stage) return o.status;
    return StageStatus::skipped;
}

nlohmann::json to_json(const RunResult& r, std::size_t max_points) {
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& o : r.stage_outcomes)
        stages.push_back({{"stage", to_string(o.stage)},
                          {"status", to_string(o.status)},
                          {"duration_s", o.duration_s},
                          {"note", o.note}});
    nlohmann::json j{{"stage_outcomes", stages}, {"report_files", r.report_files}, {"log_text", r.log_text}};
    j["waveforms"] = r.waveforms ? waveforms_json(*r.waveforms, max_points) : nlohmann::json(nullptr);
    return j;
}

RunResult run_result_from_json(const nlohmann::json& j) {
    RunResult r;
    for (const auto& o : j.at("stage_outcomes"))
        r.stage_outcomes.push_back({stage_from_string(o.at("stage").get<std::string>()),
                                    stage_status_from_string(o.at("status").get<std::string>()),
                                    o.value("duration_s", 0.0), o.value("note", std::string{})});
    r.report_files = j.value("report_files", std::map<std::string, std::string>{});
    r.log_text = j.value("log_text", std::string{});
    if (j.contains("waveforms") && j.at("waveforms").is_object())
        r.waveforms = waveforms_from_json(j.at("waveforms"));
    return r;
}

std::vector<StageOutcome> gate_stages(const std::vector<Stage>& stages,
                                      const std::map<Stage, std::pair<bool, std::string>>& verdicts) {
    std::vector<StageOutcome> out;
    bool failed = false;
    for (auto s : stages) {
        if (failed) {
            out.push_back({s, StageStatus::skipped, 0.0, ""});
            continue;
        }
        auto it = verdicts.find(s);
        bool ok = it == verdicts.end() || it->second.first;
        out.push_back({s, ok ? StageStatus::pass : StageStatus::fail, 0.0,
                       it == verdicts.end() ? "" : it->second.second});
        failed = !ok;
    }
    return out;
}

// ---------------------------------------------------------------- workspaces

namespace {

bool valid_session_id(const std::string& id) {
    if (id.empty() || id.size() > 128) return false;
    for (char c : id)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) return false;
    return true;
}

std::string iteration_dir_name(int iteration, int attempt) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "iter_%03d", iteration);
    std::string name = buf;
    if (attempt > 1) name += "-" + std::to_string(attempt);
    return name;
}

} // namespace

fs::path prepare_workspace(const fs::path& root, const std::string& session_id, int iteration,
                           const source::SourceBundle& sources,
                           const std::optional<std::pair<std::string, std::string>>& driver) {
    if (!valid_session_id(session_id)) throw ConfigError("bad session id '" + session_id + "'");
    if (iteration < 1) throw ConfigError("iteration index must be positive");
    sources.validate();
    if (driver && sources.files.count(driver->first)) throw ConfigError("driver name clashes with a source file");
    const fs::path session_dir = root / session_id;
    fs::create_directories(session_dir);

    fs::path dir;
    for (int attempt = 1;; ++attempt) {
        dir = session_dir / iteration_dir_name(iteration, attempt);
        // create_directory reports false when the path already exists, which
        // makes the claim atomic even with concurrent callers.
        if (fs::create_directory(dir)) break;
        if (attempt > 100000) throw ConfigError("cannot allocate a workspace under " + session_dir.string());
    }
    fs::create_directories(dir / "reports");

    nlohmann::json manifest{{"session", session_id},
                            {"iteration", iteration},
                            {"flow", edaloop::to_string(sources.flow)},
                            {"files", nlohmann::json::object()},
                            {"repairs", sources.repairs}};
    for (const auto& [name, text] : sources.files) {
        util::write_file(dir / name, text);
        char hash[17];
        std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(util::fnv1a64(text)));
        manifest["files"][name] = {{"bytes", text.size()}, {"fnv1a64", hash}};
    }
    if (driver) {
        util::write_file(dir / driver->first, driver->second);
        fs::permissions(dir / driver->first, fs::perms::owner_exec | fs::perms::group_exec,
                        fs::perm_options::add);
        manifest["driver"] = driver->first;
    }
    util::write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    return dir;
}

std::size_t gc_workspaces(const fs::path& root, const std::string& session_id, std::chrono::seconds min_age) {
    if (!fs::exists(root)) return 0;
    const auto now = fs::file_time_type::clock::now();
    std::size_t removed = 0;
    for (const auto& session : fs::directory_iterator(root)) {
        if (!session.is_directory()) continue;
        if (!session_id.empty() && session.path().filename() != session_id) continue;
        std::vector<fs::path> doomed;
        for (const auto& it : fs::directory_iterator(session.path())) {
            if (!it.is_directory() || it.path().filename().string().rfind("iter_", 0) != 0) continue;
            if (now - fs::last_write_time(it.path()) >= min_age) doomed.push_back(it.path());
        }
        for (const auto& p : doomed) {
            fs::remove_all(p);
            ++removed;
        }
        if (fs::is_empty(session.path())) fs::remove(session.path());
    }
    return removed;
}

// ---------------------------------------------------------------- script generation

std::string gen_fpga_tcl(const source::SourceBundle& sources, const std::string& constraints_file,
                         const std::string& part_id, const std::string& top_module,
                         const std::vector<std::string>& stages) {
    std::vector<Stage> parsed;
    for (const auto& s : stages) parsed.push_back(stage_from_string(s));
    auto has = [&](Stage s) { return std::find(parsed.begin(), parsed.end(), s) != parsed.end(); };

    std::vector<std::string> design, bench;
    for (const auto& [name, _] : sources.files) {
        if (name.size() < 2 || (name.substr(name.size() - 2) != ".v" && name.substr(name.size() - 3) != ".sv"))
            continue;
        (name.rfind("tb", 0) == 0 ? bench : design).push_back(name);
    }

    std::string t;
    t += "# batch driver for " + top_module + "\n";
    t += "set ws [file dirname [file normalize [info script]]]\n";
    t += "set reports [file join $ws reports]\n";
    t += "file mkdir $reports\n";
    t += "set_part " + part_id + "\n";
    t += "proc stage_pass {name} { puts \"@@STAGE $name PASS\" }\n";
    t += "proc stage_fail {name msg} {\n";
    t += "    puts \"ERROR: \\[edaloop\\] $name: $msg\"\n";
    t += "    puts \"@@STAGE $name FAIL\"\n";
    t += "    exit 1\n";
    t += "}\n";
    for (const auto& f : design) t += "read_verilog [file join $ws " + f + "]\n";
    if (!constraints_file.empty()) t += "read_xdc [file join $ws " + constraints_file + "]\n";

    if (has(Stage::instantiate)) {
        t += "\n# instantiate\n";
        t += "if {[catch {synth_design -rtl -top " + top_module + " -part " + part_id +
             " -name rtl_1} msg]} { stage_fail instantiate $msg }\n";
        t += "stage_pass instantiate\n";
    }
    if (has(Stage::simulate)) {
        t += "\n# simulate\n";
        t += "if {[catch {\n";
        std::string files;
        for (const auto& f : design) files += " [file join $ws " + f + "]";
        for (const auto& f : bench) files += " [file join $ws " + f + "]";
        t += "    exec xvlog" + files + "\n";
        t += "    exec xelab tb -s sim_snapshot\n";
        t += "    set out [exec xsim sim_snapshot -R]\n";
        t += "    if {[string match \"*FAIL*\" $out]} { error \"testbench reported a failure\" }\n";
        t += "} msg]} { stage_fail simulate $msg }\n";
        t += "stage_pass simulate\n";
    }
    if (has(Stage::synthesize)) {
        t += "\n# synthesize\n";
        t += "if {[catch {synth_design -top " + top_module + " -part " + part_id + "} msg]} { stage_fail synthesize $msg }\n";
        t += "report_utilization -file [file join $reports utilization_synth.rpt]\n";
        t += "stage_pass synthesize\n";
    }
    if (has(Stage::implement)) {
        t += "\n# implement\n";
        t += "if {[catch {\n";
        t += "    opt_design\n";
        t += "    place_design\n";
        t += "    route_design\n";
        t += "} msg]} { stage_fail implement $msg }\n";
        t += "report_utilization -file [file join $reports utilization.rpt]\n";
        t += "report_timing_summary -file [file join $reports timing.rpt]\n";
        t += "report_power -file [file join $reports power.rpt]\n";
        t += "stage_pass implement\n";
    }
    return t;
}

std::string gen_shell_driver(const source::SourceBundle& sources, const std::vector<Stage>& stages) {
    std::string s = "#!/bin/sh\n# batch driver\ncd \"$(dirname \"$0\")\" || exit 1\nmkdir -p reports\n";
    for (const auto& [name, _] : sources.files)
        s += "test -f " + shell_quote(name) + " || { echo 'ERROR: missing " + name + "'; exit 1; }\n";
    if (!stages.empty()) s += "echo '@@STAGE " + std::string(to_string(stages.front())) + " PASS'\n";
    return s;
}

// ---------------------------------------------------------------- replay and dispatch

Trace read_curve_csv(const fs::path& path) {
    Trace t;
    t.x_name = "freq_hz";
    t.x_unit = "Hz";
    t.y_unit = "dB";
    std::size_t line_no = 0;
    for (const auto& raw : util::split_lines(util::read_file(path))) {
        ++line_no;
        auto line = util::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        auto comma = line.find(',');
        if (comma == std::string_view::npos) throw ConfigError("bad curve line in " + path.string());
        auto x = util::parse_double(util::trim(line.substr(0, comma)));
        auto y = util::parse_double(util::trim(line.substr(comma + 1)));
        if (!x || !y) {
            if (line_no == 1) continue;  // header
            throw ConfigError("bad curve line " + std::to_string(line_no) + " in " + path.string());
        }
        t.x.push_back(*x);
        t.y.push_back(*y);
    }
    t.validate();
    return t;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string design_text(const RunRequest& req) {
    auto it = req.sources.files.find(req.design_file);
    if (it == req.sources.files.end()) throw ConfigError("design file '" + req.design_file + "' is not in the bundle");
    return it->second;
}

void record_report(RunResult& r, const fs::path& workspace, const std::string& name, const std::string& text) {
    auto path = workspace / "reports" / name;
    util::write_file(path, text);
    r.report_files[name] = path.string();
}

void finish(RunResult& r, const fs::path& workspace) {
    util::write_file(workspace / "run.log", r.log_text);
}

RunResult run_analogue_mock(const AdapterSpec& spec, const fs::path& ws, const RunRequest& req) {
    RunResult r;
    auto start = Clock::now();
    std::map<Stage, std::pair<bool, std::string>> verdicts;
    std::optional<netlist::Netlist> nl;
    try {
        nl = netlist::parse(design_text(req), netlist::Dialect::spectre_like);
        r.log_text += "instantiate: parsed " + std::to_string(nl->components.size()) + " instances\n";
    } catch (const ParseError& e) {
        verdicts[Stage::instantiate] = {false, e.what()};
        r.log_text += std::string("ERROR: [parse] ") + e.what() + "\n";
    }
    if (nl) {
        try {
            auto eval = mock_analogue_eval(ota_params_from_netlist(*nl));
            reports::MetricsReport m;
            m.entries["dc_gain_db"] = {eval.metrics.at("dc_gain_db"), "dB"};
            if (eval.ugb_hz) m.entries["ugb_hz"] = {*eval.ugb_hz, "Hz"};
            if (eval.pm_deg) m.entries["phase_margin_deg"] = {*eval.pm_deg, "deg"};
            m.entries["power_w"] = {eval.power_w, "W"};
            m.entries["tail_current_a"] = {eval.tail_current_a, "A"};
            record_report(r, ws, "metrics.txt", reports::write_metrics(m));
            for (const auto& [name, t] : eval.waveforms.traces) record_report(r, ws, name + ".csv", trace_csv(t, name));
            r.waveforms = std::move(eval.waveforms);
            r.log_text += "simulate: ac, dc and tran analyses done\n";
        } catch (const Error& e) {
            verdicts[Stage::simulate] = {false, e.what()};
            r.log_text += std::string("ERROR: [sim] ") + e.what() + "\n";
        }
    }
    r.stage_outcomes = gate_stages(spec.stages, verdicts);
    if (!r.stage_outcomes.empty()) r.stage_outcomes.back().duration_s = seconds_since(start);
    finish(r, ws);
    return r;
}

RunResult run_rf(const AdapterSpec& spec, const fs::path& ws, const RunRequest& req) {
    RunResult r;
    auto start = Clock::now();
    std::map<Stage, std::pair<bool, std::string>> verdicts;
    std::optional<netlist::Netlist> nl;
    try {
        nl = netlist::parse(design_text(req), netlist::Dialect::ads_like);
        r.log_text += "instantiate: parsed " + std::to_string(nl->components.size()) + " components\n";
    } catch (const ParseError& e) {
        verdicts[Stage::instantiate] = {false, e.what()};
        r.log_text += std::string("ERROR: [parse] ") + e.what() + "\n";
    }
    if (nl) {
        try {
            Trace s11;
            if (spec.mode == AdapterMode::replay) {
                char name[32];
                std::snprintf(name, sizeof name, "iter_%02d.csv", req.iteration);
                auto path = spec.fixtures / name;
                if (!fs::exists(path)) throw ConfigError("no replay curve " + path.string());
                s11 = read_curve_csv(path);
            } else {
                s11 = mock_rf_eval(*nl).waveforms.at("s11_db");
            }
            reports::MetricsReport m;
            auto it = std::min_element(s11.y.begin(), s11.y.end());
            m.entries["s11_min_db"] = {*it, "dB"};
            m.entries["f_res_hz"] = {s11.x[static_cast<std::size_t>(it - s11.y.begin())], "Hz"};
            record_report(r, ws, "metrics.txt", reports::write_metrics(m));
            record_report(r, ws, "s11_db.csv", trace_csv(s11, "s11_db"));
            WaveformSet w;
            w.traces["s11_db"] = std::move(s11);
            r.waveforms = std::move(w);
            r.log_text += "simulate: S-parameter sweep done\n";
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            verdicts[Stage::simulate] = {false, e.what()};
            r.log_text += std::string("ERROR: [sim] ") + e.what() + "\n";
        }
    }
    r.stage_outcomes = gate_stages(spec.stages, verdicts);
    if (!r.stage_outcomes.empty()) r.stage_outcomes.back().duration_s = seconds_since(start);
    finish(r, ws);
    return r;
}

// Outcome files are read once per path.
const nlohmann::json& fpga_fixtures(const fs::path& path) {
    static std::mutex mu;
    static std::map<std::string, nlohmann::json> cache;
    std::lock_guard lock(mu);
    auto key = fs::absolute(path).string();
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    if (!fs::exists(path)) throw ConfigError("replay fixture file " + path.string() + " does not exist");
    try {
        return cache.emplace(key, nlohmann::json::parse(util::read_file(path))).first->second;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad replay fixture file " + path.string() + ": " + e.what());
    }
}

std::string header_mismatch(const source::ModuleHeader& want, const source::ModuleHeader& got) {
    if (want.module_name != got.module_name)
        return "module name '" + got.module_name + "' differs from '" + want.module_name + "'";
    for (const auto& p : want.ports) {
        const auto* q = got.port(p.name);
        if (!q) return "port '" + p.name + "' is missing";
        if (q->direction != p.direction) return "port '" + p.name + "' has the wrong direction";
        if (q->width != p.width)
            return "port '" + p.name + "' is " + std::to_string(q->width) + " bits, expected " + std::to_string(p.width);
    }
    for (const auto& q : got.ports)
        if (!want.port(q.name)) return "unexpected port '" + q.name + "'";
    return {};
}

RunResult run_fpga_replay(const AdapterSpec& spec, const fs::path& ws, const RunRequest& req) {
    if (!req.problem_id) throw ConfigError("FPGA replay needs a problem id");
    const auto& fx = fpga_fixtures(spec.fixtures);
    const auto key = std::to_string(*req.problem_id);
    const auto& problems = fx.contains("problems") ? fx.at("problems") : fx;
    if (!problems.contains(key)) throw ConfigError("no replay fixture for problem " + key);
    const auto& runs = problems.at(key).at("runs");
    if (!runs.is_array() || runs.empty()) throw ConfigError("replay fixture for problem " + key + " has no runs");
    const auto& outcome = runs.at(static_cast<std::size_t>((req.run_index - 1) % static_cast<int>(runs.size())));

    RunResult r;
    std::map<Stage, std::pair<bool, std::string>> verdicts;
    try {
        auto got = source::extract_module_header(design_text(req));
        r.log_text += "INFO: [lint] module " + got.module_name + " with " + std::to_string(got.ports.size()) + " ports\n";
        if (req.expected_header) {
            auto why = header_mismatch(*req.expected_header, got);
            if (!why.empty()) {
                verdicts[Stage::simulate] = {false, "header lint: " + why};
                r.log_text += "ERROR: [lint] " + why + "\n";
            }
        }
    } catch (const HeaderError& e) {
        verdicts[Stage::instantiate] = {false, e.what()};
        r.log_text += std::string("ERROR: [lint] ") + e.what() + "\n";
    }

    for (auto s : {Stage::simulate, Stage::synthesize, Stage::implement}) {
        if (verdicts.count(s)) continue;
        auto name = std::string(to_string(s));
        if (outcome.value(name, std::string("pass")) != "pass") verdicts[s] = {false, "replayed failure"};
    }
    r.stage_outcomes = gate_stages(spec.stages, verdicts);

    if (outcome.contains("log") && outcome.at("log").is_string()) {
        // Log lines of stages the lint stopped early never happened.
        bool lint_stop = verdicts.count(Stage::instantiate) ||
                         (verdicts.count(Stage::simulate) && verdicts.at(Stage::simulate).second != "replayed failure");
        if (!lint_stop) r.log_text += outcome.at("log").get<std::string>();
    }
    if (r.status(Stage::synthesize) == StageStatus::pass && outcome.contains("utilization") &&
        outcome.at("utilization").is_object()) {
        auto u = outcome.at("utilization").get<reports::UtilizationReport>();
        record_report(r, ws, "utilization_synth.rpt", reports::write_utilization(u));
    }
    if (r.status(Stage::implement) == StageStatus::pass) {
        if (outcome.contains("utilization") && outcome.at("utilization").is_object())
            record_report(r, ws, "utilization.rpt",
                          reports::write_utilization(outcome.at("utilization").get<reports::UtilizationReport>()));
        if (outcome.contains("timing") && outcome.at("timing").is_object())
            record_report(r, ws, "timing.rpt", reports::write_timing(outcome.at("timing").get<reports::TimingReport>()));
        if (outcome.contains("power") && outcome.at("power").is_object())
            record_report(r, ws, "power.rpt", reports::write_power(outcome.at("power").get<reports::PowerReport>()));
    }
    const double tool_time = outcome.value("tool_time_s", 0.0);
    for (auto& o : r.stage_outcomes)
        if (o.status != StageStatus::skipped) o.duration_s = tool_time / 4.0;
    finish(r, ws);
    return r;
}

} // namespace

RunResult run(const AdapterSpec& spec, const fs::path& workspace, const RunRequest& request) {
    spec.validate();
    if (!fs::is_directory(workspace)) throw ConfigError("workspace " + workspace.string() + " does not exist");
    switch (spec.mode) {
    case AdapterMode::external:
        return run_external(spec, workspace, request.script_name);
    case AdapterMode::mock:
    case AdapterMode::replay:
        if (spec.flow == FlowKind::analogue) return run_analogue_mock(spec, workspace, request);
        if (spec.flow == FlowKind::rf) return run_rf(spec, workspace, request);
        return run_fpga_replay(spec, workspace, request);
    }
    throw ConfigError("unknown adapter mode");
}

} // namespace edaloop::adapters
