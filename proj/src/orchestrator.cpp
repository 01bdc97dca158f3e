#include "edaloop/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <random>

#include "edaloop/analysis.hpp"
#include "edaloop/errors.hpp"
#include "edaloop/netlist.hpp"
#include "edaloop/reports.hpp"
#include "edaloop/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace edaloop::orchestrator {

std::string_view to_string(StrategyKind kind) {
    switch (kind) {
    case StrategyKind::fixed: return "fixed";
    case StrategyKind::until_met: return "until_met";
    case StrategyKind::interactive: return "interactive";
    }
    return "fixed";
}

StrategyKind strategy_kind_from_string(std::string_view text) {
    if (text == "fixed") return StrategyKind::fixed;
    if (text == "until_met" || text == "until-met") return StrategyKind::until_met;
    if (text == "interactive") return StrategyKind::interactive;
    throw ConfigError("unknown strategy '" + std::string(text) + "'");
}

Strategy Strategy::make(StrategyKind kind, int n) {
    if (n < 1) throw ConfigError("strategy iteration bound must be at least 1");
    return {kind, n};
}

void SweepSpec::validate() const {
    if (parameter.empty()) throw ConfigError("sweep parameter name is empty");
    if (!(std::isfinite(low) && std::isfinite(high) && low < high)) throw ConfigError("sweep needs low < high");
    if (count < 1) throw ConfigError("sweep count must be at least 1");
}

std::vector<double> sample_sweep(const SweepSpec& spec) {
    return sample_sweep(spec, [](double) { return true; });
}

std::vector<double> sample_sweep(const SweepSpec& spec, const std::function<bool(double)>& accept) {
    spec.validate();
    util::SeededRng rng(spec.seed);
    std::vector<double> out;
    const long budget = 1000L * spec.count;
    for (long draws = 0; static_cast<int>(out.size()) < spec.count; ++draws) {
        if (draws >= budget) throw ConfigError("sweep range rejects almost every sample");
        double v = rng.uniform(spec.low, spec.high);
        if (accept(v)) out.push_back(v);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string substitute_parameter(const std::string& deck, const std::string& name, double value) {
    auto lines = util::split_lines(deck);
    const std::string text = util::shortest(value);
    for (auto& line : lines) {
        auto words = util::split_ws(line);
        if (words.empty() || (words[0] != "parameters" && !util::iequals(words[0], ".param"))) continue;
        // Find "name=" at a word boundary; the value runs to the next blank.
        for (std::size_t pos = 0; (pos = line.find(name, pos)) != std::string::npos; ++pos) {
            bool left_ok = pos == 0 || std::isspace(static_cast<unsigned char>(line[pos - 1]));
            std::size_t eq = pos + name.size();
            while (eq < line.size() && line[eq] == ' ') ++eq;
            if (!left_ok || eq >= line.size() || line[eq] != '=') continue;
            std::size_t start = eq + 1;
            while (start < line.size() && line[start] == ' ') ++start;
            std::size_t end = start;
            while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
            line.replace(start, end - start, text);
            std::string out = util::join(lines, "\n");
            if (!deck.empty() && deck.back() == '\n') out += "\n";
            return out;
        }
    }
    // No definition: add one after a leading simulator statement.
    std::size_t at = 0;
    while (at < lines.size() && (util::trim(lines[at]).empty() || util::trim(lines[at]).front() == '/' ||
                                 util::trim(lines[at]).front() == '*' ||
                                 util::trim(lines[at]).rfind("simulator", 0) == 0))
        ++at;
    lines.insert(lines.begin() + static_cast<long>(at), "parameters " + name + "=" + text);
    std::string out = util::join(lines, "\n");
    if (!deck.empty() && deck.back() == '\n') out += "\n";
    return out;
}

std::shared_ptr<llm::Provider> make_provider(const ProviderSpec& spec) {
    switch (spec.kind) {
    case ProviderKind::scripted: return llm::ScriptedProvider::from_file(spec.transcript);
    case ProviderKind::header_echo: return std::make_shared<llm::HeaderEchoProvider>();
    case ProviderKind::http: return std::make_shared<llm::HttpProvider>(spec.http);
    }
    throw ConfigError("unknown provider kind");
}

void SessionConfig::validate() const {
    prompt.validate();
    adapter.validate();
    llm.validate();
    if (adapter.flow != prompt.flow) throw ConfigError("adapter flow differs from the prompt flow");
    if (sweep) {
        sweep->validate();
        if (prompt.flow != FlowKind::analogue) throw ConfigError("parameter sweeps apply to the analogue flow only");
    }
    if (provider.kind == ProviderKind::scripted && provider.transcript.empty())
        throw ConfigError("scripted provider needs a transcript file");
    if (header && prompt.flow != FlowKind::fpga) throw ConfigError("module header is only valid for the fpga flow");
    if (pdk && prompt.flow != FlowKind::analogue) throw ConfigError("PDK binding is only valid for the analogue flow");
    if (!id.empty()) {
        for (char c : id)
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_'))
                throw ConfigError("session id may only hold letters, digits, '-' and '_'");
    }
}

namespace {

std::string_view to_string(ProviderKind k) {
    switch (k) {
    case ProviderKind::scripted: return "scripted";
    case ProviderKind::header_echo: return "header_echo";
    case ProviderKind::http: return "http";
    }
    return "scripted";
}

ProviderKind provider_kind_from_string(std::string_view t) {
    if (t == "scripted") return ProviderKind::scripted;
    if (t == "header_echo" || t == "header-echo") return ProviderKind::header_echo;
    if (t == "http") return ProviderKind::http;
    throw ConfigError("unknown provider kind '" + std::string(t) + "'");
}

fs::path resolve(const fs::path& base, const std::string& p) {
    if (p.empty()) return {};
    fs::path path = p;
    if (path.is_relative() && !base.empty()) path = base / path;
    return path.lexically_normal();
}

json sweep_json(const SweepSpec& s) {
    json j{{"parameter", s.parameter}, {"low", s.low}, {"high", s.high}, {"count", s.count}, {"seed", s.seed}};
    j["exclusive_floor"] = s.exclusive_floor ? json(*s.exclusive_floor) : json(nullptr);
    return j;
}

} // namespace

json to_json(const SessionConfig& c) {
    json j{{"id", c.id},
           {"prompt", c.prompt},
           {"strategy", {{"kind", to_string(c.strategy.kind)}, {"n", c.strategy.n}}},
           {"adapter", adapters::to_json(c.adapter)},
           {"llm", c.llm},
           {"provider",
            {{"kind", to_string(c.provider.kind)},
             {"transcript", c.provider.transcript.string()},
             {"base_url", c.provider.http.base_url},
             {"path", c.provider.http.path},
             {"api_key_env", c.provider.http.api_key_env},
             {"timeout_s", c.provider.http.timeout_s}}},
           {"catalog", c.catalog.string()},
           {"workspace_root", c.workspace_root.string()},
           {"sessions_dir", c.sessions_dir.string()}};
    j["pdk"] = c.pdk ? source::to_json(*c.pdk) : json(nullptr);
    j["sweep"] = c.sweep ? sweep_json(*c.sweep) : json(nullptr);
    j["header"] = c.header ? json(*c.header) : json(nullptr);
    j["problem_id"] = c.problem_id ? json(*c.problem_id) : json(nullptr);
    return j;
}

SessionConfig session_config_from_json(const json& j, const fs::path& base_dir) {
    try {
        SessionConfig c;
        c.id = j.value("id", std::string{});
        c.prompt = j.at("prompt").get<PromptBundle>();
        const auto& st = j.at("strategy");
        c.strategy = Strategy::make(strategy_kind_from_string(st.at("kind").get<std::string>()), st.at("n").get<int>());
        json adapter = j.at("adapter");
        if (adapter.contains("fixtures") && adapter.at("fixtures").is_string())
            adapter["fixtures"] = resolve(base_dir, adapter.at("fixtures").get<std::string>()).string();
        c.adapter = adapters::adapter_spec_from_json(adapter);
        c.llm = j.at("llm").get<llm::LlmConfig>();
        if (j.contains("provider")) {
            const auto& p = j.at("provider");
            c.provider.kind = provider_kind_from_string(p.value("kind", std::string("scripted")));
            c.provider.transcript = resolve(base_dir, p.value("transcript", std::string{}));
            c.provider.http.base_url = p.value("base_url", c.provider.http.base_url);
            c.provider.http.path = p.value("path", c.provider.http.path);
            c.provider.http.api_key_env = p.value("api_key_env", c.provider.http.api_key_env);
            c.provider.http.timeout_s = p.value("timeout_s", c.provider.http.timeout_s);
        }
        c.catalog = resolve(base_dir, j.value("catalog", std::string{}));
        if (j.contains("pdk") && j.at("pdk").is_object()) c.pdk = source::binding_from_json(j.at("pdk"));
        if (j.contains("sweep") && j.at("sweep").is_object()) {
            const auto& s = j.at("sweep");
            SweepSpec sw;
            sw.parameter = s.at("parameter").get<std::string>();
            sw.low = s.at("low").get<double>();
            sw.high = s.at("high").get<double>();
            sw.count = s.at("count").get<int>();
            sw.seed = s.value("seed", std::uint64_t{0});
            if (s.contains("exclusive_floor") && s.at("exclusive_floor").is_number())
                sw.exclusive_floor = s.at("exclusive_floor").get<double>();
            c.sweep = sw;
        }
        if (j.contains("header") && j.at("header").is_string()) c.header = j.at("header").get<std::string>();
        if (j.contains("problem_id") && j.at("problem_id").is_number_integer()) c.problem_id = j.at("problem_id").get<int>();
        c.workspace_root = resolve(base_dir, j.value("workspace_root", std::string("workspaces")));
        c.sessions_dir = resolve(base_dir, j.value("sessions_dir", std::string("sessions")));
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad session config: ") + e.what());
    }
}

SessionConfig load_session_config(const fs::path& path) {
    json j;
    try {
        j = json::parse(util::read_file(path));
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse " + path.string() + ": " + e.what());
    }
    return session_config_from_json(j, path.parent_path());
}

std::string_view to_string(IterationStatus s) {
    switch (s) {
    case IterationStatus::ok: return "ok";
    case IterationStatus::failed_extraction: return "failed_extraction";
    case IterationStatus::failed_validation: return "failed_validation";
    case IterationStatus::failed_run: return "failed_run";
    }
    return "ok";
}

IterationStatus iteration_status_from_string(std::string_view t) {
    for (auto s : {IterationStatus::ok, IterationStatus::failed_extraction, IterationStatus::failed_validation,
                   IterationStatus::failed_run})
        if (to_string(s) == t) return s;
    throw ConfigError("unknown iteration status '" + std::string(t) + "'");
}

std::string_view to_string(Outcome o) {
    switch (o) {
    case Outcome::met: return "met";
    case Outcome::exhausted: return "exhausted";
    case Outcome::aborted: return "aborted";
    }
    return "aborted";
}

Outcome outcome_from_string(std::string_view t) {
    for (auto o : {Outcome::met, Outcome::exhausted, Outcome::aborted})
        if (to_string(o) == t) return o;
    throw ConfigError("unknown outcome '" + std::string(t) + "'");
}

std::string_view to_string(SessionState s) {
    switch (s) {
    case SessionState::running: return "running";
    case SessionState::awaiting_feedback: return "awaiting_feedback";
    case SessionState::done: return "done";
    }
    return "done";
}

SessionState session_state_from_string(std::string_view t) {
    for (auto s : {SessionState::running, SessionState::awaiting_feedback, SessionState::done})
        if (to_string(s) == t) return s;
    throw ConfigError("unknown session state '" + std::string(t) + "'");
}

const IterationRecord* SessionRecord::last_ok() const {
    for (auto it = iterations.rbegin(); it != iterations.rend(); ++it)
        if (it->status == IterationStatus::ok) return &*it;
    return nullptr;
}

namespace {

json bundle_json(const source::SourceBundle& b) {
    return json{{"flow", edaloop::to_string(b.flow)}, {"files", b.files}, {"repairs", b.repairs}};
}

source::SourceBundle bundle_from_json(const json& j) {
    source::SourceBundle b;
    b.flow = flow_from_string(j.at("flow").get<std::string>());
    b.files = j.at("files").get<std::map<std::string, std::string>>();
    b.repairs = j.value("repairs", std::vector<std::string>{});
    return b;
}

json metrics_json(const MetricMap& m) {
    json j = json::object();
    for (const auto& [k, v] : m) j[k] = v;
    return j;
}

MetricMap metrics_from_json(const json& j) {
    MetricMap m;
    for (auto it = j.begin(); it != j.end(); ++it) m[it.key()] = it.value().get<double>();
    return m;
}

} // namespace

json to_json(const IterationRecord& r, std::size_t max_points) {
    json j{{"index", r.index},
           {"exchange", r.exchange},
           {"violations", r.violations},
           {"metrics", metrics_json(r.metrics)},
           {"checks", r.checks},
           {"status", to_string(r.status)},
           {"error", r.error}};
    j["sources"] = r.sources ? bundle_json(*r.sources) : json(nullptr);
    j["run"] = r.run ? adapters::to_json(*r.run, max_points) : json(nullptr);
    j["feedback_out"] = r.feedback_out ? json(*r.feedback_out) : json(nullptr);
    json sweep = json::array();
    for (const auto& p : r.sweep)
        sweep.push_back({{"value", p.value},
                         {"run", adapters::to_json(p.run, max_points)},
                         {"metrics", metrics_json(p.metrics)},
                         {"checks", p.checks},
                         {"error", p.error}});
    j["sweep"] = sweep;
    j["selected_point"] = r.selected_point ? json(*r.selected_point) : json(nullptr);
    return j;
}

IterationRecord iteration_from_json(const json& j) {
    IterationRecord r;
    r.index = j.at("index").get<int>();
    r.exchange = j.at("exchange").get<llm::LlmExchange>();
    if (j.contains("sources") && j.at("sources").is_object()) r.sources = bundle_from_json(j.at("sources"));
    r.violations = j.value("violations", std::vector<netlist::Violation>{});
    if (j.contains("run") && j.at("run").is_object()) r.run = adapters::run_result_from_json(j.at("run"));
    r.metrics = metrics_from_json(j.value("metrics", json::object()));
    r.checks = j.value("checks", std::vector<ObjectiveCheck>{});
    r.status = iteration_status_from_string(j.at("status").get<std::string>());
    if (j.contains("feedback_out") && j.at("feedback_out").is_string()) r.feedback_out = j.at("feedback_out").get<std::string>();
    r.error = j.value("error", std::string{});
    for (const auto& p : j.value("sweep", json::array())) {
        SweepPoint sp;
        sp.value = p.at("value").get<double>();
        sp.run = adapters::run_result_from_json(p.at("run"));
        sp.metrics = metrics_from_json(p.value("metrics", json::object()));
        sp.checks = p.value("checks", std::vector<ObjectiveCheck>{});
        sp.error = p.value("error", std::string{});
        r.sweep.push_back(std::move(sp));
    }
    if (j.contains("selected_point") && j.at("selected_point").is_number())
        r.selected_point = j.at("selected_point").get<std::size_t>();
    return r;
}

json to_json(const SessionRecord& r, std::size_t max_points) {
    json its = json::array();
    for (const auto& it : r.iterations) its.push_back(to_json(it, max_points));
    json j{{"id", r.id},
           {"config", to_json(r.config)},
           {"iterations", its},
           {"state", to_string(r.state)},
           {"abort_reason", r.abort_reason}};
    j["outcome"] = r.outcome ? json(to_string(*r.outcome)) : json(nullptr);
    return j;
}

SessionRecord session_from_json(const json& j) {
    try {
        SessionRecord r;
        r.id = j.at("id").get<std::string>();
        r.config = session_config_from_json(j.at("config"));
        for (const auto& it : j.at("iterations")) r.iterations.push_back(iteration_from_json(it));
        r.state = session_state_from_string(j.value("state", std::string("done")));
        if (j.contains("outcome") && j.at("outcome").is_string())
            r.outcome = outcome_from_string(j.at("outcome").get<std::string>());
        r.abort_reason = j.value("abort_reason", std::string{});
        return r;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad session record: ") + e.what());
    }
}

fs::path session_path(const fs::path& sessions_dir, const std::string& id) {
    return sessions_dir / (id + ".json");
}

void save_session(const SessionRecord& record) {
    fs::create_directories(record.config.sessions_dir);
    util::write_file_atomic(session_path(record.config.sessions_dir, record.id), to_json(record).dump(1) + "\n");
}

SessionRecord load_session(const fs::path& path) {
    try {
        return session_from_json(json::parse(util::read_file(path)));
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse " + path.string() + ": " + e.what());
    }
}

std::string compose_feedback(const std::vector<ObjectiveCheck>& checks, const MetricMap& metrics,
                             const std::vector<netlist::Violation>& violations, std::string_view error,
                             std::string_view artifact) {
    std::string out;
    if (!checks.empty()) {
        out += "Objective results:\n";
        for (const auto& c : checks) {
            const auto& o = c.objective;
            const auto* info = default_metrics().find(o.metric);
            const std::string unit = info && !info->unit.empty() ? " " + info->unit : "";
            std::string target = std::string(to_string(o.comparator)) + " " + util::shortest(o.target) + unit;
            if (o.comparator == Comparator::approx && o.tolerance)
                target += " (+/- " + util::shortest(*o.tolerance) + unit + ")";
            if (o.at_frequency_hz) target += " at " + util::shortest(*o.at_frequency_hz) + " Hz";
            out += "- " + o.metric + ": ";
            out += c.measured ? util::fixed(*c.measured, 3) + unit : std::string("not measured");
            out += " vs target " + target + " (" + std::string(to_string(c.status));
            if (c.deviation_pct)
                out += std::string(", deviation ") + (*c.deviation_pct >= 0 ? "+" : "") + util::fixed(*c.deviation_pct, 1) + "%";
            out += ")\n";
        }
    }
    std::vector<std::string> extra;
    for (const auto& [name, value] : metrics) {
        bool covered = std::any_of(checks.begin(), checks.end(), [&](const auto& c) { return c.objective.metric == name; });
        if (!covered) extra.push_back(name + " = " + util::shortest(value));
    }
    if (!extra.empty()) out += "Other measurements: " + util::join(extra, ", ") + "\n";
    if (!violations.empty()) {
        out += "Connectivity violations:\n";
        for (const auto& v : violations) out += "- " + v.message() + "\n";
    }
    if (!error.empty()) out += "Error: " + std::string(error) + "\n";
    if (all_met(checks) && violations.empty() && error.empty())
        out += "All objectives are met. Confirm the design as final or propose a refinement.\n";
    out += "Return the full corrected " + std::string(artifact) + " in a single code block.";
    return out;
}

llm::History initial_history(const PromptBundle& prompt, const std::optional<std::string>& header) {
    std::string user = prompt.user_prompt;
    if (!prompt.objectives.empty()) {
        user += "\n\nDesign objectives:\n";
        for (const auto& o : prompt.objectives) user += "- " + o.describe() + "\n";
    }
    if (header) user += "\nModule header:\n```verilog\n" + *header + "\n```\n";
    if (prompt.clock_constraint) user += "\nClock: " + *prompt.clock_constraint + "\n";
    return {{llm::Role::system, prompt.system_prompt}, {llm::Role::user, user}};
}

MetricMap collect_metrics(const adapters::RunResult& run, const std::vector<Objective>& objectives) {
    MetricMap m;
    auto file = [&](const char* name) -> std::optional<std::string> {
        auto it = run.report_files.find(name);
        if (it == run.report_files.end() || !fs::exists(it->second)) return std::nullopt;
        return util::read_file(it->second);
    };
    if (auto t = file("metrics.txt")) m = reports::parse_metrics(*t).values();
    if (auto t = file("utilization.rpt")) m["lut_count"] = static_cast<double>(reports::parse_utilization(*t).lut);
    if (auto t = file("timing.rpt")) {
        auto tr = reports::parse_timing(*t);
        m["clock_freq_hz"] = tr.achieved_freq_hz();
        m["max_delay_ns"] = tr.data_path_ns;
    }
    if (auto t = file("power.rpt")) m["power_w"] = reports::parse_power(*t).total_w;

    if (run.waveforms && run.waveforms->has("s11_db")) {
        const auto& s11 = run.waveforms->at("s11_db");
        for (const auto& o : objectives) {
            if (o.metric != "s11_db" || !o.at_frequency_hz) continue;
            try {
                auto s = analysis::s11_summary(s11.x, s11.y, *o.at_frequency_hz);
                m["s11_db"] = s.s11_at_target_db;
                m.try_emplace("s11_min_db", s.s11_min_db);
                m.try_emplace("f_res_hz", s.f_res_hz);
            } catch (const SummaryError&) {
            }
        }
    }
    if (run.waveforms && run.waveforms->has("ac_mag_db") && run.waveforms->has("ac_phase_deg") && !m.count("dc_gain_db")) {
        const auto& mag = run.waveforms->at("ac_mag_db");
        const auto& ph = run.waveforms->at("ac_phase_deg");
        auto ac = analysis::ac_metrics(mag.x, mag.y, ph.y);
        m["dc_gain_db"] = ac.dc_gain_db;
        if (ac.ugb_hz) m["ugb_hz"] = *ac.ugb_hz;
        if (ac.pm_deg) m["phase_margin_deg"] = *ac.pm_deg;
    }
    return m;
}

std::string new_session_id() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);
    std::random_device rd;
    char tail[16];
    std::snprintf(tail, sizeof tail, "%06x", rd() & 0xffffffu);
    return std::string("s") + stamp + "-" + tail;
}

namespace {

netlist::Dialect dialect_for(FlowKind flow) {
    return flow == FlowKind::rf ? netlist::Dialect::ads_like : netlist::Dialect::spectre_like;
}

std::string design_file_for(const SessionConfig& c, const std::string& verilog) {
    switch (c.prompt.flow) {
    case FlowKind::analogue: return "deck.scs";
    case FlowKind::rf: return "design.net";
    case FlowKind::fpga: break;
    }
    try {
        return source::extract_module_header(verilog).module_name + ".v";
    } catch (const HeaderError&) {
        return "design.v";
    }
}

std::size_t met_count(const std::vector<ObjectiveCheck>& checks) {
    return static_cast<std::size_t>(
        std::count_if(checks.begin(), checks.end(), [](const auto& c) { return c.status == CheckStatus::met; }));
}

class Runner {
public:
    Runner(const SessionConfig& config, llm::Provider& provider, const SessionHooks& hooks)
        : cfg_(config), provider_(provider), hooks_(hooks) {}

    SessionRecord run() {
        cfg_.validate();
        if (cfg_.strategy.kind == StrategyKind::interactive && !hooks_.await_feedback)
            throw ConfigError("interactive sessions need a feedback source");
        catalog_ = cfg_.catalog.empty() ? netlist::Catalog::builtin() : netlist::Catalog::load(cfg_.catalog);
        if (cfg_.header) expected_header_ = source::extract_module_header(*cfg_.header);

        rec_.id = cfg_.id.empty() ? new_session_id() : cfg_.id;
        rec_.config = cfg_;
        rec_.config.id = rec_.id;
        publish();

        llm::History history = initial_history(cfg_.prompt, cfg_.header);
        for (int i = 1; i <= cfg_.strategy.n; ++i) {
            if (aborted()) return finish_aborted("aborted by request");
            IterationRecord it;
            it.index = i;
            try {
                it.exchange = llm::complete(history, cfg_.llm, provider_);
            } catch (const TransportError& e) {
                return finish_aborted(e.what());
            } catch (const EmptyResponseError& e) {
                return finish_aborted(e.what());
            }
            history.push_back({llm::Role::assistant, it.exchange.response});
            evaluate(it);

            const bool met = it.status == IterationStatus::ok && all_met(it.checks);
            const bool last = i == cfg_.strategy.n || (cfg_.strategy.kind == StrategyKind::until_met && met);
            const std::string artifact = cfg_.prompt.flow == FlowKind::fpga ? "Verilog module" : "netlist";
            std::string feedback = compose_feedback(it.checks, it.metrics, it.violations, it.error, artifact);
            rec_.iterations.push_back(std::move(it));
            if (last) break;

            if (cfg_.strategy.kind == StrategyKind::interactive) {
                rec_.state = SessionState::awaiting_feedback;
                publish();
                auto reply = hooks_.await_feedback(rec_);
                rec_.state = SessionState::running;
                if (!reply) return finish_aborted("aborted while awaiting feedback");
                if (util::trim(*reply).empty()) return finish_aborted("empty feedback");
                feedback = *reply;
            }
            rec_.iterations.back().feedback_out = feedback;
            history.push_back({llm::Role::user, feedback});
            publish();
        }
        const auto* ok = rec_.last_ok();
        rec_.outcome = ok && all_met(ok->checks) ? Outcome::met : Outcome::exhausted;
        rec_.state = SessionState::done;
        publish();
        return rec_;
    }

private:
    bool aborted() const { return hooks_.abort && hooks_.abort->load(); }

    SessionRecord finish_aborted(const std::string& why) {
        rec_.outcome = Outcome::aborted;
        rec_.abort_reason = why;
        rec_.state = SessionState::done;
        publish();
        return rec_;
    }

    void publish() {
        save_session(rec_);
        if (hooks_.on_update) hooks_.on_update(rec_);
    }

    void evaluate(IterationRecord& it) {
        const auto flow = cfg_.prompt.flow;
        std::string code;
        try {
            code = source::extract_code_block(it.exchange.response,
                                              flow == FlowKind::fpga ? source::BlockKind::verilog : source::BlockKind::netlist);
        } catch (const ExtractionError& e) {
            it.status = IterationStatus::failed_extraction;
            it.error = e.what();
            return;
        }

        source::SourceBundle bundle;
        bundle.flow = flow;
        const std::string design = design_file_for(cfg_, code);
        if (flow == FlowKind::fpga) {
            bundle.files[design] = code;
            if (cfg_.prompt.testbench) bundle.files["tb.v"] = *cfg_.prompt.testbench;
            if (cfg_.prompt.clock_constraint) {
                try {
                    bundle.files["constraints.xdc"] = source::make_constraints(*cfg_.prompt.clock_constraint) + "\n";
                } catch (const ConstraintError& e) {
                    it.sources = bundle;
                    it.status = IterationStatus::failed_validation;
                    it.error = e.what();
                    return;
                }
            }
            it.sources = bundle;
        } else {
            auto repaired = source::repair_syntax(code, dialect_for(flow));
            bundle.repairs = repaired.repairs;
            std::string text = repaired.text;
            bundle.files[design] = text;
            it.sources = bundle;
            try {
                auto nl = netlist::parse(text, dialect_for(flow));
                it.violations = netlist::validate(nl, catalog_);
                if (cfg_.pdk) text = source::bind_pdk(text, dialect_for(flow), *cfg_.pdk);
            } catch (const ParseError& e) {
                it.status = IterationStatus::failed_validation;
                it.error = e.what();
                return;
            } catch (const BindingError& e) {
                it.status = IterationStatus::failed_validation;
                it.error = e.what();
                return;
            }
            if (!it.violations.empty()) {
                it.status = IterationStatus::failed_validation;
                it.error = std::to_string(it.violations.size()) + " connectivity violation(s)";
                return;
            }
            // The mock evaluates the unbound deck; tools get the bound one.
            if (cfg_.adapter.mode == adapters::AdapterMode::external) bundle.files[design] = text;
        }

        if (cfg_.sweep) {
            run_sweep(it, bundle, design);
            return;
        }
        try {
            auto [result, metrics] = run_once(it.index, bundle, design);
            it.run = std::move(result);
            if (!it.run->all_passed()) {
                it.status = IterationStatus::failed_run;
                it.error = first_failure(*it.run);
                return;
            }
            it.metrics = std::move(metrics);
        } catch (const Error& e) {
            it.status = IterationStatus::failed_run;
            it.error = e.what();
            return;
        }
        for (const auto& o : cfg_.prompt.objectives) it.checks.push_back(evaluate_objective(o, it.metrics));
        it.status = IterationStatus::ok;
    }

    static std::string first_failure(const adapters::RunResult& r) {
        for (const auto& o : r.stage_outcomes)
            if (o.status == StageStatus::fail)
                return "stage " + std::string(edaloop::to_string(o.stage)) + " failed" + (o.note.empty() ? "" : ": " + o.note);
        return "run failed";
    }

    std::pair<adapters::RunResult, MetricMap> run_once(int iteration, const source::SourceBundle& bundle,
                                                       const std::string& design) {
        adapters::RunRequest req;
        req.sources = bundle;
        req.design_file = design;
        req.iteration = iteration;
        req.problem_id = cfg_.problem_id;
        req.expected_header = expected_header_;
        std::optional<std::pair<std::string, std::string>> driver;
        if (cfg_.adapter.mode == adapters::AdapterMode::external) {
            if (cfg_.prompt.flow == FlowKind::fpga) {
                std::vector<std::string> stages;
                for (auto s : cfg_.adapter.stages) stages.emplace_back(edaloop::to_string(s));
                std::string top = expected_header_ ? expected_header_->module_name : design.substr(0, design.size() - 2);
                driver = {{"run.tcl", adapters::gen_fpga_tcl(bundle, bundle.files.count("constraints.xdc") ? "constraints.xdc" : "",
                                                             cfg_.adapter.part_id, top, stages)}};
            } else {
                driver = {{"run.sh", adapters::gen_shell_driver(bundle, cfg_.adapter.stages)}};
            }
            req.script_name = driver->first;
        }
        auto ws = adapters::prepare_workspace(cfg_.workspace_root, rec_.id, iteration, bundle, driver);
        auto result = adapters::run(cfg_.adapter, ws, req);
        MetricMap metrics;
        if (result.all_passed()) metrics = collect_metrics(result, cfg_.prompt.objectives);
        return {std::move(result), std::move(metrics)};
    }

    void run_sweep(IterationRecord& it, const source::SourceBundle& bundle, const std::string& design) {
        const auto& sw = *cfg_.sweep;
        std::vector<double> values;
        if (sw.exclusive_floor)
            values = sample_sweep(sw, [floor = *sw.exclusive_floor](double v) { return v > floor; });
        else
            values = sample_sweep(sw);
        for (double v : values) {
            SweepPoint p;
            p.value = v;
            auto point_bundle = bundle;
            point_bundle.files[design] = substitute_parameter(bundle.files.at(design), sw.parameter, v);
            try {
                auto [result, metrics] = run_once(it.index, point_bundle, design);
                p.run = std::move(result);
                if (p.run.all_passed()) {
                    p.metrics = std::move(metrics);
                    for (const auto& o : cfg_.prompt.objectives) p.checks.push_back(evaluate_objective(o, p.metrics));
                } else {
                    p.error = first_failure(p.run);
                }
            } catch (const Error& e) {
                p.error = e.what();
            }
            it.sweep.push_back(std::move(p));
        }
        // The first point meeting everything stands for the iteration,
        // otherwise the passing point with the most objectives met.
        std::optional<std::size_t> best;
        for (std::size_t k = 0; k < it.sweep.size(); ++k) {
            const auto& p = it.sweep[k];
            if (!p.error.empty()) continue;
            if (all_met(p.checks)) {
                best = k;
                break;
            }
            if (!best || met_count(p.checks) > met_count(it.sweep[*best].checks)) best = k;
        }
        if (!best) {
            it.status = IterationStatus::failed_run;
            it.error = it.sweep.empty() ? "empty sweep" : "every sweep point failed: " + it.sweep.front().error;
            return;
        }
        it.selected_point = best;
        it.run = it.sweep[*best].run;
        it.metrics = it.sweep[*best].metrics;
        it.checks = it.sweep[*best].checks;
        it.status = IterationStatus::ok;
    }

    SessionConfig cfg_;
    llm::Provider& provider_;
    const SessionHooks& hooks_;
    netlist::Catalog catalog_;
    std::optional<source::ModuleHeader> expected_header_;
    SessionRecord rec_;
};

} // namespace

SessionRecord run_session(const SessionConfig& config, llm::Provider& provider, const SessionHooks& hooks) {
    return Runner(config, provider, hooks).run();
}

SessionRecord run_session(const SessionConfig& config, const SessionHooks& hooks) {
    auto provider = make_provider(config.provider);
    return run_session(config, *provider, hooks);
}

SessionRecord replay_session(const SessionRecord& record, const std::string& new_id) {
    auto cfg = record.config;
    cfg.id = new_id;
    if (cfg.strategy.kind == StrategyKind::interactive) {
        // Human replies come back from the record in order.
        auto replies = std::make_shared<std::vector<std::string>>();
        for (const auto& it : record.iterations)
            if (it.feedback_out) replies->push_back(*it.feedback_out);
        auto next = std::make_shared<std::size_t>(0);
        SessionHooks hooks;
        hooks.await_feedback = [replies, next](const SessionRecord&) -> std::optional<std::string> {
            if (*next >= replies->size()) return std::nullopt;
            return (*replies)[(*next)++];
        };
        return run_session(cfg, hooks);
    }
    return run_session(cfg);
}

std::map<std::string, std::string> sweep_tables(const IterationRecord& it, const std::string& parameter) {
    std::string curves = parameter + ",freq_hz,gain_db\n";
    std::string gain_pm = "point," + parameter + ",dc_gain_db,phase_margin_deg\n";
    std::string ugb_power = "point," + parameter + ",ugb_hz,power_w\n";
    auto cell = [](const MetricMap& m, const char* k) {
        auto f = m.find(k);
        return f == m.end() ? std::string{} : util::shortest(f->second);
    };
    for (std::size_t k = 0; k < it.sweep.size(); ++k) {
        const auto& p = it.sweep[k];
        const std::string v = util::shortest(p.value);
        if (p.run.waveforms && p.run.waveforms->has("ac_mag_db")) {
            const auto& t = p.run.waveforms->at("ac_mag_db");
            for (std::size_t i = 0; i < t.size(); ++i)
                curves += v + "," + util::shortest(t.x[i]) + "," + util::shortest(t.y[i]) + "\n";
        }
        const std::string idx = std::to_string(k + 1);
        gain_pm += idx + "," + v + "," + cell(p.metrics, "dc_gain_db") + "," + cell(p.metrics, "phase_margin_deg") + "\n";
        ugb_power += idx + "," + v + "," + cell(p.metrics, "ugb_hz") + "," + cell(p.metrics, "power_w") + "\n";
    }
    return {{"sweep_gain_curves.csv", curves}, {"sweep_gain_pm.csv", gain_pm}, {"sweep_ugb_power.csv", ugb_power}};
}

} // namespace edaloop::orchestrator
