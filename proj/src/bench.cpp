#include "edaloop/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <set>
#include <thread>

#include "edaloop/errors.hpp"
#include "edaloop/reports.hpp"
#include "edaloop/source_prep.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace edaloop::bench {

json to_json(const BenchProblem& p) {
    json j{{"problem_id", p.problem_id},     {"category", p.category},   {"top_module", p.top_module},
           {"description", p.description},   {"header", p.header},       {"testbench", p.testbench},
           {"lut_objective", p.lut_objective}};
    if (p.timing.kind == TimingKind::max_delay_ns) j["max_delay_ns"] = p.timing.value;
    else j["clock_freq_hz"] = p.timing.value;
    if (p.clock_attr) j["clock_attr"] = *p.clock_attr;
    return j;
}

FieldMapping FieldMapping::load(const fs::path& path) {
    try {
        auto j = json::parse(util::read_file(path));
        FieldMapping m;
        m.fields = (j.contains("fields") ? j.at("fields") : j).get<std::map<std::string, std::string>>();
        return m;
    } catch (const json::exception& e) {
        throw ConfigError("bad field mapping " + path.string() + ": " + e.what());
    }
}

json FieldMapping::apply(const json& entry) const {
    if (!entry.is_object()) return entry;
    json out = entry;
    for (const auto& [ours, theirs] : fields) {
        if (!entry.contains(theirs) || ours == theirs) continue;
        out[ours] = entry.at(theirs);
        out.erase(theirs);
    }
    return out;
}

namespace {

const json& entries_of(const json& j) {
    if (j.is_array()) return j;
    if (j.is_object() && j.contains("problems") && j.at("problems").is_array()) return j.at("problems");
    throw DatasetError(0, "problems", "expected an array of problems");
}

std::string text_field(const json& e, std::size_t i, const char* name, bool allow_empty = false) {
    if (!e.contains(name)) throw DatasetError(i, name, "missing");
    if (!e.at(name).is_string()) throw DatasetError(i, name, "must be text");
    auto s = e.at(name).get<std::string>();
    if (!allow_empty && util::trim(s).empty()) throw DatasetError(i, name, "is empty");
    return s;
}

std::optional<std::string> clock_port(const source::ModuleHeader& h) {
    for (const auto& p : h.ports) {
        auto n = util::to_lower(p.name);
        if (p.direction == source::PortDirection::input && p.width == 1 && (n == "clk" || n == "clock" || n.find("clk") != std::string::npos))
            return p.name;
    }
    return std::nullopt;
}

BenchProblem problem_from_entry(const json& e, std::size_t i) {
    if (!e.is_object()) throw DatasetError(i, "", "problem must be an object");
    BenchProblem p;
    if (!e.contains("problem_id")) throw DatasetError(i, "problem_id", "missing");
    if (!e.at("problem_id").is_number_integer()) throw DatasetError(i, "problem_id", "must be an integer");
    p.problem_id = e.at("problem_id").get<int>();
    if (p.problem_id < 1) throw DatasetError(i, "problem_id", "must be positive");
    p.category = text_field(e, i, "category");
    p.top_module = text_field(e, i, "top_module");
    p.description = text_field(e, i, "description");
    p.header = text_field(e, i, "header");
    p.testbench = text_field(e, i, "testbench", true);
    if (!e.contains("lut_objective")) throw DatasetError(i, "lut_objective", "missing");
    if (!e.at("lut_objective").is_number_integer() || e.at("lut_objective").get<long long>() < 0)
        throw DatasetError(i, "lut_objective", "must be a non-negative integer");
    p.lut_objective = e.at("lut_objective").get<long long>();

    const bool has_delay = e.contains("max_delay_ns") && !e.at("max_delay_ns").is_null();
    const bool has_clock = e.contains("clock_freq_hz") && !e.at("clock_freq_hz").is_null();
    if (has_delay == has_clock) throw DatasetError(i, "timing", "exactly one of max_delay_ns and clock_freq_hz is required");
    const char* tname = has_delay ? "max_delay_ns" : "clock_freq_hz";
    if (!e.at(tname).is_number() || !(e.at(tname).get<double>() > 0)) throw DatasetError(i, tname, "must be a positive number");
    p.timing = {has_delay ? TimingKind::max_delay_ns : TimingKind::clock_freq_hz, e.at(tname).get<double>()};

    const bool has_attr = e.contains("clock_attr") && e.at("clock_attr").is_string();
    if (has_attr != has_clock) throw DatasetError(i, "clock_attr", "required exactly when clock_freq_hz is given");
    if (has_attr) {
        p.clock_attr = e.at("clock_attr").get<std::string>();
        try {
            source::parse_clock_attr(*p.clock_attr);
        } catch (const ConstraintError& err) {
            throw DatasetError(i, "clock_attr", err.what());
        }
    }
    try {
        auto h = source::extract_module_header(p.header);
        if (h.module_name != p.top_module)
            throw DatasetError(i, "header", "module '" + h.module_name + "' differs from top_module");
    } catch (const HeaderError& err) {
        throw DatasetError(i, "header", err.what());
    }
    return p;
}

} // namespace

std::vector<BenchProblem> problems_from_json(const json& j, const FieldMapping* mapping) {
    const auto& entries = entries_of(j);
    if (entries.empty()) throw DatasetError(0, "problems", "dataset is empty");
    std::vector<BenchProblem> out;
    std::set<int> ids;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        auto p = problem_from_entry(mapping ? mapping->apply(entries[i]) : entries[i], i);
        if (!ids.insert(p.problem_id).second)
            throw DatasetError(i, "problem_id", "duplicate id " + std::to_string(p.problem_id));
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<BenchProblem> load_dataset(const fs::path& path, const FieldMapping* mapping) {
    json j;
    try {
        j = json::parse(util::read_file(path));
    } catch (const json::exception& e) {
        throw DatasetError(0, "", std::string("not valid JSON: ") + e.what());
    }
    return problems_from_json(j, mapping);
}

json dataset_json(const std::vector<BenchProblem>& problems) {
    json arr = json::array();
    for (const auto& p : problems) arr.push_back(to_json(p));
    return json{{"problems", arr}};
}

double draw_max_delay_ns(util::SeededRng& rng) {
    return std::round(rng.uniform(1.0, 10.0) * 100.0) / 100.0;
}

int draw_clock_mhz(util::SeededRng& rng) {
    return 100 + 50 * static_cast<int>(rng.index(19));
}

std::vector<BenchProblem> augment(const json& base, const std::map<std::string, long long>& lut_policy,
                                  std::uint64_t seed, const FieldMapping* mapping) {
    const auto& entries = entries_of(base);
    if (entries.empty()) throw DatasetError(0, "problems", "dataset is empty");

    struct Raw {
        std::size_t index;
        json entry;
        std::string category;
    };
    std::vector<std::string> category_order;
    std::vector<Raw> raws;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        json e = mapping ? mapping->apply(entries[i]) : entries[i];
        if (!e.is_object()) throw DatasetError(i, "", "problem must be an object");
        auto cat = text_field(e, i, "category");
        if (std::find(category_order.begin(), category_order.end(), cat) == category_order.end())
            category_order.push_back(cat);
        raws.push_back({i, std::move(e), std::move(cat)});
    }
    std::stable_sort(raws.begin(), raws.end(), [&](const Raw& a, const Raw& b) {
        auto pa = std::find(category_order.begin(), category_order.end(), a.category);
        auto pb = std::find(category_order.begin(), category_order.end(), b.category);
        return pa < pb;
    });

    util::SeededRng rng(seed);
    std::vector<BenchProblem> out;
    int next_id = 1;
    for (const auto& r : raws) {
        BenchProblem p;
        p.problem_id = next_id++;
        p.category = r.category;
        p.top_module = text_field(r.entry, r.index, "top_module");
        p.description = text_field(r.entry, r.index, "description");
        p.header = text_field(r.entry, r.index, "header");
        p.testbench = text_field(r.entry, r.index, "testbench", true);
        auto lut = lut_policy.find(p.top_module);
        if (lut == lut_policy.end()) throw DatasetError(r.index, "lut_objective", "no policy entry for " + p.top_module);
        p.lut_objective = lut->second;
        source::ModuleHeader h;
        try {
            h = source::extract_module_header(p.header);
        } catch (const HeaderError& e) {
            throw DatasetError(r.index, "header", e.what());
        }
        if (auto clk = clock_port(h)) {
            const int mhz = draw_clock_mhz(rng);
            p.timing = {TimingKind::clock_freq_hz, mhz * 1e6};
            p.clock_attr = source::clock_attr_for(*clk, mhz * 1e6);
        } else {
            p.timing = {TimingKind::max_delay_ns, draw_max_delay_ns(rng)};
        }
        out.push_back(std::move(p));
    }
    return out;
}

std::map<std::string, long long> load_lut_policy(const fs::path& path) {
    try {
        auto j = json::parse(util::read_file(path));
        const auto& m = j.contains("lut_objectives") ? j.at("lut_objectives") : j;
        auto policy = m.get<std::map<std::string, long long>>();
        for (const auto& [k, v] : policy)
            if (v < 0) throw ConfigError("negative LUT objective for " + k);
        return policy;
    } catch (const json::exception& e) {
        throw ConfigError("bad LUT policy " + path.string() + ": " + e.what());
    }
}

fs::path augment_dataset(const fs::path& base_path, const fs::path& policy_path, std::uint64_t seed,
                         const fs::path& out_path, const FieldMapping* mapping) {
    json base;
    try {
        base = json::parse(util::read_file(base_path));
    } catch (const json::exception& e) {
        throw DatasetError(0, "", std::string("base dataset is not valid JSON: ") + e.what());
    }
    auto problems = augment(base, load_lut_policy(policy_path), seed, mapping);
    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    util::write_file(out_path, dataset_json(problems).dump(2) + "\n");
    return out_path;
}

const std::string& default_system_prompt() {
    static const std::string s =
        "You are an FPGA design engineer writing synthesizable Verilog-2001 for AMD Vivado.\n"
        "Rules: keep the given module header exactly (name, port names, directions, widths); "
        "use non-blocking assignments in clocked always blocks and blocking ones in combinational blocks; "
        "no initial blocks or delays in the design; no vendor primitives.\n"
        "Return the complete module in one ```verilog code block.";
    return s;
}

std::string problem_prompt(const BenchProblem& p) {
    std::string s = "Problem " + std::to_string(p.problem_id) + " (" + p.category + ").\n";
    s += p.description + "\n\nDesign objectives:\n";
    s += "- LUT count <= " + std::to_string(p.lut_objective) + "\n";
    if (p.timing.kind == TimingKind::max_delay_ns)
        s += "- maximum delay <= " + util::shortest(p.timing.value) + " ns\n";
    else
        s += "- clock frequency >= " + util::shortest(p.timing.value / 1e6) + " MHz\n";
    s += "\nModule header:\n```verilog\n" + p.header + "\n```\n";
    return s;
}

namespace {

std::optional<std::string> read_report(const adapters::RunResult& r, const char* name) {
    auto it = r.report_files.find(name);
    if (it == r.report_files.end() || !fs::exists(it->second)) return std::nullopt;
    return util::read_file(it->second);
}

} // namespace

BenchRunLog run_problem(const BenchProblem& problem, int run, const adapters::AdapterSpec& adapter,
                        const llm::LlmConfig& llm_config, llm::Provider& provider, const BenchOptions& options) {
    BenchRunLog log;
    log.problem_id = problem.problem_id;
    log.category = problem.category;
    log.run = run;
    log.top_module = problem.top_module;
    if (problem.clock_attr) log.clock_constraint = *problem.clock_attr;

    try {
        llm::History history{{llm::Role::system, options.system_prompt}, {llm::Role::user, problem_prompt(problem)}};
        auto ex = llm::complete(history, llm_config, provider);
        log.prompt_tokens = ex.prompt_tokens;
        log.completion_tokens = ex.completion_tokens;
        log.llm_time_s = ex.latency_s;

        std::string code;
        try {
            code = source::extract_code_block(ex.response, source::BlockKind::verilog);
        } catch (const ExtractionError& e) {
            log.note = std::string("extraction failed: ") + e.what();
            log.simulate = StageStatus::fail;
            return log;
        }
        log.generated_source = code;

        source::SourceBundle bundle;
        bundle.flow = FlowKind::fpga;
        const std::string design = problem.top_module + ".v";
        bundle.files[design] = code;
        if (!problem.testbench.empty()) bundle.files["tb.v"] = problem.testbench;
        if (problem.clock_attr) bundle.files["constraints.xdc"] = source::make_constraints(*problem.clock_attr) + "\n";

        adapters::RunRequest req;
        req.sources = bundle;
        req.design_file = design;
        req.problem_id = problem.problem_id;
        req.run_index = run;
        req.expected_header = source::extract_module_header(problem.header);
        std::optional<std::pair<std::string, std::string>> driver;
        if (adapter.mode == adapters::AdapterMode::external) {
            std::vector<std::string> stages;
            for (auto s : adapter.stages) stages.emplace_back(to_string(s));
            driver = {{"run.tcl", adapters::gen_fpga_tcl(bundle, problem.clock_attr ? "constraints.xdc" : "",
                                                         adapter.part_id, problem.top_module, stages)}};
            req.script_name = "run.tcl";
        }
        auto ws = adapters::prepare_workspace(options.workspace_root, "bench-p" + std::to_string(problem.problem_id), run,
                                              bundle, driver);
        auto result = adapters::run(adapter, ws, req);

        for (const auto& o : result.stage_outcomes) log.tool_time_s += o.duration_s;
        // A design that never elaborates cannot simulate.
        log.simulate = result.status(Stage::instantiate) == StageStatus::fail ? StageStatus::fail
                                                                             : result.status(Stage::simulate);
        log.synthesize = result.status(Stage::synthesize);
        log.implement = result.status(Stage::implement);
        log.errors = reports::scan_log(result.log_text);

        if (log.implement == StageStatus::pass) {
            if (auto t = read_report(result, "utilization.rpt")) log.utilization = reports::parse_utilization(*t);
            if (auto t = read_report(result, "timing.rpt")) log.timing = reports::parse_timing(*t);
            if (auto t = read_report(result, "power.rpt")) log.power = reports::parse_power(*t);
            log.lut_objective_met = log.utilization && log.utilization->lut <= problem.lut_objective;
            if (problem.timing.kind == TimingKind::clock_freq_hz)
                log.timing_objective_met = log.timing && log.timing->achieved_freq_hz() >= problem.timing.value;
            else
                log.timing_objective_met = log.timing && log.timing->data_path_ns <= problem.timing.value;
        } else if (log.synthesize == StageStatus::pass) {
            if (auto t = read_report(result, "utilization_synth.rpt")) log.utilization = reports::parse_utilization(*t);
        }
    } catch (const std::exception& e) {
        log.note = e.what();
    }
    return log;
}

std::vector<BenchRunLog> run_benchmark(const std::vector<BenchProblem>& problems, const adapters::AdapterSpec& adapter,
                                       const llm::LlmConfig& llm_config, llm::Provider& provider,
                                       const BenchOptions& options) {
    if (adapter.flow != FlowKind::fpga) throw ConfigError("benchmark runs need an fpga adapter");
    adapter.validate();
    llm_config.validate();
    if (options.runs_per_problem < 1) throw ConfigError("runs per problem must be at least 1");
    if (problems.empty()) throw ConfigError("no problems to run");

    std::vector<std::pair<std::size_t, int>> jobs;
    for (std::size_t i = 0; i < problems.size(); ++i)
        for (int r = 1; r <= options.runs_per_problem; ++r) jobs.emplace_back(i, r);
    std::vector<BenchRunLog> logs(jobs.size());

    int workers = options.jobs > 0 ? options.jobs
                                   : std::min(4, std::max(1, static_cast<int>(std::thread::hardware_concurrency())));
    workers = std::min<int>(workers, static_cast<int>(jobs.size()));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t k; (k = next.fetch_add(1)) < jobs.size();)
            logs[k] = run_problem(problems[jobs[k].first], jobs[k].second, adapter, llm_config, provider, options);
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    std::sort(logs.begin(), logs.end(), [](const auto& a, const auto& b) {
        return std::tie(a.problem_id, a.run) < std::tie(b.problem_id, b.run);
    });
    return logs;
}

void write_logs(const std::vector<BenchRunLog>& logs, const fs::path& dir) {
    fs::create_directories(dir);
    for (const auto& l : logs) {
        json j = l;
        util::write_file(dir / ("p" + std::to_string(l.problem_id) + "_r" + std::to_string(l.run) + ".json"),
                         j.dump(2) + "\n");
    }
}

std::vector<BenchRunLog> load_logs(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw ConfigError("log directory " + dir.string() + " does not exist");
    std::vector<BenchRunLog> logs;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file() || e.path().extension() != ".json") continue;
        try {
            logs.push_back(json::parse(util::read_file(e.path())).get<BenchRunLog>());
        } catch (const json::exception& err) {
            throw ConfigError("bad run log " + e.path().string() + ": " + err.what());
        }
    }
    std::sort(logs.begin(), logs.end(), [](const auto& a, const auto& b) {
        return std::tie(a.problem_id, a.run) < std::tie(b.problem_id, b.run);
    });
    return logs;
}

const analysis::PassRateMatrix& AggregateReport::matrix(BenchStage stage) const {
    for (const auto& m : matrices)
        if (m.stage == stage) return m;
    throw AggregationError("no matrix for stage " + std::string(to_string(stage)));
}

AggregateReport aggregate(const std::vector<BenchRunLog>& logs) {
    AggregateReport r;
    r.log_count = logs.size();
    for (auto s : all_bench_stages()) r.matrices.push_back(analysis::pass_rate_matrix(logs, s));
    std::map<std::string, std::array<std::vector<double>, 4>> by_cat;
    for (const auto& l : logs) {
        auto& v = by_cat[l.category];
        v[0].push_back(l.llm_time_s);
        v[1].push_back(l.tool_time_s);
        v[2].push_back(l.llm_time_s + l.tool_time_s);
        v[3].push_back(static_cast<double>(l.completion_tokens));
    }
    for (auto& [cat, v] : by_cat)
        r.categories.push_back({cat, analysis::summary_stats(v[0]), analysis::summary_stats(v[1]),
                                analysis::summary_stats(v[2]), analysis::summary_stats(v[3])});
    return r;
}

std::string matrix_long_csv(const AggregateReport& report) {
    std::string out = "stage,category,problem_id,successes,runs\n";
    for (const auto& m : report.matrices)
        for (const auto& c : m.cells)
            out += std::string(to_string(m.stage)) + "," + c.category + "," + std::to_string(c.problem_id) + "," +
                   std::to_string(c.successes) + "," + std::to_string(m.runs_per_problem) + "\n";
    return out;
}

std::string matrix_grid_csv(const analysis::PassRateMatrix& m) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<std::string>> rows;
    for (const auto& c : m.cells) {
        if (!rows.count(c.category)) order.push_back(c.category);
        rows[c.category].push_back(std::to_string(c.problem_id) + ":" + std::to_string(c.successes));
    }
    std::string out = "category,cells\n";
    for (const auto& cat : order) out += cat + "," + util::join(rows[cat], ",") + "\n";
    return out;
}

std::string category_stats_csv(const AggregateReport& report) {
    std::string out = "category,quantity,mean,min,p25,p50,p75,max\n";
    auto row = [&](const std::string& cat, const char* q, const analysis::SummaryStats& s) {
        out += cat + "," + q + "," + util::shortest(s.mean) + "," + util::shortest(s.min) + "," + util::shortest(s.p25) +
               "," + util::shortest(s.p50) + "," + util::shortest(s.p75) + "," + util::shortest(s.max) + "\n";
    };
    for (const auto& c : report.categories) {
        row(c.category, "llm_time_s", c.llm_time_s);
        row(c.category, "tool_time_s", c.tool_time_s);
        row(c.category, "total_time_s", c.total_time_s);
        row(c.category, "completion_tokens", c.completion_tokens);
    }
    return out;
}

json summary_json(const AggregateReport& report) {
    json stages = json::object();
    for (const auto& m : report.matrices) stages[std::string(to_string(m.stage))] = analysis::to_json(m);
    json cats = json::array();
    for (const auto& c : report.categories)
        cats.push_back({{"category", c.category},
                        {"llm_time_s", analysis::to_json(c.llm_time_s)},
                        {"tool_time_s", analysis::to_json(c.tool_time_s)},
                        {"total_time_s", analysis::to_json(c.total_time_s)},
                        {"completion_tokens", analysis::to_json(c.completion_tokens)}});
    return json{{"log_count", report.log_count}, {"stages", stages}, {"categories", cats}};
}

void write_aggregate(const AggregateReport& report, const fs::path& dir) {
    fs::create_directories(dir);
    util::write_file(dir / "summary.json", summary_json(report).dump(2) + "\n");
    util::write_file(dir / "pass_rates.csv", matrix_long_csv(report));
    util::write_file(dir / "stats.csv", category_stats_csv(report));
    for (const auto& m : report.matrices)
        util::write_file(dir / ("grid_" + std::string(to_string(m.stage)) + ".csv"), matrix_grid_csv(m));
}

} // namespace edaloop::bench
