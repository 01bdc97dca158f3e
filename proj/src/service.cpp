#include "edaloop/service.hpp"

#include <algorithm>
#include <condition_variable>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "edaloop/errors.hpp"
#include "edaloop/graph.hpp"
#include "edaloop/netlist.hpp"
#include "edaloop/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace edaloop::service {

namespace {

struct Job {
    std::mutex mu;
    std::condition_variable cv;
    bool awaiting = false;
    bool finished = false;
    std::optional<std::string> pending;
    std::atomic<bool> abort{false};
    std::thread thread;
};

Response error(int status, const std::string& message) {
    return {status, json{{"error", message}}};
}

std::vector<std::string> segments(const std::string& path) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : path.substr(0, path.find('?'))) {
        if (c == '/') {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

bool valid_id(const std::string& id) {
    if (id.empty()) return false;
    for (char c : id)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) return false;
    return true;
}

json checks_summary(const std::vector<ObjectiveCheck>& checks) {
    json arr = json::array();
    for (const auto& c : checks) arr.push_back(c);
    return arr;
}

std::optional<std::pair<int, json>> latest_graph(const orchestrator::SessionRecord& rec) {
    const auto flow = rec.config.prompt.flow;
    if (flow == FlowKind::fpga) return std::nullopt;
    const auto dialect = flow == FlowKind::rf ? netlist::Dialect::ads_like : netlist::Dialect::spectre_like;
    for (auto it = rec.iterations.rbegin(); it != rec.iterations.rend(); ++it) {
        if (!it->sources) continue;
        for (const auto& [name, text] : it->sources->files) {
            try {
                auto g = netlist::build_graph(netlist::parse(text, dialect));
                return std::make_pair(it->index, netlist::graph_json(g));
            } catch (const ParseError&) {
            }
        }
    }
    return std::nullopt;
}

} // namespace

struct Service::Impl {
    ServiceConfig cfg;
    std::mutex jobs_mu;
    std::map<std::string, std::shared_ptr<Job>> jobs;
    httplib::Server server;
    std::thread server_thread;

    explicit Impl(ServiceConfig c) : cfg(std::move(c)) {}

    std::optional<orchestrator::SessionRecord> load(const std::string& id) {
        if (!valid_id(id)) return std::nullopt;
        auto path = orchestrator::session_path(cfg.sessions_dir, id);
        if (!fs::exists(path)) return std::nullopt;
        return orchestrator::load_session(path);
    }

    std::shared_ptr<Job> job(const std::string& id) {
        std::lock_guard lock(jobs_mu);
        auto it = jobs.find(id);
        return it == jobs.end() ? nullptr : it->second;
    }

    Response create(const Request& req) {
        json body;
        try {
            body = json::parse(req.body);
        } catch (const json::exception& e) {
            return error(400, std::string("body is not JSON: ") + e.what());
        }
        orchestrator::SessionConfig config;
        try {
            config = orchestrator::session_config_from_json(body, cfg.config_base);
            config.sessions_dir = cfg.sessions_dir;
            config.workspace_root = cfg.workspace_root;
            if (config.id.empty()) config.id = orchestrator::new_session_id();
            config.validate();
        } catch (const Error& e) {
            return error(400, e.what());
        }
        if (fs::exists(orchestrator::session_path(cfg.sessions_dir, config.id)))
            return error(409, "session " + config.id + " already exists");

        auto j = std::make_shared<Job>();
        {
            std::lock_guard lock(jobs_mu);
            if (jobs.count(config.id)) return error(409, "session " + config.id + " already exists");
            jobs[config.id] = j;
        }
        // The record file exists before the response so GETs never race a 404.
        orchestrator::SessionRecord initial;
        initial.id = config.id;
        initial.config = config;
        orchestrator::save_session(initial);

        j->thread = std::thread([j, config] {
            orchestrator::SessionHooks hooks;
            hooks.abort = &j->abort;
            hooks.on_update = [j](const orchestrator::SessionRecord& rec) {
                std::lock_guard lock(j->mu);
                j->awaiting = rec.state == orchestrator::SessionState::awaiting_feedback;
            };
            hooks.await_feedback = [j](const orchestrator::SessionRecord&) -> std::optional<std::string> {
                std::unique_lock lock(j->mu);
                j->cv.wait(lock, [&] { return j->pending.has_value() || j->abort.load(); });
                j->awaiting = false;
                if (j->abort.load()) return std::nullopt;
                auto text = std::move(*j->pending);
                j->pending.reset();
                return text;
            };
            try {
                orchestrator::run_session(config, hooks);
            } catch (const std::exception& e) {
                orchestrator::SessionRecord rec;
                rec.id = config.id;
                rec.config = config;
                rec.state = orchestrator::SessionState::done;
                rec.outcome = orchestrator::Outcome::aborted;
                rec.abort_reason = e.what();
                try {
                    auto path = orchestrator::session_path(config.sessions_dir, config.id);
                    if (fs::exists(path)) {
                        auto saved = orchestrator::load_session(path);
                        rec.iterations = std::move(saved.iterations);
                    }
                    orchestrator::save_session(rec);
                } catch (const std::exception&) {
                }
            }
            std::lock_guard lock(j->mu);
            j->finished = true;
            j->awaiting = false;
            j->cv.notify_all();
        });
        return {201, json{{"id", config.id}, {"state", "running"}}};
    }

    Response list() {
        json arr = json::array();
        if (fs::is_directory(cfg.sessions_dir)) {
            std::vector<fs::path> files;
            for (const auto& e : fs::directory_iterator(cfg.sessions_dir))
                if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
            std::sort(files.begin(), files.end());
            for (const auto& f : files) {
                try {
                    auto rec = orchestrator::load_session(f);
                    arr.push_back({{"id", rec.id},
                                   {"flow", to_string(rec.config.prompt.flow)},
                                   {"strategy", orchestrator::to_string(rec.config.strategy.kind)},
                                   {"state", orchestrator::to_string(rec.state)},
                                   {"outcome", rec.outcome ? json(orchestrator::to_string(*rec.outcome)) : json(nullptr)},
                                   {"iterations", rec.iterations.size()}});
                } catch (const Error&) {
                }
            }
        }
        return {200, json{{"sessions", arr}}};
    }

    Response show(const orchestrator::SessionRecord& rec) {
        json its = json::array();
        for (const auto& it : rec.iterations) {
            json metrics = json::object();
            for (const auto& [k, v] : it.metrics) metrics[k] = v;
            its.push_back({{"index", it.index},
                           {"status", orchestrator::to_string(it.status)},
                           {"all_met", all_met(it.checks)},
                           {"metrics", metrics},
                           {"violations", it.violations.size()},
                           {"error", it.error},
                           {"prompt_tokens", it.exchange.prompt_tokens},
                           {"completion_tokens", it.exchange.completion_tokens},
                           {"latency_s", it.exchange.latency_s}});
        }
        json body{{"id", rec.id},
                  {"flow", to_string(rec.config.prompt.flow)},
                  {"strategy", {{"kind", orchestrator::to_string(rec.config.strategy.kind)}, {"n", rec.config.strategy.n}}},
                  {"state", orchestrator::to_string(rec.state)},
                  {"outcome", rec.outcome ? json(orchestrator::to_string(*rec.outcome)) : json(nullptr)},
                  {"abort_reason", rec.abort_reason},
                  {"iterations", its}};
        body["latest_checks"] = rec.iterations.empty() ? json::array() : checks_summary(rec.iterations.back().checks);
        auto g = latest_graph(rec);
        body["graph"] = g ? g->second : json(nullptr);
        return {200, body};
    }

    Response route(const Request& req) {
        if (!cfg.token.empty()) {
            auto it = std::find_if(req.headers.begin(), req.headers.end(),
                                   [](const auto& h) { return util::iequals(h.first, "X-Edaloop-Token"); });
            if (it == req.headers.end() || it->second != cfg.token) return error(401, "missing or wrong token");
        }
        const auto seg = segments(req.path);
        const auto& m = req.method;
        if (seg.size() == 2 && seg[0] == "bench" && seg[1] == "summaries" && m == "GET") return bench_summaries();
        if (seg.empty() || seg[0] != "sessions") return error(404, "no such endpoint");
        if (seg.size() == 1) {
            if (m == "POST") return create(req);
            if (m == "GET") return list();
            return error(405, "method not allowed");
        }
        const std::string& id = seg[1];
        auto rec = load(id);
        if (!rec) return error(404, "unknown session " + id);
        if (seg.size() == 2 && m == "GET") return show(*rec);
        if (seg.size() == 3 && seg[2] == "graph" && m == "GET") {
            auto g = latest_graph(*rec);
            if (!g) return error(404, "session " + id + " has no parsed netlist yet");
            auto body = g->second;
            body["iteration"] = g->first;
            return {200, body};
        }
        if (seg.size() == 4 && seg[2] == "iterations" && m == "GET") {
            auto n = util::parse_int(seg[3]);
            if (!n || *n < 1 || *n > static_cast<long long>(rec->iterations.size()))
                return error(404, "no iteration " + seg[3]);
            return {200, orchestrator::to_json(rec->iterations[static_cast<std::size_t>(*n - 1)], cfg.max_points)};
        }
        if (seg.size() == 3 && seg[2] == "feedback" && m == "POST") {
            auto j = job(id);
            if (util::trim(req.body).empty()) return error(400, "feedback is empty");
            if (!j) return error(409, "session " + id + " is not awaiting feedback");
            std::lock_guard lock(j->mu);
            if (!j->awaiting || j->pending) return error(409, "session " + id + " is not awaiting feedback");
            j->pending = req.body;
            j->cv.notify_all();
            return {202, json{{"id", id}, {"accepted", true}}};
        }
        if (seg.size() == 3 && seg[2] == "abort" && m == "POST") {
            auto j = job(id);
            if (!j || rec->state == orchestrator::SessionState::done) return error(409, "session " + id + " is not running");
            std::lock_guard lock(j->mu);
            if (j->finished) return error(409, "session " + id + " is not running");
            j->abort = true;
            j->cv.notify_all();
            return {202, json{{"id", id}, {"aborting", true}}};
        }
        return error(404, "no such endpoint");
    }

    Response bench_summaries() {
        json out = json::object();
        if (fs::is_directory(cfg.bench_dir)) {
            std::vector<fs::path> dirs;
            if (fs::exists(cfg.bench_dir / "summary.json")) dirs.push_back(cfg.bench_dir);
            for (const auto& e : fs::directory_iterator(cfg.bench_dir))
                if (e.is_directory() && fs::exists(e.path() / "summary.json")) dirs.push_back(e.path());
            for (const auto& d : dirs) {
                try {
                    out[d == cfg.bench_dir ? "." : d.filename().string()] = json::parse(util::read_file(d / "summary.json"));
                } catch (const json::exception&) {
                }
            }
        }
        return {200, json{{"summaries", out}}};
    }

    void install_routes() {
        auto bridge = [this](const httplib::Request& hreq, httplib::Response& hres) {
            Request req{hreq.method, hreq.path, hreq.body, {}};
            for (const auto& [k, v] : hreq.headers) req.headers[k] = v;
            auto res = route_safe(req);
            hres.status = res.status;
            hres.set_content(res.body.dump(), "application/json");
        };
        server.Get(R"(/.*)", bridge);
        server.Post(R"(/.*)", bridge);
        server.Put(R"(/.*)", bridge);
        server.Delete(R"(/.*)", bridge);
    }

    Response route_safe(const Request& req) {
        try {
            return route(req);
        } catch (const Error& e) {
            return error(400, e.what());
        } catch (const std::exception& e) {
            return error(500, e.what());
        }
    }

    void join_all() {
        std::map<std::string, std::shared_ptr<Job>> copy;
        {
            std::lock_guard lock(jobs_mu);
            copy = jobs;
        }
        for (auto& [id, j] : copy) {
            {
                std::lock_guard lock(j->mu);
                j->abort = true;
                j->cv.notify_all();
            }
            if (j->thread.joinable()) j->thread.join();
        }
    }
};

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {
    fs::create_directories(impl_->cfg.sessions_dir);
    impl_->install_routes();
}

Service::~Service() {
    stop();
    impl_->join_all();
}

Response Service::handle(const Request& request) {
    return impl_->route_safe(request);
}

bool Service::listen() {
    return impl_->server.listen(impl_->cfg.host, impl_->cfg.port);
}

int Service::start_background() {
    int port = impl_->server.bind_to_any_port(impl_->cfg.host);
    if (port <= 0) throw ConfigError("cannot bind a port on " + impl_->cfg.host);
    impl_->server_thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return port;
}

void Service::stop() {
    impl_->server.stop();
    if (impl_->server_thread.joinable()) impl_->server_thread.join();
}

void Service::wait(const std::string& id) {
    auto j = impl_->job(id);
    if (!j) return;
    std::unique_lock lock(j->mu);
    j->cv.wait(lock, [&] { return j->finished; });
}

} // namespace edaloop::service
