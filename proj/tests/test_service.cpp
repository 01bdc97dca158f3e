#include <gtest/gtest.h>

#include <chrono>
#include <thread>

#include <httplib.h>

#include "edaloop/bench.hpp"
#include "edaloop/graph.hpp"
#include "edaloop/service.hpp"
#include "edaloop/util.hpp"
#include "support.hpp"

using namespace edaloop;
using namespace edaloop::service;
using nlohmann::json;

namespace {

ServiceConfig config_in(const testsupport::TempDir& tmp, const std::string& base = "rf") {
    ServiceConfig c;
    c.sessions_dir = tmp / "sessions";
    c.workspace_root = tmp / "ws";
    c.bench_dir = tmp / "bench";
    c.config_base = testsupport::data(base);
    return c;
}

json rf_config(const std::string& id) {
    auto j = json::parse(util::read_file(testsupport::data("rf/session.json")));
    j["id"] = id;
    return j;
}

Response get(Service& s, const std::string& path) { return s.handle({"GET", path, "", {}}); }
Response post(Service& s, const std::string& path, const std::string& body) { return s.handle({"POST", path, body, {}}); }

bool wait_for_state(Service& s, const std::string& id, const std::string& state, std::size_t iterations) {
    for (int i = 0; i < 500; ++i) {
        auto r = get(s, "/sessions/" + id);
        if (r.status == 200 && r.body.at("state") == state && r.body.at("iterations").size() == iterations) return true;
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    return false;
}

} // namespace

TEST(Service, CreateRunAndInspect) {
    testsupport::TempDir tmp;
    Service svc(config_in(tmp));
    auto created = post(svc, "/sessions", rf_config("rf1").dump());
    ASSERT_EQ(created.status, 201) << created.body.dump();
    EXPECT_EQ(created.body.at("id"), "rf1");
    EXPECT_EQ(post(svc, "/sessions", rf_config("rf1").dump()).status, 409);
    svc.wait("rf1");

    auto shown = get(svc, "/sessions/rf1");
    ASSERT_EQ(shown.status, 200);
    EXPECT_EQ(shown.body.at("state"), "done");
    EXPECT_EQ(shown.body.at("outcome"), "met");
    EXPECT_EQ(shown.body.at("iterations").size(), 10u);
    EXPECT_EQ(shown.body.at("iterations")[0].at("status"), "failed_validation");
    EXPECT_EQ(shown.body.at("latest_checks")[0].at("status"), "met");

    auto list = get(svc, "/sessions");
    ASSERT_EQ(list.body.at("sessions").size(), 1u);
    EXPECT_EQ(list.body.at("sessions")[0].at("outcome"), "met");

    auto it9 = get(svc, "/sessions/rf1/iterations/9");
    ASSERT_EQ(it9.status, 200);
    EXPECT_NEAR(it9.body.at("metrics").at("s11_db").get<double>(), -11.3, 0.05);
    EXPECT_EQ(get(svc, "/sessions/rf1/iterations/11").status, 404);
    EXPECT_EQ(get(svc, "/sessions/rf1/iterations/x").status, 404);
}

TEST(Service, GraphMatchesBuildGraph) {
    testsupport::TempDir tmp;
    Service svc(config_in(tmp));
    ASSERT_EQ(post(svc, "/sessions", rf_config("g1").dump()).status, 201);
    svc.wait("g1");
    auto g = get(svc, "/sessions/g1/graph");
    ASSERT_EQ(g.status, 200);
    EXPECT_EQ(g.body.at("iteration"), 10);
    auto expected = netlist::build_graph(
        netlist::parse(util::read_file(testsupport::data("rf/netlists/iter_10.net")), netlist::Dialect::ads_like));
    EXPECT_EQ(g.body.at("nodes").size(), expected.nodes.size());
    EXPECT_EQ(g.body.at("edges").size(), expected.edges.size());
    EXPECT_EQ(get(svc, "/sessions/g1").body.at("graph").at("edges").size(), expected.edges.size());
}

TEST(Service, ErrorsAndConflicts) {
    testsupport::TempDir tmp;
    Service svc(config_in(tmp));
    EXPECT_EQ(get(svc, "/sessions/nope").status, 404);
    EXPECT_EQ(get(svc, "/sessions/..%2Fx").status, 404);
    EXPECT_EQ(get(svc, "/elsewhere").status, 404);
    EXPECT_EQ(post(svc, "/sessions", "{not json").status, 400);
    auto bad = rf_config("bad");
    bad["strategy"]["n"] = 0;
    EXPECT_EQ(post(svc, "/sessions", bad.dump()).status, 400);
    EXPECT_EQ(svc.handle({"DELETE", "/sessions", "", {}}).status, 405);

    ASSERT_EQ(post(svc, "/sessions", rf_config("done1").dump()).status, 201);
    svc.wait("done1");
    EXPECT_EQ(post(svc, "/sessions/done1/feedback", "wider please").status, 409);
    EXPECT_EQ(post(svc, "/sessions/done1/abort", "").status, 409);
    EXPECT_EQ(post(svc, "/sessions/done1/feedback", "  ").status, 400);
}

TEST(Service, InteractiveFeedbackFlow) {
    testsupport::TempDir tmp;
    Service svc(config_in(tmp));
    auto cfg = rf_config("chat");
    cfg["strategy"] = {{"kind", "interactive"}, {"n", 3}};
    ASSERT_EQ(post(svc, "/sessions", cfg.dump()).status, 201);
    ASSERT_TRUE(wait_for_state(svc, "chat", "awaiting_feedback", 1));
    auto accepted = post(svc, "/sessions/chat/feedback", "Use three terminals on Feed1.");
    EXPECT_EQ(accepted.status, 202);
    EXPECT_EQ(post(svc, "/sessions/chat/feedback", "again").status, 409);
    ASSERT_TRUE(wait_for_state(svc, "chat", "awaiting_feedback", 2));
    EXPECT_EQ(post(svc, "/sessions/chat/abort", "").status, 202);
    svc.wait("chat");
    auto done = get(svc, "/sessions/chat");
    EXPECT_EQ(done.body.at("outcome"), "aborted");
    auto first = get(svc, "/sessions/chat/iterations/1");
    EXPECT_EQ(first.body.at("feedback_out"), "Use three terminals on Feed1.");
}

TEST(Service, TokenRequiredWhenConfigured) {
    testsupport::TempDir tmp;
    auto c = config_in(tmp);
    c.token = "s3cret";
    Service svc(c);
    EXPECT_EQ(get(svc, "/sessions").status, 401);
    EXPECT_EQ(svc.handle({"GET", "/sessions", "", {{"X-Edaloop-Token", "wrong"}}}).status, 401);
    EXPECT_EQ(svc.handle({"GET", "/sessions", "", {{"x-edaloop-token", "s3cret"}}}).status, 200);
}

TEST(Service, BenchSummaries) {
    testsupport::TempDir tmp;
    auto problems = bench::augment(json::parse(util::read_file(testsupport::data("bench/base.json"))),
                                   bench::load_lut_policy(testsupport::data("bench/lut_policy.json")), 1);
    problems.resize(4);
    auto spec = adapters::adapter_spec_from_json(json::parse(util::read_file(testsupport::data("bench/adapter.json"))));
    spec.fixtures = testsupport::data("bench") / spec.fixtures;
    llm::HeaderEchoProvider provider;
    bench::BenchOptions opts;
    opts.workspace_root = tmp / "ws";
    opts.runs_per_problem = 2;
    auto report = bench::aggregate(bench::run_benchmark(problems, spec, {"offline"}, provider, opts));
    bench::write_aggregate(report, tmp / "bench" / "run_a");

    Service svc(config_in(tmp));
    auto r = get(svc, "/bench/summaries");
    ASSERT_EQ(r.status, 200);
    ASSERT_TRUE(r.body.at("summaries").contains("run_a"));
    EXPECT_EQ(r.body.at("summaries").at("run_a"), bench::summary_json(report));
}

TEST(Service, HttpRoundTrip) {
    testsupport::TempDir tmp;
    Service svc(config_in(tmp));
    int port = svc.start_background();
    httplib::Client client("127.0.0.1", port);
    auto created = client.Post("/sessions", rf_config("net1").dump(), "application/json");
    ASSERT_TRUE(created);
    EXPECT_EQ(created->status, 201);
    svc.wait("net1");
    auto shown = client.Get("/sessions/net1");
    ASSERT_TRUE(shown);
    EXPECT_EQ(shown->status, 200);
    EXPECT_EQ(json::parse(shown->body).at("outcome"), "met");
    auto missing = client.Get("/sessions/none");
    ASSERT_TRUE(missing);
    EXPECT_EQ(missing->status, 404);
    EXPECT_TRUE(json::parse(missing->body).contains("error"));
    svc.stop();
}
