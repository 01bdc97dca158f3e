#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "edaloop/core.hpp"
#include "edaloop/errors.hpp"
#include "edaloop/llm.hpp"
#include "oracles.hpp"

using namespace edaloop;
using namespace edaloop::llm;

TEST(Deviation, MatchesOracle) {
    struct Case {
        double result, target;
        bool magnitude;
    };
    const Case cases[]{{-16.7, -10, true}, {1.11e9, 1e9, false}, {-2.1, -10, true}, {45, 40, false},
                       {0.9, 1.2, false},  {-3, -10, true}};
    for (const auto& c : cases) {
        auto got = deviation_pct(c.result, c.target, c.magnitude);
        ASSERT_TRUE(got.has_value());
        EXPECT_NEAR(*got, oracle::deviation(c.result, c.target, c.magnitude), 1e-9);
    }
    EXPECT_NEAR(*deviation_pct(-16.7, -10, true), 67, 1e-9);
    EXPECT_NEAR(*deviation_pct(1.11e9, 1e9), 11, 1e-9);
    EXPECT_NEAR(*deviation_pct(-2.1, -10, true), -79, 1e-9);
    EXPECT_FALSE(deviation_pct(1, 0).has_value());
}

TEST(Objective, S11UsesMagnitudeDeviation) {
    auto o = Objective::make("s11_db", Comparator::at_most, -10, std::nullopt, 2.4e9);
    auto met = evaluate_objective(o, {{"s11_db", -16.7}});
    EXPECT_EQ(met.status, CheckStatus::met);
    EXPECT_NEAR(*met.deviation_pct, 67, 1e-9);
    auto unmet = evaluate_objective(o, {{"s11_db", -2.1}});
    EXPECT_EQ(unmet.status, CheckStatus::unmet);
    EXPECT_NEAR(*unmet.deviation_pct, -79, 1e-9);
    EXPECT_EQ(evaluate_objective(o, {}).status, CheckStatus::unmeasurable);
    EXPECT_THROW(Objective::make("s11_db", Comparator::at_most, -10), ConfigError);
}

TEST(Objective, ComparatorsAndApproxDefaultTolerance) {
    auto ge = Objective::make("dc_gain_db", Comparator::at_least, 40);
    EXPECT_EQ(evaluate_objective(ge, {{"dc_gain_db", 40}}).status, CheckStatus::met);
    EXPECT_EQ(evaluate_objective(ge, {{"dc_gain_db", 39.9}}).status, CheckStatus::unmet);
    auto ap = Objective::make("ugb_hz", Comparator::approx, 1e6);
    ASSERT_TRUE(ap.tolerance.has_value());
    EXPECT_DOUBLE_EQ(*ap.tolerance, 1e5);
    EXPECT_EQ(evaluate_objective(ap, {{"ugb_hz", 1.09e6}}).status, CheckStatus::met);
    EXPECT_EQ(evaluate_objective(ap, {{"ugb_hz", 1.11e6}}).status, CheckStatus::unmet);
    EXPECT_THROW(Objective::make("x", Comparator::approx, 0), ConfigError);
    EXPECT_THROW(Objective::make("", Comparator::at_least, 1), ConfigError);
    EXPECT_FALSE(all_met({}));
}

TEST(Objective, JsonRoundTrip) {
    auto o = Objective::make("s11_db", Comparator::at_most, -10, std::nullopt, 2.4e9);
    nlohmann::json j = o;
    EXPECT_EQ(j.at("comparator"), "<=");
    EXPECT_EQ(j.get<Objective>(), o);
    auto bad = nlohmann::json{{"metric", "dc_gain_db"}, {"comparator", "=="}, {"target", 1}};
    EXPECT_THROW(bad.get<Objective>(), ConfigError);
}

TEST(Registry, OpenForNewMetrics) {
    auto r = MetricRegistry::with_defaults();
    EXPECT_EQ(r.find("noise_figure_db"), nullptr);
    r.add("noise_figure_db", {"dB", true});
    auto o = Objective::make("noise_figure_db", Comparator::at_most, -3, std::nullopt, std::nullopt, r);
    auto c = evaluate_objective(o, {{"noise_figure_db", -6}}, r);
    EXPECT_EQ(c.status, CheckStatus::met);
    EXPECT_NEAR(*c.deviation_pct, 100, 1e-9);
}

TEST(PromptBundle, FpgaFieldsOnlyOnFpga) {
    PromptBundle p;
    p.flow = FlowKind::analogue;
    p.system_prompt = "s";
    p.user_prompt = "u";
    EXPECT_NO_THROW(p.validate());
    p.clock_constraint = "port=clk period=1";
    EXPECT_THROW(p.validate(), ConfigError);
    p.flow = FlowKind::fpga;
    EXPECT_NO_THROW(p.validate());
    p.user_prompt = "";
    EXPECT_THROW(p.validate(), ConfigError);
}

namespace {

History base_history() { return {{Role::system, "sys"}, {Role::user, "design a thing"}}; }

class FlakyProvider : public Provider {
public:
    explicit FlakyProvider(int failures) : failures_(failures) {}
    ProviderReply send(const History&, const LlmConfig&) override {
        ++calls;
        if (calls <= failures_) throw TransportError("down");
        return {"ok", 10, 2};
    }
    std::string name() const override { return "flaky"; }
    std::atomic<int> calls{0};

private:
    int failures_;
};

} // namespace

TEST(Scripted, TurnIndexedByAssistantCount) {
    auto turns = ScriptedProvider::parse_transcript(
        "{\"response\":\"one\",\"prompt_tokens\":5,\"completion_tokens\":1}\n{\"response\":\"two\"}\n");
    ScriptedProvider p(turns);
    LlmConfig cfg{"m"};
    auto h = base_history();
    auto first = complete(h, cfg, p);
    EXPECT_EQ(first.response, "one");
    EXPECT_EQ(first.token_source, TokenSource::provider_metadata);
    EXPECT_EQ(first.prompt_tokens, 5u);
    auto again = complete(h, cfg, p);
    EXPECT_EQ(again.response, "one");
    h = append_turn(h, "more", first);
    auto second = complete(h, cfg, p);
    EXPECT_EQ(second.response, "two");
    EXPECT_EQ(second.token_source, TokenSource::estimated);
    EXPECT_EQ(second.completion_tokens, estimate_tokens("two"));
    EXPECT_EQ(ScriptedProvider::parse_transcript(ScriptedProvider::format_transcript(turns)).size(), 2u);
}

TEST(Complete, RetriesTransportErrors) {
    FlakyProvider p(2);
    auto ex = complete(base_history(), {"m"}, p, {3, std::chrono::milliseconds(1)});
    EXPECT_EQ(ex.response, "ok");
    EXPECT_EQ(p.calls, 3);
    FlakyProvider dead(10);
    try {
        complete(base_history(), {"m"}, dead, {3, std::chrono::milliseconds(1)});
        FAIL();
    } catch (const TransportError& e) {
        EXPECT_EQ(e.attempts(), 3);
    }
}

TEST(Complete, EmptyReplyAndBadHistory) {
    ScriptedProvider p({TranscriptTurn{"   \n"}});
    EXPECT_THROW(complete(base_history(), {"m"}, p), EmptyResponseError);
    EXPECT_THROW(complete({{Role::user, "x"}}, {"m"}, p), ConfigError);
    EXPECT_THROW(complete({{Role::system, "a"}, {Role::system, "b"}}, {"m"}, p), ConfigError);
}

TEST(Tokens, CeilQuarterBytes) {
    EXPECT_EQ(estimate_tokens(""), 0u);
    EXPECT_EQ(estimate_tokens("abcd"), 1u);
    EXPECT_EQ(estimate_tokens("abcde"), 2u);
}

TEST(HeaderEcho, EchoesModuleHeader) {
    HeaderEchoProvider p;
    History h{{Role::system, "s"}, {Role::user, "Implement:\nmodule adder(input [7:0] a, b, output [8:0] s);\n"}};
    auto r = p.send(h, {"m"});
    EXPECT_NE(r.text.find("module adder(input [7:0] a, b, output [8:0] s);"), std::string::npos);
    EXPECT_NE(r.text.find("endmodule"), std::string::npos);
}

TEST(Http, RoundTripAgainstLocalServer) {
    httplib::Server server;
    std::string seen_auth;
    nlohmann::json seen_body;
    std::atomic<int> hits{0};
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        if (hits++ == 0) {
            res.status = 503;
            return;
        }
        seen_auth = req.get_header_value("Authorization");
        seen_body = nlohmann::json::parse(req.body);
        nlohmann::json reply{{"choices", {{{"message", {{"role", "assistant"}, {"content", "hello"}}}}}},
                             {"usage", {{"prompt_tokens", 12}, {"completion_tokens", 3}}}};
        res.set_content(reply.dump(), "application/json");
    });
    server.Post("/reject", [](const httplib::Request&, httplib::Response& res) { res.status = 400; });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    ::setenv("EDALOOP_TEST_KEY", "secret", 1);
    HttpProvider::Settings s;
    s.base_url = "http://127.0.0.1:" + std::to_string(port);
    s.api_key_env = "EDALOOP_TEST_KEY";
    s.timeout_s = 5;
    HttpProvider p(s);
    LlmConfig cfg{"model-x", 256, 0.2, std::nullopt};
    auto ex = complete(base_history(), cfg, p, {3, std::chrono::milliseconds(1)});
    EXPECT_EQ(ex.response, "hello");
    EXPECT_EQ(ex.prompt_tokens, 12u);
    EXPECT_EQ(ex.token_source, TokenSource::provider_metadata);
    EXPECT_EQ(hits, 2);
    EXPECT_EQ(seen_auth, "Bearer secret");
    EXPECT_EQ(seen_body.at("model"), "model-x");
    EXPECT_EQ(seen_body.at("max_tokens"), 256);
    EXPECT_FALSE(seen_body.contains("top_p"));
    EXPECT_EQ(seen_body.at("messages").size(), 2u);

    s.path = "/reject";
    HttpProvider rejecting(s);
    EXPECT_THROW(complete(base_history(), cfg, rejecting, {3, std::chrono::milliseconds(1)}), ConfigError);

    server.stop();
    t.join();
}
