#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "edaloop/errors.hpp"
#include "edaloop/orchestrator.hpp"
#include "edaloop/util.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace edaloop;
using namespace edaloop::orchestrator;

namespace {

SessionConfig load_into(const std::string& rel, const testsupport::TempDir& tmp) {
    auto cfg = load_session_config(testsupport::data(rel));
    cfg.workspace_root = tmp / "ws";
    cfg.sessions_dir = tmp / "sessions";
    return cfg;
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

SessionConfig tiny_rf(const testsupport::TempDir& tmp) {
    auto cfg = load_into("rf/session_mock.json", tmp);
    cfg.strategy = Strategy::make(StrategyKind::fixed, 3);
    return cfg;
}

const char* kPatch = "```netlist\n" R"(MSUB:MSub1 H=1.6 mm Er=4.4 Mur=1 Cond=5.8e7 Hu=1e33 mm T=0.035 mm TanD=0.02
Term:Term1 p1 0 Num=1 Z=50 Ohm
MLIN:Feed1 p1 np Subst="MSub1" W=3.0 mm L=15.0 mm
MLIN:Patch np ne Subst="MSub1" W=38.0 mm L=29.2 mm
MLEF:Open1 ne Subst="MSub1" W=38.0 mm L=0 mm
S_Param:SP1 Start=1.9 GHz Stop=2.9 GHz Step=10 MHz
)" "```\n";

} // namespace

TEST(RfSession, ReplayReproducesTrajectory) {
    testsupport::TempDir tmp;
    auto cfg = load_into("rf/session.json", tmp);
    auto start = std::chrono::steady_clock::now();
    auto rec = run_session(cfg);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    EXPECT_LT(elapsed, 10.0);

    ASSERT_EQ(rec.iterations.size(), 10u);
    const auto& first = rec.iterations[0];
    EXPECT_EQ(first.status, IterationStatus::failed_validation);
    ASSERT_FALSE(first.violations.empty());
    EXPECT_EQ(first.violations[0].kind, netlist::ViolationKind::wrong_arity);
    ASSERT_TRUE(first.feedback_out.has_value());
    EXPECT_NE(first.feedback_out->find("wrong_arity(2,3)"), std::string::npos);

    std::optional<int> first_met;
    for (const auto& it : rec.iterations) {
        if (it.index == 1) continue;
        ASSERT_EQ(it.status, IterationStatus::ok) << it.index << ": " << it.error;
        if (!first_met && all_met(it.checks)) first_met = it.index;
    }
    ASSERT_TRUE(first_met.has_value());
    EXPECT_EQ(*first_met, 9);
    const auto& nine = rec.iterations[8];
    EXPECT_NEAR(nine.metrics.at("s11_db"), -11.3, 0.05);
    EXPECT_NEAR(*nine.checks[0].deviation_pct, oracle::deviation(nine.metrics.at("s11_db"), -10, true), 1e-9);
    const auto& last = rec.iterations.back();
    EXPECT_NEAR(last.metrics.at("s11_db"), -16.7, 0.05);
    EXPECT_NEAR(*last.checks[0].deviation_pct, 67, 0.5);
    EXPECT_EQ(rec.outcome, Outcome::met);
    EXPECT_EQ(rec.state, SessionState::done);

    auto saved = load_session(session_path(cfg.sessions_dir, rec.id));
    EXPECT_EQ(saved.iterations.size(), 10u);
    EXPECT_EQ(saved.iterations[8].checks, nine.checks);
}

TEST(RfSession, UntilMetStopsAtFirstSuccess) {
    testsupport::TempDir tmp;
    auto cfg = load_into("rf/session.json", tmp);
    cfg.strategy = Strategy::make(StrategyKind::until_met, 10);
    auto rec = run_session(cfg);
    EXPECT_EQ(rec.iterations.size(), 9u);
    EXPECT_EQ(rec.outcome, Outcome::met);
}

TEST(RfSession, MockAdapterStaysPhysical) {
    testsupport::TempDir tmp;
    auto rec = run_session(load_into("rf/session_mock.json", tmp));
    ASSERT_EQ(rec.iterations.size(), 10u);
    for (const auto& it : rec.iterations) {
        if (it.status != IterationStatus::ok) continue;
        for (double y : it.run->waveforms->at("s11_db").y) ASSERT_LE(y, 0.0);
    }
}

TEST(OtaSession, SweepPropertiesAndTables) {
    testsupport::TempDir tmp;
    auto cfg = load_into("ota/session.json", tmp);
    auto start = std::chrono::steady_clock::now();
    auto rec = run_session(cfg);
    EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 5.0);
    ASSERT_EQ(rec.iterations.size(), 1u);
    const auto& it = rec.iterations[0];
    ASSERT_EQ(it.status, IterationStatus::ok) << it.error;
    ASSERT_EQ(it.sweep.size(), 15u);
    for (std::size_t k = 0; k < it.sweep.size(); ++k) {
        const auto& p = it.sweep[k];
        EXPECT_GT(p.value, 0.7);
        EXPECT_LE(p.value, 2.5);
        ASSERT_TRUE(p.error.empty()) << p.error;
        if (k) {
            EXPECT_GE(p.value, it.sweep[k - 1].value);
            EXPECT_LT(p.metrics.at("dc_gain_db"), it.sweep[k - 1].metrics.at("dc_gain_db"));
            EXPECT_GT(p.metrics.at("power_w"), it.sweep[k - 1].metrics.at("power_w"));
        }
    }
    ASSERT_TRUE(it.selected_point.has_value());
    const auto& chosen = it.sweep[*it.selected_point];
    if (all_met(chosen.checks)) {
        for (std::size_t k = 0; k < *it.selected_point; ++k) EXPECT_FALSE(all_met(it.sweep[k].checks));
    }

    auto tables = sweep_tables(it, "vbias");
    ASSERT_EQ(tables.size(), 3u);
    const auto grid = it.sweep[0].run.waveforms->at("ac_mag_db").size();
    EXPECT_EQ(lines(tables.at("sweep_gain_curves.csv")), 1 + 15 * grid);
    EXPECT_EQ(lines(tables.at("sweep_gain_pm.csv")), 16u);
    EXPECT_EQ(lines(tables.at("sweep_ugb_power.csv")), 16u);
    EXPECT_EQ(tables.at("sweep_gain_pm.csv").substr(0, tables.at("sweep_gain_pm.csv").find('\n')),
              "point,vbias,dc_gain_db,phase_margin_deg");
}

TEST(FpgaSession, ReportsFeedTheChecks) {
    testsupport::TempDir tmp;
    auto rec = run_session(load_into("fsm/session.json", tmp));
    ASSERT_EQ(rec.iterations.size(), 1u);
    const auto& it = rec.iterations[0];
    ASSERT_EQ(it.status, IterationStatus::ok) << it.error;
    EXPECT_NEAR(it.metrics.at("clock_freq_hz"), 1e9 / 1.11, 1e3);
    EXPECT_TRUE(it.metrics.count("lut_count"));
    EXPECT_EQ(rec.outcome, Outcome::exhausted);
    EXPECT_TRUE(it.sources->files.count("constraints.xdc"));
    EXPECT_TRUE(it.sources->files.count("tb.v"));
}

TEST(Session, ExtractionFailureThenRecovery) {
    testsupport::TempDir tmp;
    auto cfg = tiny_rf(tmp);
    llm::ScriptedProvider p({{"Sorry, I cannot draw that."}, {kPatch}, {kPatch}});
    auto rec = run_session(cfg, p);
    ASSERT_EQ(rec.iterations.size(), 3u);
    EXPECT_EQ(rec.iterations[0].status, IterationStatus::failed_extraction);
    EXPECT_FALSE(rec.iterations[0].run.has_value());
    EXPECT_EQ(rec.iterations[1].status, IterationStatus::ok) << rec.iterations[1].error;
    EXPECT_NE(rec.iterations[0].feedback_out->find("netlist"), std::string::npos);
}

TEST(Session, TransportAndEmptyReplyAbort) {
    testsupport::TempDir tmp;
    auto cfg = tiny_rf(tmp);
    llm::TranscriptTurn down;
    down.transport_error = true;
    llm::ScriptedProvider p({{kPatch}, down});
    auto rec = run_session(cfg, p);
    EXPECT_EQ(rec.outcome, Outcome::aborted);
    EXPECT_EQ(rec.iterations.size(), 1u);
    EXPECT_FALSE(rec.abort_reason.empty());

    llm::ScriptedProvider empty({{"  "}});
    EXPECT_EQ(run_session(cfg, empty).outcome, Outcome::aborted);
}

TEST(Session, InteractiveUsesHumanReplies) {
    testsupport::TempDir tmp;
    auto cfg = tiny_rf(tmp);
    cfg.strategy = Strategy::make(StrategyKind::interactive, 3);
    llm::ScriptedProvider p({{kPatch}, {kPatch}, {kPatch}});
    int asked = 0;
    SessionHooks hooks;
    hooks.await_feedback = [&](const SessionRecord& r) -> std::optional<std::string> {
        EXPECT_EQ(r.state, SessionState::awaiting_feedback);
        if (asked++ == 0) return std::string("make the patch narrower");
        return std::nullopt;
    };
    auto rec = run_session(cfg, p, hooks);
    EXPECT_EQ(rec.outcome, Outcome::aborted);
    ASSERT_EQ(rec.iterations.size(), 2u);
    EXPECT_EQ(rec.iterations[0].feedback_out, "make the patch narrower");
    EXPECT_EQ(rec.iterations[1].exchange.request.back().content, "make the patch narrower");
    EXPECT_THROW(run_session(cfg, p), ConfigError);
}

TEST(Session, AbortFlagStopsBeforeNextIteration) {
    testsupport::TempDir tmp;
    auto cfg = tiny_rf(tmp);
    llm::ScriptedProvider p({{kPatch}, {kPatch}, {kPatch}});
    std::atomic<bool> stop{false};
    SessionHooks hooks;
    hooks.abort = &stop;
    hooks.on_update = [&](const SessionRecord& r) {
        if (r.iterations.size() == 1) stop = true;
    };
    auto rec = run_session(cfg, p, hooks);
    EXPECT_EQ(rec.outcome, Outcome::aborted);
    EXPECT_EQ(rec.iterations.size(), 1u);
}

TEST(Session, ReplayIsDeterministic) {
    testsupport::TempDir tmp;
    auto rec = run_session(load_into("rf/session.json", tmp));
    auto again = replay_session(load_session(session_path(tmp / "sessions", rec.id)), "replayed");
    EXPECT_EQ(again.id, "replayed");
    ASSERT_EQ(again.iterations.size(), rec.iterations.size());
    for (std::size_t i = 0; i < rec.iterations.size(); ++i) {
        EXPECT_EQ(again.iterations[i].status, rec.iterations[i].status);
        EXPECT_EQ(again.iterations[i].checks, rec.iterations[i].checks);
        EXPECT_EQ(again.iterations[i].feedback_out, rec.iterations[i].feedback_out);
    }
}

TEST(Feedback, ObjectivesViolationsAndInstruction) {
    auto o = Objective::make("s11_db", Comparator::at_most, -10, std::nullopt, 2.4e9);
    auto check = evaluate_objective(o, {{"s11_db", -4}});
    netlist::Violation v;
    v.kind = netlist::ViolationKind::floating_net;
    v.subject = "nx";
    auto text = compose_feedback({check}, {{"s11_db", -4}}, {v});
    auto obj = text.find("s11_db");
    auto viol = text.find("nx");
    ASSERT_NE(obj, std::string::npos);
    ASSERT_NE(viol, std::string::npos);
    EXPECT_LT(obj, viol);
    EXPECT_NE(text.find("netlist"), std::string::npos);
    EXPECT_NE(compose_feedback({}, {}, {}, "", "Verilog module").find("Verilog module"), std::string::npos);
}

TEST(Sweep, SamplingAndSubstitution) {
    SweepSpec s{"vbias", 0.6, 2.5, 15, 7, 0.7};
    auto a = sample_sweep(s);
    EXPECT_EQ(a, sample_sweep(s));
    EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
    for (double v : a) {
        EXPECT_GE(v, 0.6);
        EXPECT_LE(v, 2.5);
    }
    auto b = sample_sweep(s, [](double v) { return v > 0.7; });
    for (double v : b) EXPECT_GT(v, 0.7);
    EXPECT_THROW(sample_sweep(s, [](double) { return false; }), ConfigError);
    EXPECT_THROW((SweepSpec{"x", 1, 1, 3, 0, {}}).validate(), ConfigError);

    auto deck = std::string("parameters vbias=1.0 other=2\nVB (vb 0) vsource dc=vbias\n");
    auto out = substitute_parameter(deck, "vbias", 1.25);
    auto nl = netlist::parse(out, netlist::Dialect::spectre_like);
    EXPECT_DOUBLE_EQ(netlist::parameter_values(nl).at("vbias"), 1.25);
    EXPECT_DOUBLE_EQ(netlist::parameter_values(nl).at("other"), 2);
    auto added = substitute_parameter("VB (vb 0) vsource dc=vbias\n", "vbias", 0.9);
    EXPECT_DOUBLE_EQ(netlist::parameter_values(netlist::parse(added, netlist::Dialect::spectre_like)).at("vbias"), 0.9);
}

TEST(Config, ValidationAndRelativePaths) {
    auto cfg = load_session_config(testsupport::data("rf/session.json"));
    EXPECT_EQ(cfg.adapter.fixtures, testsupport::data("rf/fixtures"));
    EXPECT_EQ(cfg.provider.transcript, testsupport::data("rf/transcript.jsonl"));
    EXPECT_THROW(Strategy::make(StrategyKind::fixed, 0), ConfigError);
    EXPECT_EQ(strategy_kind_from_string("until-met"), StrategyKind::until_met);
    auto j = to_json(cfg);
    j["strategy"]["n"] = 0;
    EXPECT_THROW(session_config_from_json(j), ConfigError);
}
