#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "edaloop/core.hpp"
#include "edaloop/netlist.hpp"
#include "edaloop/run_types.hpp"
#include "edaloop/source_prep.hpp"
#include "edaloop/waveform.hpp"

namespace edaloop::adapters {

enum class AdapterMode { external, mock, replay };

std::string_view to_string(AdapterMode mode);
AdapterMode adapter_mode_from_string(std::string_view text);

struct AdapterSpec {
    FlowKind flow = FlowKind::analogue;
    AdapterMode mode = AdapterMode::mock;
    /// Shell command with {workspace} and {script} placeholders (external mode only).
    std::optional<std::string> command_template;
    /// Absent means no limit. External mode defaults to 300 s.
    std::optional<double> timeout_s;
    std::vector<Stage> stages;
    /// FPGA part for generated TCL.
    std::string part_id = "xc7z020clg400-1";
    /// Replay fixtures: a directory of iter_NN.csv curves (rf) or an outcome file (fpga).
    std::filesystem::path fixtures;

    static std::vector<Stage> default_stages(FlowKind flow);
    /// Fills defaults for missing fields.
    static AdapterSpec make(FlowKind flow, AdapterMode mode);
    /// Throws ConfigError.
    void validate() const;
};

nlohmann::json to_json(const AdapterSpec& spec);
AdapterSpec adapter_spec_from_json(const nlohmann::json& j);

struct RunResult {
    std::vector<StageOutcome> stage_outcomes;
    std::map<std::string, std::string> report_files;
    std::optional<WaveformSet> waveforms;
    std::string log_text;

    bool all_passed() const;
    StageStatus status(Stage stage) const;
};

nlohmann::json to_json(const RunResult& r, std::size_t max_points = 0);
RunResult run_result_from_json(const nlohmann::json& j);

/// Outcomes for `stages` given per-stage verdicts: the first failure fails,
/// every stage after it is skipped. Missing verdicts count as passes.
std::vector<StageOutcome> gate_stages(const std::vector<Stage>& stages,
                                      const std::map<Stage, std::pair<bool, std::string>>& verdicts);

// ---------------------------------------------------------------- workspaces

/// Creates root/<session>/iter_NNN (suffixed "-2", "-3", ... if taken) and
/// writes every source file plus the optional driver script and a manifest.
/// Never reuses an existing directory.
std::filesystem::path prepare_workspace(const std::filesystem::path& root, const std::string& session_id,
                                        int iteration, const source::SourceBundle& sources,
                                        const std::optional<std::pair<std::string, std::string>>& driver = {});

/// Removes workspace directories of one session, or of all sessions when
/// `session_id` is empty, whose modification time is older than `min_age`.
/// Returns the number of iteration directories removed.
std::size_t gc_workspaces(const std::filesystem::path& root, const std::string& session_id,
                          std::chrono::seconds min_age);

/// TCL driving the FPGA tool through the given stages in batch mode.
/// Each stage prints "@@STAGE <name> PASS|FAIL". Reports land in reports/.
/// Throws ConfigError on an unknown stage name.
std::string gen_fpga_tcl(const source::SourceBundle& sources, const std::string& constraints_file,
                         const std::string& part_id, const std::string& top_module,
                         const std::vector<std::string>& stages);

/// Shell driver for analogue and RF decks.
std::string gen_shell_driver(const source::SourceBundle& sources, const std::vector<Stage>& stages);

// ---------------------------------------------------------------- external runs

/// Runs the expanded command template in `workspace` with the spec's timeout.
///
/// Output lines "@@STAGE <name> PASS|FAIL" settle stages explicitly. The
/// first stage without a verdict fails on a nonzero exit, a timeout or an
/// "ERROR:" log line; otherwise it passes. Throws ConfigError when the
/// command's executable cannot be found.
RunResult run_external(const AdapterSpec& spec, const std::filesystem::path& workspace,
                       const std::string& script_name);

std::string shell_quote(const std::string& s);

// ---------------------------------------------------------------- analogue mock

struct OtaParams {
    double w_diff_um = 0.0, l_diff_um = 0.0;
    double w_load_um = 0.0, l_load_um = 0.0;
    double w_tail_um = 0.0, l_tail_um = 0.0;
    double v_bias = 0.0;
    double vdd = 0.0;
    double c_load_f = 0.0;
};

struct OtaModel {
    static constexpr double k_n = 200e-6;
    static constexpr double k_p = 80e-6;
    static constexpr double v_th = 0.7;
    static constexpr double lambda_n = 0.05;
    static constexpr double lambda_p = 0.05;
    static constexpr double p2_hz = 50e6;
};

struct OtaEval {
    double tail_current_a = 0.0;
    double gm_s = 0.0;
    double a0 = 0.0;
    double r_out_ohm = 0.0;
    double p1_hz = 0.0;
    double p2_hz = 0.0;
    std::optional<double> ugb_hz;
    std::optional<double> pm_deg;
    double power_w = 0.0;
    /// ac_mag_db, ac_phase_deg, dc_vout, tran_vout
    WaveformSet waveforms;
    /// dc_gain_db, ugb_hz, phase_margin_deg, power_w
    MetricMap metrics;
};

/// Closed-form five-transistor OTA.
/// Throws DegenerateBias when v_bias <= v_th and EvalError on other bad inputs.
OtaEval mock_analogue_eval(const OtaParams& params);

/// Two-pole open-loop response at `f_hz`: {magnitude dB, phase deg}.
std::pair<double, double> ota_response(double a0, double p1_hz, double p2_hz, double f_hz);

/// Reads sizing, bias, supply and load from an OTA deck.
/// Throws EvalError when the topology cannot be recognised.
OtaParams ota_params_from_netlist(const netlist::Netlist& nl);

// ---------------------------------------------------------------- RF mock

struct RfEval {
    double eps_eff = 0.0;
    double f_res_hz = 0.0;
    double r_in_ohm = 0.0;
    double q = 0.0;
    int feeds = 1;
    WaveformSet waveforms;  // s11_db
};

/// S11 of the patch as a parallel RLC around its half-wave resonance.
/// Throws EvalError when the substrate, Term, patch or sweep is missing.
RfEval mock_rf_eval(const netlist::Netlist& nl);

/// S11 in dB of an input impedance against 50 ohm, floored at -60 dB.
double s11_db(double z_re, double z_im, double z0 = 50.0);

// ---------------------------------------------------------------- dispatch

/// What a run needs besides the workspace.
struct RunRequest {
    source::SourceBundle sources;
    /// File in `sources` holding the design.
    std::string design_file;
    /// Driver script written into the workspace (external mode).
    std::string script_name;
    /// 1-based iteration; keys RF replay curves.
    int iteration = 1;
    /// FPGA replay keys.
    std::optional<int> problem_id;
    int run_index = 1;
    std::optional<source::ModuleHeader> expected_header;
};

/// Runs the spec's mode against a prepared workspace.
RunResult run(const AdapterSpec& spec, const std::filesystem::path& workspace, const RunRequest& request);

/// Reads one "freq_hz,s11_db" CSV curve.
Trace read_curve_csv(const std::filesystem::path& path);

} // namespace edaloop::adapters
