#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "edaloop/adapters.hpp"
#include "edaloop/errors.hpp"
#include "edaloop/util.hpp"

namespace edaloop::adapters {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double c0 = 299792458.0;

std::vector<double> log_grid(double lo, double hi, int per_decade) {
    const double decades = std::log10(hi / lo);
    const int n = static_cast<int>(std::lround(decades * per_decade));
    std::vector<double> out(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) out[static_cast<std::size_t>(i)] = lo * std::pow(10.0, decades * i / n);
    return out;
}

// Unity-feedback step response of the two-pole amplifier, integrated with RK4.
Trace follower_step(double a0, double p1_hz, double p2_hz, double ugb_hz, double vdd) {
    const double w1 = 2 * pi * p1_hz, w2 = 2 * pi * p2_hz;
    const double step = 0.1;
    const double t_end = 10.0 / (2 * pi * std::max(ugb_hz, p1_hz));
    const double fastest = std::max({w2, w1 * a0, w1});
    const int samples = 501;
    const double dt_sample = t_end / (samples - 1);
    const int sub = std::max(1, static_cast<int>(std::ceil(dt_sample * fastest / 0.5)));
    const double h = dt_sample / sub;

    auto deriv = [&](double v1, double y, double& d1, double& dy) {
        d1 = w1 * (a0 * (step - y) - v1);
        dy = w2 * (v1 - y);
    };
    Trace t;
    t.x_name = "time";
    t.x_unit = "s";
    t.y_unit = "V";
    double v1 = 0.0, y = 0.0;
    for (int i = 0; i < samples; ++i) {
        t.x.push_back(i * dt_sample);
        t.y.push_back(vdd / 2 + y);
        if (i + 1 == samples) break;
        for (int k = 0; k < sub; ++k) {
            double a1, b1, a2, b2, a3, b3, a4, b4;
            deriv(v1, y, a1, b1);
            deriv(v1 + h / 2 * a1, y + h / 2 * b1, a2, b2);
            deriv(v1 + h / 2 * a2, y + h / 2 * b2, a3, b3);
            deriv(v1 + h * a3, y + h * b3, a4, b4);
            v1 += h / 6 * (a1 + 2 * a2 + 2 * a3 + a4);
            y += h / 6 * (b1 + 2 * b2 + 2 * b3 + b4);
        }
    }
    return t;
}

} // namespace

std::pair<double, double> ota_response(double a0, double p1_hz, double p2_hz, double f_hz) {
    const double r1 = f_hz / p1_hz, r2 = f_hz / p2_hz;
    const double mag = 20 * std::log10(a0) - 10 * std::log10(1 + r1 * r1) - 10 * std::log10(1 + r2 * r2);
    const double phase = -(std::atan(r1) + std::atan(r2)) * 180.0 / pi;
    return {mag, phase};
}

OtaEval mock_analogue_eval(const OtaParams& p) {
    using M = OtaModel;
    for (double d : {p.w_diff_um, p.l_diff_um, p.w_load_um, p.l_load_um, p.w_tail_um, p.l_tail_um})
        if (!(d > 0) || !std::isfinite(d)) throw EvalError("device dimensions must be positive");
    if (!(p.c_load_f > 0) || !std::isfinite(p.c_load_f)) throw EvalError("load capacitance must be positive");
    if (!(p.vdd > 0) || !std::isfinite(p.vdd)) throw EvalError("supply must be positive");
    if (!std::isfinite(p.v_bias)) throw EvalError("bias is not finite");
    if (p.v_bias <= M::v_th)
        throw DegenerateBias("bias " + util::shortest(p.v_bias) + " V is at or below threshold " +
                             util::shortest(M::v_th) + " V");
    if (p.v_bias >= p.vdd) throw EvalError("bias must stay below the supply");

    OtaEval e;
    const double ov = p.v_bias - M::v_th;
    e.tail_current_a = 0.5 * M::k_n * (p.w_tail_um / p.l_tail_um) * ov * ov;
    const double half = e.tail_current_a / 2;
    e.gm_s = std::sqrt(2 * M::k_n * (p.w_diff_um / p.l_diff_um) * half);
    const double gds = (M::lambda_n + M::lambda_p) * half;
    e.a0 = e.gm_s / gds;
    e.r_out_ohm = 1 / gds;
    e.p1_hz = 1 / (2 * pi * e.r_out_ohm * p.c_load_f);
    e.p2_hz = M::p2_hz;
    e.power_w = p.vdd * e.tail_current_a;

    if (e.a0 > 1) {
        const double a = 1 / (e.p1_hz * e.p1_hz * e.p2_hz * e.p2_hz);
        const double b = 1 / (e.p1_hz * e.p1_hz) + 1 / (e.p2_hz * e.p2_hz);
        const double c = 1 - e.a0 * e.a0;
        const double u = -2 * c / (b + std::sqrt(b * b - 4 * a * c));
        e.ugb_hz = std::sqrt(u);
        e.pm_deg = 180.0 - (std::atan(*e.ugb_hz / e.p1_hz) + std::atan(*e.ugb_hz / e.p2_hz)) * 180.0 / pi;
    }

    Trace mag, phase;
    mag.x_name = phase.x_name = "freq";
    mag.x_unit = phase.x_unit = "Hz";
    mag.y_unit = "dB";
    phase.y_unit = "deg";
    mag.x = phase.x = log_grid(1.0, 1e9, 50);
    for (double f : mag.x) {
        auto [m, ph] = ota_response(e.a0, e.p1_hz, e.p2_hz, f);
        mag.y.push_back(m);
        phase.y.push_back(ph);
    }
    Trace dc;
    dc.x_name = "vid";
    dc.x_unit = "V";
    dc.y_unit = "V";
    const double swing = p.vdd / 2;
    for (int i = 0; i <= 200; ++i) {
        double vid = -0.1 + 0.2 * i / 200.0;
        dc.x.push_back(vid);
        dc.y.push_back(swing + swing * std::tanh(e.a0 * vid / swing));
    }
    e.waveforms.traces["ac_mag_db"] = std::move(mag);
    e.waveforms.traces["ac_phase_deg"] = std::move(phase);
    e.waveforms.traces["dc_vout"] = std::move(dc);
    e.waveforms.traces["tran_vout"] = follower_step(e.a0, e.p1_hz, e.p2_hz, e.ugb_hz.value_or(e.p1_hz), p.vdd);

    e.metrics["dc_gain_db"] = 20 * std::log10(e.a0);
    if (e.ugb_hz) e.metrics["ugb_hz"] = *e.ugb_hz;
    if (e.pm_deg) e.metrics["phase_margin_deg"] = *e.pm_deg;
    e.metrics["power_w"] = e.power_w;
    return e;
}

namespace {

std::optional<double> number(const netlist::Component& c, std::initializer_list<std::string_view> names) {
    for (auto n : names)
        for (const auto& p : c.params)
            if (util::iequals(p.name, n) && p.value.value) return p.value.value;
    for (const auto& p : c.params)
        if (p.name.empty() && p.value.value) return p.value.value;
    return std::nullopt;
}

double size_um(const netlist::Component& c, std::string_view name) {
    auto v = number(c, {name});
    if (!v) throw EvalError("device " + c.name + " has no " + std::string(name));
    return *v * 1e6;
}

bool is_kind(const netlist::Component& c, std::string_view kind) {
    return util::iequals(c.kind, kind) || util::iequals(c.master, kind);
}

} // namespace

OtaParams ota_params_from_netlist(const netlist::Netlist& nl) {
    std::vector<const netlist::Component*> nmos, pmos, vsrc, caps;
    for (const auto& c : nl.components) {
        if (is_kind(c, "nmos") && c.terminals.size() >= 3) nmos.push_back(&c);
        else if (is_kind(c, "pmos") && c.terminals.size() >= 3) pmos.push_back(&c);
        else if (is_kind(c, "vsource") && c.terminals.size() == 2) vsrc.push_back(&c);
        else if ((is_kind(c, "C") || is_kind(c, "capacitor")) && c.terminals.size() == 2) caps.push_back(&c);
    }
    const netlist::Component* tail = nullptr;
    std::vector<const netlist::Component*> pair;
    for (const auto* t : nmos) {
        std::vector<const netlist::Component*> fed;
        for (const auto* m : nmos)
            if (m != t && m->terminals[2] == t->terminals[0]) fed.push_back(m);
        if (fed.size() == 2) {
            tail = t;
            pair = fed;
            break;
        }
    }
    if (!tail) throw EvalError("no tail transistor feeding a differential pair");
    if (pmos.empty()) throw EvalError("no load transistor");
    if (caps.empty()) throw EvalError("no load capacitor");

    auto source_on = [&](const std::string& net) -> std::optional<double> {
        for (const auto* v : vsrc) {
            if (v->terminals[0] == net && netlist::is_ground(v->terminals[1])) return number(*v, {"dc"});
        }
        return std::nullopt;
    };
    OtaParams p;
    p.w_diff_um = size_um(*pair[0], "w");
    p.l_diff_um = size_um(*pair[0], "l");
    p.w_load_um = size_um(*pmos[0], "w");
    p.l_load_um = size_um(*pmos[0], "l");
    p.w_tail_um = size_um(*tail, "w");
    p.l_tail_um = size_um(*tail, "l");
    auto vb = source_on(tail->terminals[1]);
    if (!vb) throw EvalError("no bias source on the tail gate '" + tail->terminals[1] + "'");
    auto vdd = source_on(pmos[0]->terminals[2]);
    if (!vdd) throw EvalError("no supply source on '" + pmos[0]->terminals[2] + "'");
    auto cl = number(*caps[0], {"c"});
    if (!cl) throw EvalError("load capacitor " + caps[0]->name + " has no value");
    p.v_bias = *vb;
    p.vdd = *vdd;
    p.c_load_f = *cl;
    return p;
}

double s11_db(double z_re, double z_im, double z0) {
    const std::complex<double> z(z_re, z_im);
    const double mag = std::abs((z - z0) / (z + z0));
    if (!(mag > 1e-3)) return -60.0;
    return std::min(0.0, 20 * std::log10(mag));
}

RfEval mock_rf_eval(const netlist::Netlist& nl) {
    auto subs = nl.directives_of(netlist::DirectiveKind::substrate);
    if (subs.empty()) throw EvalError("netlist has no substrate");
    const auto* sub = subs.front();
    auto h = sub->param("H");
    auto er = sub->param("Er");
    if (!h || !h->value.value || !er || !er->value.value) throw EvalError("substrate needs H and Er");
    const double height = *h->value.value, eps_r = *er->value.value;
    if (!(height > 0) || !(eps_r > 1)) throw EvalError("substrate H must be positive and Er above 1");

    bool has_term = false;
    std::vector<const netlist::Component*> lines;
    for (const auto& c : nl.components) {
        if (util::iequals(c.kind, "Term")) has_term = true;
        if (util::iequals(c.kind, "MLIN")) lines.push_back(&c);
    }
    if (!has_term) throw EvalError("netlist has no Term port");
    if (lines.empty()) throw EvalError("netlist has no microstrip patch");

    auto width = [](const netlist::Component* c) {
        auto w = c->param("W");
        return w && w->value.value ? *w->value.value : 0.0;
    };
    const netlist::Component* patch = nullptr;
    for (const auto* c : lines)
        if (util::to_lower(c->name).find("patch") != std::string::npos) {
            patch = c;
            break;
        }
    if (!patch)
        patch = *std::max_element(lines.begin(), lines.end(),
                                  [&](const auto* a, const auto* b) { return width(a) < width(b); });
    const double w = width(patch);
    auto lp = patch->param("L");
    if (!(w > 0) || !lp || !lp->value.value || !(*lp->value.value > 0))
        throw EvalError("patch " + patch->name + " needs positive W and L");
    const double len = *lp->value.value;

    int feeds = 0;
    for (const auto* c : lines) {
        if (c == patch) continue;
        bool touches = false;
        for (const auto& t : c->terminals)
            touches = touches || std::find(patch->terminals.begin(), patch->terminals.end(), t) != patch->terminals.end();
        feeds += touches;
    }
    feeds = std::max(feeds, 1);

    auto sweeps = nl.directives_of(netlist::DirectiveKind::sparams);
    if (sweeps.empty() || !sweeps.front()->sweep) throw EvalError("netlist has no S-parameter sweep");
    const auto grid = sweeps.front()->sweep->grid();
    if (grid.empty() || !(grid.front() > 0)) throw EvalError("S-parameter sweep must be positive");

    RfEval e;
    e.feeds = feeds;
    e.eps_eff = (eps_r + 1) / 2 + (eps_r - 1) / 2 / std::sqrt(1 + 12 * height / w);
    e.f_res_hz = c0 / (2 * len * std::sqrt(e.eps_eff));
    double inset = 0.0;
    if (auto y0 = patch->param("Inset"); y0 && y0->value.value) inset = *y0->value.value;
    const double edge = 90 * eps_r * eps_r / (eps_r - 1) * (len / w) * (len / w);
    const double r0 = edge * std::pow(std::cos(pi * inset / len), 2);
    e.r_in_ohm = 50 + (r0 - 50) / std::sqrt(static_cast<double>(feeds));
    e.q = std::clamp(c0 * std::sqrt(eps_r) / (4 * e.f_res_hz * height), 5.0, 200.0);

    Trace t;
    t.x_name = "freq";
    t.x_unit = "Hz";
    t.y_unit = "dB";
    for (double f : grid) {
        const std::complex<double> z = e.r_in_ohm / std::complex<double>(1.0, e.q * (f / e.f_res_hz - e.f_res_hz / f));
        t.x.push_back(f);
        t.y.push_back(s11_db(z.real(), z.imag()));
    }
    e.waveforms.traces["s11_db"] = std::move(t);
    return e;
}

} // namespace edaloop::adapters
