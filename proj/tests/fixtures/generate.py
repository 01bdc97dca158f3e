#!/usr/bin/env python3
"""Regenerates the committed example data and test fixtures.

Run from the repository root: python3 tests/fixtures/generate.py
Output is deterministic; rerunning leaves the tree unchanged.
"""
import json
import math
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parents[2]
DATA = ROOT / "data"
FIX = ROOT / "tests" / "fixtures"


def write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def write_json(path, obj, indent=2):
    write(path, json.dumps(obj, indent=indent) + "\n")


# ---------------------------------------------------------------- catalog

CATALOG = [
    {"kind": "MLIN", "arity": 2, "required_params": ["W", "L"]},
    {"kind": "MTEE", "arity": 3, "required_params": ["W1", "W2", "W3"]},
    {"kind": "MLEF", "arity": 1, "required_params": ["W", "L"]},
    {"kind": "MSUB", "arity": 0, "required_params": ["H", "Er"]},
    {"kind": "Term", "arity": 2, "required_params": ["Num", "Z"]},
    {"kind": "S_Param", "arity": 0, "required_params": ["Start", "Stop"]},
    {"kind": "R", "arity": 2, "required_params": []},
    {"kind": "C", "arity": 2, "required_params": []},
    {"kind": "L", "arity": 2, "required_params": []},
    {"kind": "nmos", "arity": 4, "required_params": ["w", "l"]},
    {"kind": "pmos", "arity": 4, "required_params": ["w", "l"]},
    {"kind": "vsource", "arity": 2, "required_params": []},
    {"kind": "isource", "arity": 2, "required_params": []},
]

# ---------------------------------------------------------------- RF session

RF_SYSTEM = """You write microstrip circuit netlists for a planar RF simulator.
Statements have the form Kind:Name node1 node2 ... Param=value unit.
Available components: MLIN (2 nodes, W, L), MTEE (3 nodes, W1, W2, W3), MLEF (1 node, W, L),
Term (2 nodes, Num, Z). The substrate is declared once with MSUB:Name H=.. Er=.. and the sweep with
S_Param:Name Start=.. Stop=.. Step=..
Comments start with //. Every node must connect at least two terminals; node 0 is ground.
Return the complete netlist in one fenced code block tagged netlist."""

RF_USER = """Design a rectangular microstrip patch antenna for 2.4 GHz on FR-4 (H = 1.6 mm, Er = 4.4).
Feed it through a 50 Ohm port and simulate S11 from 1.9 GHz to 2.9 GHz in 10 MHz steps."""

SUBSTRATE = "MSUB:MSub1 H=1.6 mm Er=4.4 Mur=1 Cond=5.8E+7 T=35 um TanD=0.02"
SWEEP = "S_Param:SP1 Start=1.9 GHz Stop=2.9 GHz Step=10 MHz"

# (patch L mm, patch W mm, feeds [(W mm, L mm)]) per iteration 2..10
RF_GEOMETRY = {
    2: (28.0, 38.0, [(3.0, 16.0)]),
    3: (28.6, 38.0, [(2.6, 18.0)]),
    4: (29.0, 38.0, [(1.6, 14.0), (1.6, 14.0)]),
    5: (29.2, 38.0, [(1.5, 13.0), (1.5, 13.0)]),
    6: (29.3, 38.0, [(1.4, 12.5), (1.4, 12.5)]),
    7: (29.4, 38.0, [(1.4, 12.0), (1.4, 12.0)]),
    8: (29.4, 38.0, [(1.3, 11.6), (1.3, 11.6)]),
    9: (29.5, 38.0, [(1.3, 11.2), (1.3, 11.2)]),
    10: (29.5, 38.0, [(1.2, 10.8), (1.2, 10.8)]),
}

# Replay curves: (resonance GHz, input resistance Ohm) per iteration. The last
# two place the resonance on 2.4 GHz with the S11 depth fixed by the resistance.
GAMMA_9 = 10 ** (-11.3 / 20)
GAMMA_10 = 10 ** (-16.7 / 20)
RF_CURVES = {
    2: (2.62, 24.0),
    3: (2.57, 27.0),
    4: (2.52, 120.0),
    5: (2.49, 105.0),
    6: (2.47, 98.0),
    7: (2.46, 92.0),
    8: (2.45, 90.0),
    9: (2.40, 50 * (1 + GAMMA_9) / (1 - GAMMA_9)),
    10: (2.40, 50 * (1 + GAMMA_10) / (1 - GAMMA_10)),
}
RF_Q = 30.0


def rf_netlist(it):
    if it == 1:
        # The feed line is given three nodes.
        return "\n".join([
            "// rectangular patch, single inset feed",
            SUBSTRATE,
            "Term:Term1 p1 0 Num=1 Z=50 Ohm",
            'MLIN:Feed1 p1 np nx Subst="MSub1" W=3.0 mm L=15.0 mm',
            'MLIN:Patch np ne Subst="MSub1" W=38.0 mm L=28.0 mm',
            'MLEF:Open1 ne Subst="MSub1" W=38.0 mm L=0 mm',
            SWEEP,
        ]) + "\n"
    length, width, feeds = RF_GEOMETRY[it]
    lines = []
    if len(feeds) == 1:
        fw, fl = feeds[0]
        lines += [
            "// rectangular patch, single feed",
            SUBSTRATE,
            "Term:Term1 p1 0 Num=1 Z=50 Ohm",
            f'MLIN:Feed1 p1 np Subst="MSub1" W={fw} mm L={fl} mm',
        ]
    else:
        (w1, l1), (w2, l2) = feeds
        lines += [
            "// rectangular patch, double feed through a tee",
            SUBSTRATE,
            "Term:Term1 p1 0 Num=1 Z=50 Ohm",
            f'MTEE:Tee1 p1 f1 f2 Subst="MSub1" W1=3.0 mm W2={w1} mm W3={w2} mm',
            f'MLIN:Feed1 f1 np Subst="MSub1" W={w1} mm L={l1} mm',
            f'MLIN:Feed2 f2 np Subst="MSub1" W={w2} mm L={l2} mm',
        ]
    lines += [
        f'MLIN:Patch np ne Subst="MSub1" W={width} mm L={length} mm',
        f'MLEF:Open1 ne Subst="MSub1" W={width} mm L=0 mm',
        SWEEP,
    ]
    return "\n".join(lines) + "\n"


RF_PROSE = {
    1: "Here is a first patch antenna with an inset feed line.",
    2: "The feed line had one node too many. Corrected netlist with a single 50 Ohm feed:",
    3: "The resonance is high. I lengthened the patch and adjusted the feed.",
    4: "Switching to a double feed through a tee to improve the match.",
    5: "Lengthening the patch slightly and narrowing both feeds.",
    6: "Fine-tuning the feed widths.",
    7: "Moving the resonance closer to 2.4 GHz.",
    8: "Shortening the feeds a little.",
    9: "Patch length increased to bring the resonance to 2.4 GHz.",
    10: "Refined feed geometry for a deeper match at 2.4 GHz.",
}


def rf_curve(it):
    f0, r = RF_CURVES[it]
    f0 *= 1e9
    rows = ["freq_hz,s11_db"]
    for k in range(101):
        f = 1.9e9 + k * 1e7
        z = r / complex(1, RF_Q * (f / f0 - f0 / f))
        g = abs((z - 50) / (z + 50))
        db = min(0.0, 20 * math.log10(max(g, 1e-3)))
        rows.append(f"{f:.0f},{db:.4f}")
    return "\n".join(rows) + "\n"


def rf_value_at(text, freq):
    for line in text.splitlines()[1:]:
        f, v = line.split(",")
        if abs(float(f) - freq) < 1:
            return float(v)
    raise ValueError(freq)


def generate_rf():
    turns = []
    for it in range(1, 11):
        response = f"{RF_PROSE[it]}\n\n```netlist\n{rf_netlist(it)}```\n"
        turns.append({"turn": it, "response": response, "prompt_tokens": 26000 + 1500 * (it - 1),
                      "completion_tokens": 1400 + 20 * it})
    write(DATA / "rf" / "transcript.jsonl", "".join(json.dumps(t) + "\n" for t in turns))
    for it in range(2, 11):
        text = rf_curve(it)
        v = rf_value_at(text, 2.4e9)
        if it < 9:
            assert v > -10, (it, v)
        write(DATA / "rf" / "fixtures" / f"iter_{it:02d}.csv", text)
    assert abs(rf_value_at(rf_curve(9), 2.4e9) + 11.3) < 1e-4
    assert abs(rf_value_at(rf_curve(10), 2.4e9) + 16.7) < 1e-4

    prompt = {
        "flow": "rf",
        "system_prompt": RF_SYSTEM,
        "user_prompt": RF_USER,
        "objectives": [{"metric": "s11_db", "comparator": "<=", "target": -10.0, "at_frequency_hz": 2.4e9}],
    }
    config = {
        "prompt": prompt,
        "strategy": {"kind": "fixed", "n": 10},
        "adapter": {"flow": "rf", "mode": "replay", "fixtures": "fixtures", "stages": ["instantiate", "simulate"]},
        "llm": {"model_id": "scripted", "max_tokens": 3000, "temperature": 1.0},
        "provider": {"kind": "scripted", "transcript": "transcript.jsonl"},
        "catalog": "../catalog.json",
    }
    write_json(DATA / "rf" / "session.json", config)
    mock = dict(config)
    mock["adapter"] = {"flow": "rf", "mode": "mock", "stages": ["instantiate", "simulate"]}
    write_json(DATA / "rf" / "session_mock.json", mock)
    # Netlists on their own for the validator and graph export.
    for it in range(1, 11):
        write(DATA / "rf" / "netlists" / f"iter_{it:02d}.net", rf_netlist(it))


# ---------------------------------------------------------------- OTA session

OTA_SYSTEM = """You write Spectre netlists for a 180 nm CMOS process.
Use simulator lang=spectre, instances of the form name (nodes) master param=value and analyses
named ac1, dc1, tran1. Transistor widths range from 0.5u to 20u, lengths from 0.18u to 2u.
Supply is 5 V. Gain is the low-frequency AC magnitude in dB, UGB the frequency where it crosses
0 dB, phase margin is 180 degrees plus the phase at the UGB.
Declare the tail bias as a parameter named vbias. Return the netlist in one fenced code block."""

OTA_USER = """Design a five-transistor operational transconductance amplifier with a 5 pF load.
It needs a gain of at least 40 dB and a stable phase margin of at least 60 degrees."""

OTA_DECK = """// five-transistor OTA, NMOS input pair
simulator lang=spectre
parameters vbias=1.0
VDD (vdd 0) vsource dc=5
VB (vb 0) vsource dc=vbias
VIP (inp 0) vsource dc=2.5 mag=1
VIN (inn 0) vsource dc=2.5
M1 (x inp tail 0) nmos w=2u l=1u
M2 (out inn tail 0) nmos w=2u l=1u
M3 (x x vdd vdd) pmos w=4u l=1u
M4 (out x vdd vdd) pmos w=4u l=1u
M5 (tail vb 0 0) nmos w=2u l=1u
CL (out 0) capacitor c=5p
ac1 ac start=1 stop=1G dec=50
dc1 dc param=vid start=-0.1 stop=0.1 step=1m
tran1 tran stop=1u
"""


def generate_ota():
    response = "Five-transistor OTA with an NMOS differential pair and a PMOS mirror load.\n\n```spectre\n" + OTA_DECK + "```\n"
    write(DATA / "ota" / "transcript.jsonl", json.dumps({"turn": 1, "response": response,
                                                         "prompt_tokens": 4200, "completion_tokens": 380}) + "\n")
    write(DATA / "ota" / "ota.scs", OTA_DECK)
    prompt = {
        "flow": "analogue",
        "system_prompt": OTA_SYSTEM,
        "user_prompt": OTA_USER,
        "objectives": [
            {"metric": "dc_gain_db", "comparator": ">=", "target": 40.0},
            {"metric": "phase_margin_deg", "comparator": ">=", "target": 60.0},
        ],
    }
    config = {
        "prompt": prompt,
        "strategy": {"kind": "fixed", "n": 1},
        "adapter": {"flow": "analogue", "mode": "mock", "stages": ["instantiate", "simulate"]},
        "llm": {"model_id": "scripted"},
        "provider": {"kind": "scripted", "transcript": "transcript.jsonl"},
        "catalog": "../catalog.json",
        "sweep": {"parameter": "vbias", "low": 0.6, "high": 2.5, "count": 15, "seed": 7, "exclusive_floor": 0.7},
    }
    write_json(DATA / "ota" / "session.json", config)


# ---------------------------------------------------------------- benchmark

CATEGORIES = [
    ("Combinational Logic", ["parity_8bit", "mux4to1", "majority", "bin_to_gray", "eq_comparator",
                             "decoder_2to4", "seven_segment_decoder", "priority_encoder"]),
    ("Finite State Machines", ["fsm_3state", "traffic_light", "elevator_controller", "vending_machine"]),
    ("Mathematical Functions", ["int_sqrt", "fibonacci", "mod_exp", "power", "log2_int"]),
    ("Basic Arithmetic Operations", ["add_8bit", "mult_4bit", "abs_diff", "modulo_op", "subtract_8bit"]),
    ("Bitwise and Logical Operations", ["bitwise_ops", "left_shift", "bitwise_not", "rotate_left"]),
    ("Pipelining", ["pipelined_adder", "pipelined_multiplier", "pipelined_accumulator",
                    "pipelined_max_finder", "pipelined_fir"]),
    ("Polynomial Evaluation", ["polynomial_1", "polynomial_2", "polynomial_3", "polynomial_4", "polynomial_5"]),
    ("Machine Learning", ["matrix_vector_mult", "relu", "gradient_descent", "mse_loss", "conv2d"]),
    ("Financial Computing", ["compound_interest", "ddm", "present_value", "currency_converter"]),
    ("Encryption", ["caesar_cipher", "modular_add_cipher", "feistel_cipher"]),
    ("Physics", ["free_fall_distance", "kinetic_energy", "potential_energy", "wavelength"]),
    ("Climate", ["carbon_footprint", "heat_index", "air_quality_index", "solar_radiation_average"]),
]

# name: (description, ports [(dir, width, name)], min LUT count)
PROBLEMS = {
    "parity_8bit": ("Compute the even parity bit of an 8-bit input.", [("input", 8, "in"), ("output", 1, "parity")], 2),
    "mux4to1": ("Select one of four 8-bit inputs with a 2-bit select.", [("input", 8, "a"), ("input", 8, "b"), ("input", 8, "c"), ("input", 8, "d"), ("input", 2, "sel"), ("output", 8, "out")], 16),
    "majority": ("Output 1 when at least two of three inputs are 1.", [("input", 1, "a"), ("input", 1, "b"), ("input", 1, "c"), ("output", 1, "y")], 1),
    "bin_to_gray": ("Convert a 4-bit binary number to Gray code.", [("input", 4, "bin"), ("output", 4, "gray")], 2),
    "eq_comparator": ("Compare two 4-bit numbers for equality.", [("input", 4, "a"), ("input", 4, "b"), ("output", 1, "eq")], 2),
    "decoder_2to4": ("Decode a 2-bit input to a one-hot 4-bit output with enable.", [("input", 2, "in"), ("input", 1, "en"), ("output", 4, "out")], 2),
    "seven_segment_decoder": ("Drive a seven-segment display from a 4-bit digit.", [("input", 4, "digit"), ("output", 7, "seg")], 7),
    "priority_encoder": ("Encode the index of the highest set bit of an 8-bit input.", [("input", 8, "in"), ("output", 3, "out"), ("output", 1, "valid")], 5),
    "fsm_3state": ("Three-state machine cycling IDLE, RUN, DONE on a start input.", [("input", 1, "clk"), ("input", 1, "reset"), ("input", 1, "start"), ("output", 2, "state")], 0),
    "traffic_light": ("Traffic light controller with timed green, yellow and red phases.", [("input", 1, "clk"), ("input", 1, "reset"), ("output", 1, "red"), ("output", 1, "yellow"), ("output", 1, "green")], 8),
    "elevator_controller": ("Four-floor elevator controller serving requests in order.", [("input", 1, "clk"), ("input", 1, "reset"), ("input", 4, "request"), ("output", 2, "floor"), ("output", 1, "moving")], 14),
    "vending_machine": ("Vending machine accepting 5 and 10 cent coins for a 15 cent item.", [("input", 1, "clk"), ("input", 1, "reset"), ("input", 1, "nickel"), ("input", 1, "dime"), ("output", 1, "dispense")], 4),
    "int_sqrt": ("Integer square root of an 8-bit number.", [("input", 8, "x"), ("output", 4, "root")], 14),
    "fibonacci": ("The n-th Fibonacci number for a 5-bit n.", [("input", 5, "n"), ("output", 16, "fib")], 40),
    "mod_exp": ("Modular exponentiation base^exp mod m on 4-bit operands.", [("input", 4, "base"), ("input", 4, "exp"), ("input", 4, "m"), ("output", 4, "result")], 60),
    "power": ("Raise a 4-bit base to a 2-bit exponent.", [("input", 4, "base"), ("input", 2, "exp"), ("output", 8, "result")], 22),
    "log2_int": ("Floor of log2 of a 16-bit input.", [("input", 16, "x"), ("output", 4, "log")], 10),
    "add_8bit": ("Add two 8-bit numbers with carry out.", [("input", 8, "a"), ("input", 8, "b"), ("output", 9, "sum")], 8),
    "mult_4bit": ("Multiply two 4-bit numbers.", [("input", 4, "a"), ("input", 4, "b"), ("output", 8, "p")], 17),
    "abs_diff": ("Absolute difference of two 8-bit numbers.", [("input", 8, "a"), ("input", 8, "b"), ("output", 8, "diff")], 20),
    "modulo_op": ("Remainder of an 8-bit dividend by a 4-bit divisor.", [("input", 8, "a"), ("input", 4, "b"), ("output", 4, "r")], 34),
    "subtract_8bit": ("Subtract two 8-bit numbers with borrow.", [("input", 8, "a"), ("input", 8, "b"), ("output", 8, "diff"), ("output", 1, "borrow")], 8),
    "bitwise_ops": ("AND, OR and XOR of two 8-bit inputs.", [("input", 8, "a"), ("input", 8, "b"), ("output", 8, "and_out"), ("output", 8, "or_out"), ("output", 8, "xor_out")], 24),
    "left_shift": ("Shift an 8-bit input left by a 3-bit amount.", [("input", 8, "data"), ("input", 3, "shamt"), ("output", 8, "out")], 14),
    "bitwise_not": ("Invert an 8-bit input.", [("input", 8, "in"), ("output", 8, "out")], 0),
    "rotate_left": ("Rotate an 8-bit input left by a 3-bit amount.", [("input", 8, "data"), ("input", 3, "amt"), ("output", 8, "out")], 24),
    "pipelined_adder": ("Two-stage pipelined 16-bit adder.", [("input", 1, "clk"), ("input", 16, "a"), ("input", 16, "b"), ("output", 17, "sum")], 16),
    "pipelined_multiplier": ("Three-stage pipelined 8-bit multiplier.", [("input", 1, "clk"), ("input", 8, "a"), ("input", 8, "b"), ("output", 16, "p")], 70),
    "pipelined_accumulator": ("Pipelined accumulator of 8-bit samples.", [("input", 1, "clk"), ("input", 1, "reset"), ("input", 8, "x"), ("output", 16, "acc")], 16),
    "pipelined_max_finder": ("Pipelined maximum of four 8-bit inputs.", [("input", 1, "clk"), ("input", 8, "a"), ("input", 8, "b"), ("input", 8, "c"), ("input", 8, "d"), ("output", 8, "max")], 24),
    "pipelined_fir": ("Four-tap pipelined FIR filter with fixed coefficients.", [("input", 1, "clk"), ("input", 1, "reset"), ("input", 8, "x"), ("output", 16, "y")], 90),
    "polynomial_1": ("Evaluate x^2 + 2x + 1 for an 8-bit x.", [("input", 8, "x"), ("output", 17, "y")], 40),
    "polynomial_2": ("Evaluate x^3 + 3x^2 + 3x + 1 for an 8-bit x.", [("input", 8, "x"), ("output", 25, "y")], 120),
    "polynomial_3": ("Evaluate x^2 - x - 6 for a signed 8-bit x.", [("input", 8, "x"), ("output", 17, "y")], 45),
    "polynomial_4": ("Evaluate 3(x+2)^2 for an 8-bit x.", [("input", 8, "x"), ("output", 19, "y")], 48),
    "polynomial_5": ("Evaluate (a+b)^2 - (a-b)^2 for 8-bit a and b.", [("input", 8, "a"), ("input", 8, "b"), ("output", 18, "y")], 60),
    "matrix_vector_mult": ("Multiply a 2x2 matrix by a 2-vector of 4-bit values.", [("input", 16, "m"), ("input", 8, "v"), ("output", 18, "y")], 50),
    "relu": ("Rectified linear unit on a signed 8-bit input.", [("input", 8, "x"), ("output", 8, "y")], 4),
    "gradient_descent": ("One gradient descent update w - lr*grad in fixed point.", [("input", 16, "w"), ("input", 16, "grad"), ("input", 8, "lr"), ("output", 16, "w_next")], 130),
    "mse_loss": ("Mean squared error of four 8-bit prediction-target pairs.", [("input", 32, "pred"), ("input", 32, "target"), ("output", 18, "loss")], 150),
    "conv2d": ("3x3 convolution of a 3x3 patch of 4-bit pixels.", [("input", 36, "patch"), ("input", 36, "kernel"), ("output", 12, "y")], 200),
    "compound_interest": ("Compound interest after n periods in fixed point.", [("input", 16, "principal"), ("input", 8, "rate"), ("input", 4, "n"), ("output", 24, "amount")], 260),
    "ddm": ("Dividend discount model price D/(r-g) in fixed point.", [("input", 16, "dividend"), ("input", 8, "r"), ("input", 8, "g"), ("output", 16, "price")], 230),
    "present_value": ("Present value of a future amount in fixed point.", [("input", 16, "fv"), ("input", 8, "rate"), ("input", 4, "n"), ("output", 16, "pv")], 210),
    "currency_converter": ("Convert an amount with a fixed-point exchange rate.", [("input", 16, "amount"), ("input", 16, "rate"), ("output", 16, "converted")], 45),
    "caesar_cipher": ("Shift an ASCII letter by a key.", [("input", 8, "char_in"), ("input", 5, "key"), ("output", 8, "char_out")], 22),
    "modular_add_cipher": ("Add a key to each byte modulo 256.", [("input", 8, "data"), ("input", 8, "key"), ("output", 8, "out")], 8),
    "feistel_cipher": ("Two-round Feistel network on a 16-bit block.", [("input", 16, "block"), ("input", 16, "key"), ("output", 16, "out")], 40),
    "free_fall_distance": ("Distance g*t^2/2 after t seconds.", [("input", 8, "t"), ("output", 16, "d")], 35),
    "kinetic_energy": ("Kinetic energy m*v^2/2.", [("input", 8, "m"), ("input", 8, "v"), ("output", 24, "e")], 90),
    "potential_energy": ("Potential energy m*g*h.", [("input", 8, "m"), ("input", 8, "h"), ("output", 20, "e")], 60),
    "wavelength": ("Wavelength c/f for an integer frequency.", [("input", 16, "f"), ("output", 16, "lambda")], 180),
    "carbon_footprint": ("Carbon footprint from electricity, gas and travel.", [("input", 8, "kwh"), ("input", 8, "gas"), ("input", 8, "km"), ("output", 16, "co2")], 55),
    "heat_index": ("Heat index from temperature and humidity.", [("input", 8, "temp"), ("input", 8, "humidity"), ("output", 16, "hi")], 190),
    "air_quality_index": ("Air quality index from a particulate concentration.", [("input", 10, "pm"), ("output", 9, "aqi")], 120),
    "solar_radiation_average": ("Average of eight solar radiation samples.", [("input", 64, "samples"), ("output", 8, "avg")], 60),
}

# Problems whose implementation never passes, and the stage where runs stop.
NEVER_IMPLEMENT = {
    11: "simulate", 12: "synthesize", 13: "simulate", 15: "simulate", 17: "implement", 21: "simulate",
    31: "implement", 35: "synthesize", 39: "simulate", 41: "implement", 42: "simulate", 43: "simulate",
    48: "synthesize", 55: "simulate", 56: "implement",
}
LUT_PASS = {1, 2, 3, 4, 5, 6, 7, 18, 19, 20, 22, 23, 24, 25, 26, 27, 29, 32, 33, 38, 45, 46, 47, 49, 51}
TIMING_PASS = {1, 3, 4, 5, 10, 18, 23, 25, 27, 38, 47}

ERROR_LOGS = {
    "simulate": "ERROR: [VRFC 10-2989] 'out_r' is not declared [design.v:14]\n",
    "synthesize": "ERROR: [Synth 8-439] module 'adder_cell' not found [design.v:22]\n",
    "implement": "ERROR: [Place 30-640] Place Check : This design requires more I/O than the device provides\n",
}


def port_decl(direction, width, name):
    return f"{direction} {'' if width == 1 else f'[{width - 1}:0] '}{name}"


def header_of(name, ports):
    body = ",\n".join("    " + port_decl(*p) for p in ports)
    return f"module {name}(\n{body}\n);"


def testbench_of(name, ports):
    lines = ["`timescale 1ns / 1ps", "module tb;"]
    clocked = any(p[2] == "clk" for p in ports)
    for d, w, n in ports:
        kind = "reg" if d == "input" else "wire"
        lines.append(f"    {kind} {'' if w == 1 else f'[{w - 1}:0] '}{n};")
    conns = ", ".join(f".{n}({n})" for _, _, n in ports)
    lines.append(f"    {name} dut({conns});")
    if clocked:
        lines.append("    initial clk = 0;")
        lines.append("    always #5 clk = ~clk;")
    lines.append("    initial begin")
    for d, w, n in ports:
        if d == "input" and n != "clk":
            lines.append(f"        {n} = 0;")
    lines.append("        #20;")
    for d, w, n in ports:
        if d == "input" and n not in ("clk", "reset"):
            lines.append(f"        {n} = {w}'d1;")
    lines.append("        #20;")
    outs = ", ".join(n for d, _, n in ports if d == "output")
    lines.append(f'        $display("%h", {{{outs}}});')
    lines.append("        $finish;")
    lines.append("    end")
    lines.append("endmodule")
    return "\n".join(lines) + "\n"


def bench_outcomes(rng):
    problems = {}
    pid = 0
    order = [m for _, mods in CATEGORIES for m in mods]
    for name in order:
        pid += 1
        lut_min = PROBLEMS[name][2]
        runs = []
        if pid in NEVER_IMPLEMENT:
            stop = NEVER_IMPLEMENT[pid]
            stages = ["simulate", "synthesize", "implement"]
            for r in range(5):
                # Some runs fail earlier than the problem's usual stopping point.
                k = stages.index(stop)
                if k > 0 and rng.random() < 0.4:
                    k = rng.randrange(0, k)
                out = {s: "pass" for s in stages[:k]}
                out[stages[k]] = "fail"
                out["log"] = ERROR_LOGS[stages[k]]
                out["tool_time_s"] = round(rng.uniform(15, 45), 2)
                if k >= 2:
                    out["utilization"] = {"lut": lut_min + 50, "ff": 0, "bram": 0, "dsp": 0, "io": 40}
                runs.append(out)
            problems[str(pid)] = {"top_module": name, "runs": runs}
            continue
        n_impl = rng.randint(1, 5)
        n_lut = rng.randint(1, n_impl) if pid in LUT_PASS else 0
        n_tim = rng.randint(1, n_impl) if pid in TIMING_PASS else 0
        perm = list(range(5))
        rng.shuffle(perm)
        impl_runs = set(perm[:n_impl])
        lut_runs = set(perm[:n_lut])
        tim_runs = set(perm[n_impl - n_tim:n_impl]) if n_tim else set()
        for r in range(5):
            out = {}
            if r not in impl_runs:
                stage = rng.choice(["simulate", "synthesize", "implement"])
                for s in ["simulate", "synthesize", "implement"]:
                    if s == stage:
                        out[s] = "fail"
                        break
                    out[s] = "pass"
                out["log"] = ERROR_LOGS[stage]
                if stage == "implement":
                    out["utilization"] = {"lut": lut_min + 3, "ff": 0, "bram": 0, "dsp": 0, "io": 30}
            else:
                out = {"simulate": "pass", "synthesize": "pass", "implement": "pass"}
                lut = lut_min if r in lut_runs else lut_min + 1 + rng.randint(0, max(2, lut_min // 4))
                ff = 0
                if any(p[2] == "clk" for p in PROBLEMS[name][1]):
                    ff = sum(p[1] for p in PROBLEMS[name][1] if p[0] == "output") * 2
                io = sum(p[1] for p in PROBLEMS[name][1])
                out["utilization"] = {"lut": lut, "ff": ff, "bram": 0, "dsp": 1 if "mult" in name else 0, "io": io}
                if r in tim_runs:
                    path = round(rng.uniform(0.3, 0.9), 3)
                    period = round(rng.uniform(0.6, 0.95), 3)
                else:
                    path = round(rng.uniform(10.5, 16.0), 3)
                    period = round(rng.uniform(10.5, 14.0), 3)
                logic = round(path * rng.uniform(0.2, 0.45), 3)
                out["timing"] = {"data_path_ns": path, "logic_ns": logic, "route_ns": round(path - logic, 3),
                                 "achieved_period_ns": period}
                dyn = round(rng.uniform(0.005, 0.09), 3)
                out["power"] = {"total_w": round(0.105 + dyn, 3), "dynamic_w": dyn, "static_w": 0.105}
                out["log"] = "INFO: [Common 17-206] Exiting Vivado\n"
                if rng.random() < 0.3:
                    out["log"] = ("CRITICAL WARNING: [Timing 38-282] The design failed to meet the timing "
                                  "requirements.\n") + out["log"]
            out["tool_time_s"] = round(rng.uniform(25, 70), 2)
            runs.append(out)
        problems[str(pid)] = {"top_module": name, "runs": runs}
    return problems


def generate_bench():
    base = []
    policy = {}
    for category, mods in CATEGORIES:
        for name in mods:
            desc, ports, lut = PROBLEMS[name]
            base.append({"category": category, "top_module": name, "description": desc,
                         "header": header_of(name, ports), "testbench": testbench_of(name, ports)})
            policy[name] = lut
    assert len(base) == 56
    write_json(DATA / "bench" / "base.json", {"problems": base})
    write_json(DATA / "bench" / "lut_policy.json", {"lut_objectives": policy})
    outcomes = bench_outcomes(random.Random(2024))
    write_json(DATA / "bench" / "replay.json", {"problems": outcomes}, indent=1)
    write_json(DATA / "bench" / "adapter.json", {"flow": "fpga", "mode": "replay", "fixtures": "replay.json",
                                                  "part_id": "xc7z020clg400-1"})

    impl = sum(1 for p in outcomes.values() if any(r.get("implement") == "pass" for r in p["runs"]))
    assert impl == 41, impl

    # A single problem whose implementation always fails.
    fail = {"problems": {"1": {"runs": [{
        "simulate": "pass", "synthesize": "pass", "implement": "fail",
        "utilization": {"lut": 4, "ff": 0, "bram": 0, "dsp": 0, "io": 9},
        "log": ERROR_LOGS["implement"], "tool_time_s": 12.0}]}}}
    write_json(FIX / "fpga" / "fail_implement.json", fail)

    # A foreign dataset layout and the mapping onto ours.
    foreign = [{"Category": b["category"], "Module": b["top_module"], "Problem": b["description"],
                "Header": b["header"], "Testbench": b["testbench"]} for b in base[:4]]
    write_json(FIX / "bench" / "foreign.json", foreign)
    write_json(FIX / "bench" / "mapping.json", {"fields": {"category": "Category", "top_module": "Module",
                                                           "description": "Problem", "header": "Header",
                                                           "testbench": "Testbench"}})


FSM_RESPONSE = """Here is the three-state machine.

```verilog
module fsm_3state(
    input clk,
    input reset,
    input start,
    output [1:0] state
);
    localparam IDLE = 2'd0, RUN = 2'd1, DONE = 2'd2;
    reg [1:0] s;
    always @(posedge clk) begin
        if (reset) s <= IDLE;
        else case (s)
            IDLE: if (start) s <= RUN;
            RUN: s <= DONE;
            default: s <= IDLE;
        endcase
    end
    assign state = s;
endmodule
```
"""


def generate_fsm():
    name = "fsm_3state"
    desc, ports, _ = PROBLEMS[name]
    header = header_of(name, ports)
    prompt = {
        "flow": "fpga",
        "system_prompt": "You write synthesizable Verilog-2001 for a Zynq-7000 device. Keep the given module "
                         "header unchanged and return the module in one fenced code block tagged verilog.",
        "user_prompt": "Problem 9: " + desc,
        "objectives": [
            {"metric": "lut_count", "comparator": "<=", "target": 0},
            {"metric": "clock_freq_hz", "comparator": ">=", "target": 1e9},
        ],
        "testbench": testbench_of(name, ports),
        "clock_constraint": "port=clk period=1.000",
    }
    runs = [{"simulate": "pass", "synthesize": "pass", "implement": "pass",
             "utilization": {"lut": 2, "ff": 2, "bram": 0, "dsp": 0, "io": 6},
             "timing": {"data_path_ns": 0.9, "logic_ns": 0.3, "route_ns": 0.6, "achieved_period_ns": 1.11},
             "power": {"total_w": 0.108, "dynamic_w": 0.003, "static_w": 0.105},
             "log": "INFO: [Common 17-206] Exiting Vivado\n", "tool_time_s": 41.0}]
    write_json(DATA / "fsm" / "replay.json", {"problems": {"9": {"runs": runs}}})
    write(DATA / "fsm" / "transcript.jsonl", json.dumps({"turn": 1, "response": FSM_RESPONSE,
                                                         "prompt_tokens": 900, "completion_tokens": 210}) + "\n")
    write_json(DATA / "fsm" / "session.json", {
        "prompt": prompt,
        "strategy": {"kind": "fixed", "n": 1},
        "adapter": {"flow": "fpga", "mode": "replay", "fixtures": "replay.json", "part_id": "xc7z020clg400-1"},
        "llm": {"model_id": "scripted", "max_tokens": 3000, "temperature": 1.5, "top_p": 0.75},
        "provider": {"kind": "scripted", "transcript": "transcript.jsonl"},
        "header": header,
        "problem_id": 9,
    })


# ---------------------------------------------------------------- reports and logs

UTILIZATION_RPT = """Copyright 1986-2022 Xilinx, Inc. All Rights Reserved.
| Tool Version : Vivado v.2023.2 (lin64) Build 4029153 Fri Oct 13 20:13:54 MDT 2023
| Design       : pipelined_adder
| Device       : 7z020clg400-1
| Design State : Routed

Utilization Design Information

1. Slice Logic
--------------

+----------------------------+------+-------+------------+-----------+-------+
|          Site Type         | Used | Fixed | Prohibited | Available | Util% |
+----------------------------+------+-------+------------+-----------+-------+
| Slice LUTs                 | 1,024|     0 |          0 |     53200 |  1.92 |
|   LUT as Logic             |  960 |     0 |          0 |     53200 |  1.80 |
|   LUT as Memory            |   64 |     0 |          0 |     17400 |  0.37 |
| Slice Registers            |   51 |     0 |          0 |    106400 |  0.05 |
|   Register as Flip Flop    |   51 |     0 |          0 |    106400 |  0.05 |
| F7 Muxes                   |    0 |     0 |          0 |     26600 |  0.00 |
+----------------------------+------+-------+------------+-----------+-------+

2. Memory
---------

+----------------+------+-------+------------+-----------+-------+
|    Site Type   | Used | Fixed | Prohibited | Available | Util% |
+----------------+------+-------+------------+-----------+-------+
| Block RAM Tile |  1.5 |     0 |          0 |       140 |  1.07 |
|   RAMB36/FIFO* |    1 |     0 |          0 |       140 |  0.71 |
|   RAMB18       |    1 |     0 |          0 |       280 |  0.36 |
+----------------+------+-------+------------+-----------+-------+

3. DSP
------

+-----------+------+-------+------------+-----------+-------+
| Site Type | Used | Fixed | Prohibited | Available | Util% |
+-----------+------+-------+------------+-----------+-------+
| DSPs      |    2 |     0 |          0 |       220 |  0.91 |
+-----------+------+-------+------------+-----------+-------+

4. IO and GT Specific
---------------------

+-----------------------------+------+-------+------------+-----------+-------+
|          Site Type          | Used | Fixed | Prohibited | Available | Util% |
+-----------------------------+------+-------+------------+-----------+-------+
| Bonded IOB                  |   50 |     0 |          0 |       125 | 40.00 |
+-----------------------------+------+-------+------------+-----------+-------+
"""

TIMING_RPT = """Timing Report

Slack (MET) :             0.412ns  (required time - arrival time)
  Source:                 a_r_reg[3]/C
  Destination:            sum_r_reg[16]/D

Worst Path
----------

+-----------------+----------+
| Metric          | Value    |
+-----------------+----------+
| Data Path Delay | 3.488 ns |
| Logic Delay     | 1.402 ns |
| Route Delay     | 2086 ps  |
| Achieved Period | 3.588ns  |
+-----------------+----------+
"""

POWER_RPT = """Power Report

1. Summary
----------

+--------------------------+--------------+
| Total On-Chip Power (W)  | 0.118        |
| Design Power Budget (W)  | Unspecified* |
| Dynamic (W)              | 13 mW        |
| Device Static (W)        | 0.105        |
| Junction Temperature (C) | 26.4         |
+--------------------------+--------------+
"""

VIVADO_LOG = """****** Vivado v2023.2 (64-bit)
source run.tcl
# read_verilog design.v
INFO: [Synth 8-6157] synthesizing module 'pipelined_adder' [design.v:1]
CRITICAL WARNING: [Constraints 18-952] Clock net clk is not driven by a clock buffer [constraints.xdc:2]
  the clock constraint was applied to a non-clock net
WARNING: [Synth 8-3331] design pipelined_adder has unconnected port reset
ERROR: [Synth 8-439] module 'adder_cell' not found [design.v:22]
  instantiated as u0
ERROR: [Common 17-69] Command failed: Synthesis failed - please see the console or run log file for details
INFO: [Common 17-206] Exiting Vivado at Mon Oct 14 10:02:11 2024...
"""


def generate_reports():
    write(FIX / "reports" / "utilization.rpt", UTILIZATION_RPT)
    write(FIX / "reports" / "timing.rpt", TIMING_RPT)
    write(FIX / "reports" / "power.rpt", POWER_RPT)
    write(FIX / "reports" / "vivado.log", VIVADO_LOG)
    write(FIX / "reports" / "timing_bad_sum.rpt", TIMING_RPT.replace("1.402 ns", "2.402 ns"))
    write(FIX / "reports" / "utilization_missing_dsp.rpt", UTILIZATION_RPT.replace("| DSPs      |", "| Other     |"))


# ---------------------------------------------------------------- netlist corpus

def corpus_spectre(i, rng):
    r = rng.choice(["1k", "4.7k", "10k", "220"])
    c = rng.choice(["1p", "5p", "10n", "100f"])
    lines = [f"// corpus deck {i}", "simulator lang=spectre", f"parameters vdd={rng.choice([1.8, 3.3, 5])}"]
    kind = i % 5
    if kind == 0:
        lines += ["V1 (in 0) vsource dc=1 mag=1", f"R1 (in out) resistor r={r}", f"C1 (out 0) capacitor c={c}",
                  "ac1 ac start=1 stop=1G dec=20"]
    elif kind == 1:
        w = rng.choice(["1u", "2u", "0.5u"])
        lines += ["VDD (vdd 0) vsource dc=vdd", "VIN (in 0) vsource dc=0.9",
                  f"MP (out in vdd vdd) pmos w={w} l=0.18u", f"MN (out in 0 0) nmos w={w} l=0.18u",
                  f"CL (out 0) capacitor c={c}", "dc1 dc param=vin start=0 stop=1.8 step=10m",
                  "tran1 tran stop=10n"]
    elif kind == 2:
        lines += ["I1 (0 a) isource dc=1m", f"R1 (a 0) resistor r={r}", f"L1 (a b) inductor l={rng.choice(['1n', '10u'])}",
                  f"R2 (b 0) resistor r={r}", "dc1 dc"]
    elif kind == 3:
        lines = [f"* corpus deck {i}", "V1 in 0 1", f"R1 in mid {r}", f"R2 mid 0 {r}", f"C1 mid 0 {c}",
                 ".tran 1n 100n", ".end"]
    else:
        lines += ["VDD (vdd 0) vsource dc=vdd", "VB (vb 0) vsource dc=0.8",
                  "M1 (x inp tail 0) nmos w=2u l=1u", "M2 (out inn tail 0) nmos w=2u l=1u",
                  "M3 (x x vdd vdd) pmos w=4u l=1u", "M4 (out x vdd vdd) pmos w=4u l=1u",
                  "M5 (tail vb 0 0) nmos w=2u l=1u", "VIP (inp 0) vsource dc=0.9", "VIN (inn 0) vsource dc=0.9",
                  f"CL (out 0) capacitor c={c}", "ac1 ac start=1 stop=1G dec=50"]
    return "\n".join(lines) + "\n"


def corpus_ads(i, rng):
    w = round(rng.uniform(1.0, 4.0), 2)
    lng = round(rng.uniform(5.0, 30.0), 1)
    lines = [f"// corpus layout {i}", f"MSUB:MSub1 H={rng.choice([0.8, 1.6])} mm Er={rng.choice([2.2, 3.5, 4.4])}",
             "Term:Term1 p1 0 Num=1 Z=50 Ohm"]
    if i % 2:
        lines += [f'MLIN:TL1 p1 p2 Subst="MSub1" W={w} mm L={lng} mm', "Term:Term2 p2 0 Num=2 Z=50 Ohm"]
    else:
        lines += [f'MTEE:Tee1 p1 a b Subst="MSub1" W1={w} mm W2={w} mm W3={w} mm',
                  f'MLIN:TL1 a p2 Subst="MSub1" W={w} mm L={lng} mm', f'MLEF:Open1 b Subst="MSub1" W={w} mm L=0 mm',
                  "Term:Term2 p2 0 Num=2 Z=50 Ohm"]
    lines.append(f"S_Param:SP1 Start={rng.choice([0.5, 1])} GHz Stop={rng.choice([3, 6])} GHz Step=10 MHz")
    return "\n".join(lines) + "\n"


def generate_corpus():
    rng = random.Random(99)
    for i in range(30):
        write(FIX / "corpus" / f"deck_{i:02d}.scs", corpus_spectre(i, rng))
    for i in range(20):
        write(FIX / "corpus" / f"layout_{i:02d}.net", corpus_ads(i, rng))
    write(FIX / "netlists" / "arity_violation.net", rf_netlist(1))


# ---------------------------------------------------------------- inverter sweep

def generate_inverters():
    # Logistic transfer curves vout = vdd / (1 + exp(g (vin - vm))), one per design.
    rng = random.Random(5)
    designs = []
    for k in range(15):
        designs.append({"label": f"inv{k + 1:02d}", "gain": round(rng.uniform(1.2, 14.0), 3),
                        "vm": round(rng.uniform(1.6, 3.4), 3)})
    write_json(FIX / "inverters" / "sweep.json", {"vdd": 5.0, "points": 501, "designs": designs})


def main():
    write_json(DATA / "catalog.json", {"components": CATALOG})
    generate_rf()
    generate_ota()
    generate_bench()
    generate_fsm()
    generate_reports()
    generate_corpus()
    generate_inverters()


if __name__ == "__main__":
    main()
