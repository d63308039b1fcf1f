"""Command-line harness: validated configs, experiments, CSV tables and manifests.

Every subcommand reads a flat ``key = value`` file (``--config``) and then
applies ``--key value`` overrides; command-line values win. Unknown keys and
hypothesis violations are rejected before any sampling (exit code 2). A run
whose estimates lack the support to decide their question keeps its output
and exits with code 3.

Outputs go to ``--output-dir`` (default ``$CRITPERC_OUTPUT_DIR``, else
``./results``): ``<name>.csv`` with the columns
``experiment,n,p,variant,samples,mean,stderr,seed,stream`` and
``<name>.manifest.json`` holding the resolved config, its hash, the seed,
the package version and the wall-clock window. ``critperc rerun
<manifest>`` repeats a run; the CSV comes out byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .estimators import experiments as ex
from .estimators import newman_ziff, samplers, steering
from .estimators._sampling import estimate_from, sample_values
from .estimators.construction import estimate_event_o
from .geometry import (
    ConstantsConfig,
    InfeasibleParameters,
    PartitionSpec,
    choose_parameters,
    construction_inequalities,
    parse_pi_model,
)
from .lattice import Region, RngSpec
from .oracle import (
    EnumerationTask,
    enumerate_conditional_expectation,
    enumerate_distribution,
    enumerate_expectation,
    enumerate_probability,
)

EXIT_INVALID = 2
EXIT_INSUFFICIENT = 3
OUTPUT_ENV = "CRITPERC_OUTPUT_DIR"


class ConfigError(ValueError):
    pass


# -- value parsers --------------------------------------------------------


def _bool(text):
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _ints(text):
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    return [int(v) for v in str(text).replace(",", " ").split()]


def _floats(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(v) for v in str(text).replace(",", " ").split()]


def _opt_float(text):
    return None if text in (None, "", "none") else float(text)


def _opt_int(text):
    return None if text in (None, "", "none") else int(text)


def _opt_str(text):
    return None if text in (None, "", "none") else str(text)


# key: (parser, default, help)
COMMON = {
    "experiment": (_opt_str, None, "must match the subcommand when given"),
    "seed": (int, 0, "RNG seed"),
    "stream": (int, 0, "RNG stream"),
    "output_dir": (_opt_str, None, "output directory"),
    "name": (_opt_str, None, "base name of the output files"),
    "workers": (int, 1, "sampling threads (results do not depend on it)"),
    "dump_samples": (_bool, False, "also write raw per-sample values, one per line"),
    "checkpoint": (_opt_str, None, "accumulator checkpoint file for long runs"),
}

SCHEMAS = {
    "pi": {
        "n": (_ints, [8], "box radii"),
        "p": (float, 0.5, "edge probability"),
        "budget": (int, 10_000, "samples per n"),
        "exact": (_bool, False, "exact enumeration instead of sampling"),
        "sweep": (_bool, False, "single-sweep (Newman-Ziff) estimate"),
    },
    "hc": {
        "k": (int, 8, "box width"),
        "l": (int, 8, "box height"),
        "p": (float, 0.5, "edge probability"),
        "variant": (str, "standard", "crossing variant: standard or paper-strict"),
        "budget": (int, 10_000, "samples"),
        "exact": (_bool, False, "exact enumeration instead of sampling"),
        "sweep": (_bool, False, "single-sweep (Newman-Ziff) estimate"),
    },
    "length": {
        "p": (float, 0.45, "edge probability (not 1/2 for a finite answer)"),
        "eps": (float, 0.25, "threshold, in (0, 1/2)"),
        "n_max": (int, 64, "largest size scanned"),
        "budget": (int, 10_000, "samples per size"),
        "variant": (str, "standard", "crossing variant"),
    },
    "mcluster": {
        "n": (_ints, [8], "box radii"),
        "p": (float, 0.5, "edge probability"),
        "budget": (int, 10_000, "samples per n"),
        "exact": (_bool, False, "exact law by enumeration (n <= 1)"),
    },
    "theorem1": {
        "a": (float, 0.2, "lower factor"),
        "b": (float, 2.0, "upper factor"),
        "n": (_ints, [16, 32, 64, 128], "box radii"),
        "p": (float, 0.5, "edge probability"),
        "budget": (int, 10_000, "cluster samples per n"),
        "pi_budget": (_opt_int, None, "samples for pi^ (default: budget)"),
        "floor": (float, 0.05, "fixed positive level"),
    },
    "pibounds": {
        "n": (_ints, [8, 16, 32, 64, 128, 256], "dyadic sizes"),
        "p_near": (_opt_float, None, "off-critical p for bound (iii)"),
        "budget": (int, 10_000, "radius-sweep samples"),
        "ctilde_budget": (_opt_int, None, "samples of C~ per size"),
        "length_budget": (int, 2_000, "samples per size of the length scan"),
        "eps": (float, 0.25, "threshold of the characteristic length"),
    },
    "ymoment": {
        "m": (_ints, [8, 16, 32], "inner radii"),
        "p": (float, 0.5, "edge probability"),
        "budget": (int, 10_000, "samples per m"),
        "pi_budget": (_opt_int, None, "samples for pi^"),
        "c_grid": (_floats, [0.1, 0.25, 0.5, 1.0, 2.0], "tail levels c"),
        "floor": (float, 0.2, "fixed positive level"),
    },
    "smallmax": {
        "K": (float, 0.3, "size factor"),
        "n": (_ints, [16, 32, 64], "box radii"),
        "p": (float, 0.5, "edge probability"),
        "budget": (int, 10_000, "samples per n"),
        "pi_budget": (_opt_int, None, "samples for pi^"),
        "floor": (float, 0.1, "fixed positive level"),
    },
    "steering": {
        "demo": (_bool, False, "run the k = 2 demonstration instance"),
        "random": (int, 0, "number of random hypothesis-satisfying instances"),
        "budget": (int, 100_000, "simulation samples per instance"),
    },
    "event-o": {
        "m": (int, 3, "blocks per side (odd)"),
        "s": (int, 13, "block radius"),
        "t": (_opt_int, None, "corridor width (t <= s/3)"),
        "eps": (_opt_float, None, "alternative to t: t = floor(eps s), eps < 1/12"),
        "n": (_opt_int, None, "window radius (>= m s)"),
        "p": (float, 0.5, "edge probability"),
        "budget": (int, 1_000, "samples"),
        "check_implication": (_bool, True, "check the crossing cluster on every success"),
    },
    "choose-params": {
        "a": (float, 0.1, "lower factor"),
        "b": (float, 10.0, "upper factor"),
        "pi_model": (str, "power:0.5", "power:<e>[:<A>], const or table:<n>=<pi>,..."),
        "C10": (float, 1.0, "constant"),
        "C15": (float, 1.0, "constant"),
        "C17": (float, 1.0, "constant"),
        "C18": (float, 1.0, "constant"),
        "n_max": (int, 4096, "search range 1..n_max"),
    },
    "enumerate": {
        "observable": (str, "origin-to-boundary", "named observable"),
        "window": (str, "box:1", "box:<n>, rect:<x0>,<x1>,<y0>,<y1> or rectangle:<k>,<n>"),
        "p": (str, "1/2", "edge probability as an exact fraction"),
        "mode": (str, "probability", "probability, expectation or distribution"),
        "condition": (_opt_str, None, "named conditioning event"),
    },
}


# -- config resolution ----------------------------------------------------


def read_config_file(path) -> dict:
    """Flat ``key = value`` pairs; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def resolve_config(command: str, file_values: dict, overrides: dict) -> dict:
    schema = {**COMMON, **SCHEMAS[command]}
    raw = {}
    for source in (file_values, overrides):
        for key, value in source.items():
            if key not in schema:
                raise ConfigError(f"unknown key {key!r} for {command}")
            raw[key] = value
    config = {}
    for key, (parse, default, _) in schema.items():
        if key in raw:
            try:
                config[key] = parse(raw[key])
            except (TypeError, ValueError) as err:
                raise ConfigError(f"bad value for {key}: {raw[key]!r} ({err})") from None
        else:
            config[key] = default
    if config["experiment"] not in (None, command):
        raise ConfigError(f"config is for {config['experiment']!r}, not {command!r}")
    config["experiment"] = command
    validate(command, config)
    return config


def _require(cond, message):
    if not cond:
        raise ConfigError(message)


def validate(command: str, c: dict):
    """Hypothesis checks made before any sampling."""
    if "p" in c and command != "enumerate":
        _require(0 <= c["p"] <= 1, f"p must lie in [0, 1], got {c['p']}")
    if "budget" in c:
        _require(c["budget"] >= 1, "budget must be positive")
    _require(c["workers"] >= 1, "workers must be positive")
    _require(0 <= c["seed"] < 2**64 and 0 <= c["stream"] < 2**64, "seed and stream must be 64-bit unsigned")
    if "n" in c and isinstance(c["n"], list):
        _require(c["n"] and min(c["n"]) >= 0, "n must be a nonempty list of sizes >= 0")
    if command == "hc":
        _require(c["k"] >= 1 and c["l"] >= 1, "k and l must be >= 1")
        _require(c["variant"] in ("standard", "paper-strict"), f"unknown variant {c['variant']!r}")
    if command == "length":
        _require(0 < c["eps"] < 0.5, f"eps must lie in (0, 1/2), got {c['eps']}")
        _require(0 < c["p"] < 1, "p must lie in (0, 1)")
        _require(c["n_max"] >= 1, "n_max must be >= 1")
    if command in ("theorem1", "choose-params"):
        _require(c["a"] > 0, "a must be positive")
        _require(c["a"] < c["b"], f"need a < b, got a={c['a']}, b={c['b']}")
    if command == "pibounds":
        ns = c["n"]
        _require(len(ns) >= 2 and all(n >= 1 and n & (n - 1) == 0 for n in ns), "n must hold >= 2 dyadic sizes")
        _require(0 < c["eps"] < 0.5, f"eps must lie in (0, 1/2), got {c['eps']}")
        if c["p_near"] is not None:
            _require(0 < c["p_near"] < 1, "p_near must lie in (0, 1)")
    if command == "ymoment":
        _require(c["m"] and min(c["m"]) >= 1, "m must be a nonempty list of sizes >= 1")
    if command == "smallmax":
        _require(c["K"] > 0, "K must be positive")
    if command == "steering":
        _require(c["demo"] or c["random"] > 0, "steering needs --demo or --random N")
    if command == "event-o":
        _require(c["m"] >= 1 and c["m"] % 2 == 1, f"m must be odd, got {c['m']}")
        if c["eps"] is not None:
            _require(0 < c["eps"] < 1 / 12, f"eps must lie in (0, 1/12), got {c['eps']}")
            derived = int(c["eps"] * c["s"] + 1e-12)
            _require(c["t"] in (None, derived), "t and eps disagree")
            c["t"] = derived
        _require(c["t"] is not None, "t (or eps) is required")
        _require(c["t"] >= 1, "t must be >= 1")
        _require(3 * c["t"] <= c["s"], f"t must satisfy t <= s/3, got s={c['s']}, t={c['t']}")
        if c["n"] is not None:
            _require(c["n"] >= c["m"] * c["s"], f"n must be >= m s = {c['m'] * c['s']}")
    if command == "choose-params":
        for key in ("C10", "C15", "C17", "C18"):
            _require(c[key] > 0, f"{key} must be positive")
        _require(c["n_max"] >= 1, "n_max must be >= 1")
        try:
            parse_pi_model(c["pi_model"])
        except ValueError as err:
            raise ConfigError(str(err)) from None
    if command == "enumerate":
        _require(c["mode"] in ("probability", "expectation", "distribution"), f"unknown mode {c['mode']!r}")
        try:
            p = Fraction(c["p"])
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"p must be a fraction, got {c['p']!r}") from None
        _require(0 <= p <= 1, "p must lie in [0, 1]")


# keys that say where or how fast a run goes, not what it computes
_UNHASHED = ("output_dir", "name", "workers", "checkpoint", "dump_samples")


def config_hash(config: dict) -> str:
    core = {k: v for k, v in config.items() if k not in _UNHASHED}
    text = json.dumps(core, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


# -- experiment runners ---------------------------------------------------


class Outcome:
    """Rows for the CSV, lines for stdout, optional raw samples and flags."""

    def __init__(self):
        self.rows: list[tuple] = []
        self.lines: list[str] = []
        self.samples: list = []
        self.flags: set = set()
        self.write_files = True

    def row(self, experiment, n, p, variant, est, rng=None):
        seed = est.seed if rng is None else rng.seed
        stream = est.stream if rng is None else rng.stream
        self.rows.append((experiment, n, repr(float(p)), variant, est.samples,
                          repr(float(est.mean)), repr(float(est.stderr)), seed, stream))

    def report(self, report: ex.ExperimentReport):
        self.rows.extend(report.csv_rows())
        for c in report.checks:
            where = " ".join(f"{k}={c[k]}" for k in ("m", "n") if k in c)
            self.lines.append(f"check {c['check']} {where}: {'ok' if c['ok'] else 'FAIL'}")
        for key, value in report.fitted.items():
            self.lines.append(f"fitted {key} = {value}")
        self.lines.append(f"verdict: {'pass' if report.passed else 'fail'}")
        self.flags |= report.flags


def _rng(c) -> RngSpec:
    return RngSpec(c["seed"], c["stream"])


def _exact_line(label, value: Fraction):
    return f"{label} = {value} ({float(value):.12g})"


def run_pi(c, out: Outcome):
    rng = _rng(c)
    for n in c["n"]:
        sub = rng.child(f"n/{n}")
        if c["exact"]:
            task = EnumerationTask(Region.box(n), Fraction(str(c["p"])), observable="origin-to-boundary")
            value = enumerate_probability(task)
            out.lines.append(str(value))
            out.rows.append(("pi", n, repr(float(c["p"])), "exact", 0, repr(float(value)), "0.0", c["seed"], c["stream"]))
            continue
        if c["sweep"]:
            est = newman_ziff.estimate_pi_sweep(n, [c["p"]], c["budget"], sub, c["workers"])[c["p"]]
            out.row("pi", n, c["p"], "sweep", est)
        elif c["dump_samples"]:
            radii = samplers.radius_samples(n, c["p"], c["budget"], sub, c["workers"])
            est = estimate_from(radii >= n, sub, indicator=True)
            out.samples.extend(int(r >= n) for r in radii)
            out.row("pi", n, c["p"], "direct", est)
        else:
            ck = None if c["checkpoint"] is None else f"{c['checkpoint']}.n{n}"
            est = samplers.estimate_pi(n, c["p"], c["budget"], sub, c["workers"], ck)
            out.row("pi", n, c["p"], "direct", est)
        out.lines.append(f"pi({n}) = {est}")


def run_hc(c, out: Outcome):
    rng = _rng(c)
    k, l = c["k"], c["l"]
    if c["exact"]:
        task = EnumerationTask(Region.rect(0, k, 0, l), Fraction(str(c["p"])), observable=f"hc:{c['variant']}")
        value = enumerate_probability(task)
        out.lines.append(str(value))
        out.rows.append(("hc", k, repr(float(c["p"])), c["variant"] + "-exact", 0, repr(float(value)), "0.0",
                         c["seed"], c["stream"]))
        return
    if c["sweep"]:
        est = newman_ziff.estimate_hc_sweep(k, l, [c["p"]], c["variant"], c["budget"], rng, c["workers"])[c["p"]]
        tag = c["variant"] + "-sweep"
    elif c["dump_samples"]:
        fn = samplers._hc_fn(k, l, c["p"], c["variant"])
        vals = sample_values(fn, c["budget"], rng, c["workers"])
        est = estimate_from(vals, rng, indicator=True)
        out.samples.extend(int(v) for v in vals)
        tag = c["variant"]
    else:
        est = samplers.estimate_hc(k, l, c["p"], c["variant"], c["budget"], rng, c["workers"], c["checkpoint"])
        tag = c["variant"]
    out.row("hc", k, c["p"], f"{tag} l={l}", est)
    out.lines.append(f"P(HC({k},{l})) = {est}")


def run_length(c, out: Outcome):
    res = samplers.estimate_characteristic_length(c["p"], c["eps"], c["n_max"], c["budget"], _rng(c),
                                                  c["variant"], c["workers"])
    for n, est in res.table.items():
        out.row("length", n, c["p"], f"hc {c['variant']}", est)
    out.lines.append(f"L({c['p']}) = {res}")
    if res.unresolved:
        out.lines.append(f"unresolved sizes: {res.unresolved}")
        if res.value is None:
            out.flags.add("insufficient-support")


def run_mcluster(c, out: Outcome):
    rng = _rng(c)
    for n in c["n"]:
        sub = rng.child(f"n/{n}")
        if c["exact"]:
            law = enumerate_distribution(EnumerationTask(Region.box(n), Fraction(str(c["p"])), observable="max-cluster"))
            mean = sum(k * v for k, v in law.items())
            for size, prob in law.items():
                out.lines.append(f"P(M_{n} = {size}) = {prob}")
            out.lines.append(_exact_line(f"E[M_{n}]", mean))
            out.rows.append(("mcluster", n, repr(float(c["p"])), "exact", 0, repr(float(mean)), "0.0",
                             c["seed"], c["stream"]))
            continue
        if c["dump_samples"]:
            vals = samplers.max_cluster_samples(n, c["p"], c["budget"], sub, c["workers"])
            est = estimate_from(vals, sub)
            out.samples.extend(int(v) for v in vals)
        else:
            ck = None if c["checkpoint"] is None else f"{c['checkpoint']}.n{n}"
            est = samplers.estimate_max_cluster(n, c["p"], c["budget"], sub, c["workers"], ck)
        out.row("mcluster", n, c["p"], "mean", est)
        out.lines.append(f"E[M_{n}] = {est}")


def run_theorem1(c, out: Outcome):
    rep = ex.theorem_one_experiment(c["a"], c["b"], c["n"], c["p"], c["budget"], _rng(c), c["pi_budget"],
                                    floor=c["floor"], workers=c["workers"])
    for n in c["n"]:
        out.lines.append(f"n={n}: P(M_n in interval) = {rep.estimate(n, 'interval')}")
    out.report(rep)
    if any(rep.estimate(n, "pi").total == 0 for n in c["n"]):
        out.flags.add("insufficient-support")


def run_pibounds(c, out: Outcome):
    rep = ex.pi_bounds_check(c["n"], c["p_near"], c["budget"], _rng(c), c["ctilde_budget"], c["length_budget"],
                             c["eps"], c["workers"])
    out.report(rep)


def run_ymoment(c, out: Outcome):
    rep = ex.y_moment_check(c["m"], c["p"], c["budget"], _rng(c), c["pi_budget"], tuple(c["c_grid"]),
                            c["floor"], c["workers"])
    out.report(rep)
    if "degenerate-fit" in rep.flags:
        out.flags.add("insufficient-support")


def run_smallmax(c, out: Outcome):
    rep = ex.small_max_cluster_check(c["K"], c["n"], c["p"], c["budget"], _rng(c), c["pi_budget"], c["floor"],
                                     workers=c["workers"])
    out.report(rep)


def run_steering(c, out: Outcome):
    rng = _rng(c)
    instances = []
    if c["demo"]:
        instances.append(("demo", steering.demo_instance()))
    if c["random"]:
        import numpy as np

        gen = np.random.default_rng(c["seed"])
        instances += [(f"random/{i}", steering.random_instance(gen)) for i in range(c["random"])]
    below = 0
    for idx, (label, inst) in enumerate(instances):
        exact = steering.steering_oracle(inst)
        sim = steering.steering_simulate(inst, c["budget"], rng.child(label))
        ok = exact >= inst.bound
        below += not ok
        out.lines.append(f"{label}: k={inst.k} exact {exact} bound {inst.bound} "
                         f"({'holds' if ok else 'VIOLATED'}); simulated {sim}")
        for tag, value in (("exact", exact), ("bound", inst.bound)):
            out.rows.append(("steering", idx, "", f"{label} {tag}", 0, repr(float(value)), "0.0",
                             c["seed"], c["stream"]))
        out.rows.append(("steering", idx, "", f"{label} simulated", sim.samples, repr(float(sim.mean)),
                         repr(float(sim.stderr)), sim.seed, sim.stream))
    out.lines.append(f"instances below the bound: {below}")


def run_event_o(c, out: Outcome):
    spec = PartitionSpec(c["m"], c["s"], c["t"])
    n = c["n"] if c["n"] is not None else c["m"] * c["s"]
    res = estimate_event_o(spec, n, c["p"], c["budget"], _rng(c), c["check_implication"])
    tag = f"m={c['m']} s={c['s']} t={c['t']}"
    out.row("event-o", n, c["p"], tag, res.estimate)
    out.rows.append(("event-o", n, repr(float(c["p"])), f"{tag} violations", res.holds,
                     repr(float(res.violations)), "0.0", c["seed"], c["stream"]))
    out.lines.append(f"P(O^{{{c['m']},{c['s']},{c['t']}}}) on Lambda_{n} = {res.estimate}")
    if c["check_implication"]:
        out.lines.append(f"crossing-cluster implication: {res.violations} violations on {res.holds} successes")


def run_choose_params(c, out: Outcome):
    out.write_files = False
    constants = ConstantsConfig(c["a"], c["b"], c["C10"], c["C15"], c["C17"], c["C18"])
    model = parse_pi_model(c["pi_model"])
    try:
        choice = choose_parameters(constants, model, range(1, c["n_max"] + 1))
    except InfeasibleParameters as err:
        out.lines.append(f"infeasible: {err}")
        out.lines.append(json.dumps(err.report, sort_keys=True))
        return
    out.lines.append(f"x = 1/{choice.inv_x}, eps = {Fraction(choice.eps).limit_denominator()}, N = {choice.N}")
    for n in (choice.N, 2 * choice.N, 4 * choice.N):
        checks = construction_inequalities(choice.x, choice.eps, [n], constants, model)
        flags = ", ".join(f"{k}={'ok' if bool(v[0]) else 'FAIL'}" for k, v in checks.items())
        out.lines.append(f"n = {n}: {flags}")


def _window(text: str) -> Region:
    kind, _, rest = text.partition(":")
    nums = [int(v) for v in rest.split(",")] if rest else []
    if kind == "box" and len(nums) == 1:
        return Region.box(nums[0])
    if kind == "rect" and len(nums) == 4:
        return Region.rect(*nums)
    if kind == "rectangle" and len(nums) == 2:
        return Region.rectangle(*nums)
    raise ConfigError(f"bad window {text!r}")


def run_enumerate(c, out: Outcome):
    out.write_files = False
    task = EnumerationTask(_window(c["window"]), Fraction(c["p"]), observable=c["observable"])
    if c["mode"] == "distribution":
        for value, prob in enumerate_distribution(task).items():
            out.lines.append(f"{value}: {prob}")
        return
    if c["condition"] is not None:
        value = enumerate_conditional_expectation(task, c["condition"])
    elif c["mode"] == "probability":
        value = enumerate_probability(task)
    else:
        value = enumerate_expectation(task)
    out.lines.append(str(value))


RUNNERS = {
    "pi": run_pi,
    "hc": run_hc,
    "length": run_length,
    "mcluster": run_mcluster,
    "theorem1": run_theorem1,
    "pibounds": run_pibounds,
    "ymoment": run_ymoment,
    "smallmax": run_smallmax,
    "steering": run_steering,
    "event-o": run_event_o,
    "choose-params": run_choose_params,
    "enumerate": run_enumerate,
}


# -- persistence ----------------------------------------------------------


def csv_text(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ex.CSV_COLUMNS)
    writer.writerows(rows)
    return buf.getvalue()


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def execute(command: str, config: dict, stdout=None) -> int:
    """Run a resolved config; returns the exit status."""
    stdout = stdout or sys.stdout
    started = _now()
    out = Outcome()
    try:
        RUNNERS[command](config, out)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as err:
        # hypothesis violations raised by the library (caps, invalid instances, ...)
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID
    for line in out.lines:
        print(line, file=stdout)
    if out.write_files:
        outdir = Path(config["output_dir"] or os.environ.get(OUTPUT_ENV) or "results")
        outdir.mkdir(parents=True, exist_ok=True)
        name = config["name"] or f"{command}-seed{config['seed']}"
        csv_path = outdir / f"{name}.csv"
        csv_path.write_text(csv_text(out.rows))
        if config["dump_samples"] and out.samples:
            (outdir / f"{name}.samples.txt").write_text("".join(f"{v}\n" for v in out.samples))
        manifest = {
            "config_hash": config_hash(config),
            "seed": config["seed"],
            "version": __version__,
            "started": started,
            "finished": _now(),
            "rows_written": len(out.rows),
            "config": config,
            "command": command,
            "csv": str(csv_path),
        }
        (outdir / f"{name}.manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        print(f"wrote {csv_path}", file=stdout)
    if "undersampled" in out.flags:
        print("warning: some estimates are undersampled", file=sys.stderr)
    if "insufficient-support" in out.flags:
        print("insufficient support: results kept, question left open", file=sys.stderr)
        return EXIT_INSUFFICIENT
    return 0


# -- argument parsing -----------------------------------------------------


def _add_keys(parser, schema):
    for key, (parse, default, help_text) in schema.items():
        flag = "--" + key.replace("_", "-")
        if parse is _bool:
            parser.add_argument(flag, dest=key, nargs="?", const="true", default=None, help=help_text)
        else:
            parser.add_argument(flag, dest=key, default=None, help=f"{help_text} (default: {default})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="critperc", description="Critical bond percolation experiments.")
    parser.add_argument("--version", action="version", version=f"critperc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for command, schema in SCHEMAS.items():
        p = sub.add_parser(command, help=f"{command} experiment")
        p.add_argument("--config", help="flat key = value file")
        _add_keys(p, {**COMMON, **schema})
    rerun = sub.add_parser("rerun", help="repeat a run from its manifest")
    rerun.add_argument("manifest")
    rerun.add_argument("--output-dir", dest="output_dir", default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "rerun":
            with open(args.manifest) as fh:
                manifest = json.load(fh)
            command = manifest["command"]
            values = dict(manifest["config"])
            if args.output_dir is not None:
                values["output_dir"] = args.output_dir
            config = resolve_config(command, {}, {k: v for k, v in values.items()})
        else:
            command = args.command
            file_values = read_config_file(args.config) if args.config else {}
            overrides = {k: v for k, v in vars(args).items()
                         if k not in ("command", "config") and v is not None}
            config = resolve_config(command, file_values, overrides)
    except (ConfigError, OSError, json.JSONDecodeError, KeyError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID
    return execute(command, config)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
