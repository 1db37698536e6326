"""Batch command-line front end with reproducible CSV output.

Every output file starts with one JSON header line (prefixed ``#``) holding
the fully resolved configuration, seed and tool version; feeding that line
back through ``--config`` reproduces the CSV body byte for byte. Config
precedence is built-in defaults < JSON file < command-line flags, and
unknown JSON keys are rejected as a typo guard.

Subcommands: phase, parisi, fp, shatter-scan, simulate, chaos.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__, franz_parisi, mixtures, parisi, phase
from .lab import LangevinConfig
from .lab.observables import chaos_scan, correlation_curve
from .lab.disorder import sample_disorder

RESERVED_KEYS = ("command", "version", "seed", "out", "threads")

DEFAULTS = {
    "phase": {"p_min": 3, "p_max": 10, "tol": 1e-10},
    "parisi": {"p": 3, "band_q": 0.0, "beta": 1.0, "m": 512,
               "solver_q_max": 1.0 - 1e-4},
    "fp": {"p": 3, "beta": 1.0, "q_min": 0.0, "q_max": 0.99, "n_q": 50,
           "m": 512, "solver_q_max": 1.0 - 1e-4},
    "shatter-scan": {"p_list": "128,256,512,1024,2048",
                     "beta_fracs": "0.85,0.9,0.95", "n_q": 48,
                     "n_q_half": 32, "m": 512, "solver_q_max": 1.0 - 1e-4},
    "simulate": {"n": 16, "p": 3, "beta": 1.0, "step": 0.01, "n_steps": 1000,
                 "record_every": 10, "n_traj": 8,
                 "method": "replica-exchange"},
    "chaos": {"n": 16, "p": 3, "beta": 1.0, "epsilons": "0,0.25,0.5,1",
              "n_samples": 16, "n_disorders": 4, "burn_in": 300, "thin": 15},
}

COLUMNS = {
    "phase": ["p", "beta_d", "beta_c", "argmin_q_c", "error"],
    "parisi": ["t", "cdf", "value", "kkt_residual", "converged"],
    "fp": ["q", "value", "rs_bound", "derivative", "band_free_energy",
           "error"],
    "shatter-scan": ["p", "beta", "beta_c", "q_under", "q_bar", "passes_fp",
                     "n_points", "hb_q_under", "hb_q_bar", "hb_window",
                     "hb_n_points", "error"],
    "simulate": ["t", "corr", "stderr"],
    "chaos": ["epsilon", "overlap_sq", "overlap_sq_stderr", "w2",
              "w2_stderr"],
}


def entry() -> None:
    sys.exit(main(sys.argv[1:]))


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 2
    try:
        config = _resolve_config(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        rows, n_errors = _run_command(config)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _write_output(config, rows)
    return 1 if n_errors else 0


# --------------------------
# config plumbing
# --------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pspinlab",
        description="Phase scans, Franz-Parisi curves, shattering-window "
                    "scans, dynamics and chaos experiments for spherical "
                    "p-spin models.")
    sub = parser.add_subparsers(dest="command")
    for name, defaults in DEFAULTS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None,
                       help="JSON config file (a '#'-prefixed header line "
                            "from a previous run also works)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", type=str, default=None,
                       help="output CSV path (default: stdout)")
        p.add_argument("--threads", type=int, default=None)
        for key, value in defaults.items():
            flag = "--" + key.replace("_", "-")
            p.add_argument(flag, type=type(value), default=None)
    return parser


def _resolve_config(args: argparse.Namespace) -> dict:
    command = args.command
    resolved = dict(DEFAULTS[command])
    resolved.update({"command": command, "version": __version__, "seed": 0,
                     "out": None, "threads": 1})
    if args.config is not None:
        file_cfg = _load_config_file(args.config)
        known = set(DEFAULTS[command]) | set(RESERVED_KEYS)
        unknown = set(file_cfg) - known
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}; "
                             f"known keys are {sorted(known)}")
        if file_cfg.get("command", command) != command:
            raise ValueError(f"config is for command "
                             f"{file_cfg['command']!r}, not {command!r}")
        file_cfg.pop("version", None)
        resolved.update(file_cfg)
    for key in list(DEFAULTS[command]) + ["seed", "out", "threads"]:
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
    resolved["command"] = command
    resolved["version"] = __version__
    return resolved


def _load_config_file(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read().strip()
    if text.startswith("#"):
        text = text.lstrip("#").strip().splitlines()[0]
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(cfg, dict):
        raise ValueError("config must be a JSON object")
    return cfg


def _write_output(config: dict, rows: list[dict]) -> None:
    buf = io.StringIO()
    buf.write("# " + json.dumps(config, sort_keys=True) + "\r\n")
    writer = csv.writer(buf, lineterminator="\r\n")
    cols = COLUMNS[config["command"]]
    writer.writerow(cols)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in cols])
    text = buf.getvalue()
    if config["out"] is None:
        sys.stdout.write(text)
    else:
        with open(config["out"], "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


# --------------------------
# command execution
# --------------------------

def _run_command(config: dict) -> tuple[list[dict], int]:
    runner = {
        "phase": _run_phase,
        "parisi": _run_parisi,
        "fp": _run_fp,
        "shatter-scan": _run_shatter,
        "simulate": _run_simulate,
        "chaos": _run_chaos,
    }[config["command"]]
    rows = runner(config)
    n_errors = sum(1 for r in rows if r.get("error"))
    return rows, n_errors


def _map_items(fn, items, threads: int) -> list:
    if threads > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _run_phase(config: dict) -> list[dict]:
    if config["p_min"] < 3 or config["p_min"] > config["p_max"]:
        raise ValueError("need 3 <= p_min <= p_max")
    items = [(p, config["tol"]) for p in
             range(config["p_min"], config["p_max"] + 1)]
    return _map_items(_phase_row, items, config["threads"])


def _phase_row(item) -> dict:
    p, tol = item
    try:
        bc, q = phase.beta_c(p, tol)
        return {"p": p, "beta_d": phase.beta_d_pure(p), "beta_c": bc,
                "argmin_q_c": q, "error": ""}
    except Exception as exc:
        return {"p": p, "error": str(exc)}


def _run_parisi(config: dict) -> list[dict]:
    xi = (mixtures.band_mixture(config["p"], config["band_q"])
          if config["band_q"] != 0.0 else mixtures.pure(config["p"]))
    res = parisi.minimize_cs(xi, config["beta"],
                             (config["m"], config["solver_q_max"]))
    return [{"t": t, "cdf": x, "value": res.value,
             "kkt_residual": res.kkt_residual, "converged": res.converged}
            for t, x in zip(res.cdf.grid.tolist(), res.cdf.cdf.tolist())]


def _run_fp(config: dict) -> list[dict]:
    qs = np.linspace(config["q_min"], config["q_max"], config["n_q"])
    items = [(config["p"], config["beta"], float(q),
              config["m"], config["solver_q_max"]) for q in qs]
    return _map_items(_fp_row, items, config["threads"])


def _fp_row(item) -> dict:
    p, beta, q, m, q_max = item
    try:
        pt = franz_parisi.fp_value(p, beta, q, (m, q_max))
        return {"q": q, "value": pt.value, "rs_bound": pt.rs_bound,
                "derivative": pt.derivative,
                "band_free_energy": pt.band_free_energy,
                "error": "" if pt.converged else "solver did not converge"}
    except Exception as exc:
        return {"q": q, "error": str(exc)}


def _run_shatter(config: dict) -> list[dict]:
    p_list = [int(s) for s in str(config["p_list"]).split(",") if s]
    fracs = [float(s) for s in str(config["beta_fracs"]).split(",") if s]
    items = []
    for p in p_list:
        bc, _ = phase.beta_c(p)
        for frac in fracs:
            items.append((p, frac * bc, bc, config["n_q"],
                          config["n_q_half"], config["m"],
                          config["solver_q_max"]))
    return _map_items(_shatter_row, items, config["threads"])


def _shatter_row(item) -> dict:
    p, beta, bc, n_q, n_q_half, m, q_max = item
    row = {"p": p, "beta": beta, "beta_c": bc, "error": ""}
    try:
        spec = (m, q_max)
        win = franz_parisi.find_window(
            p, beta, franz_parisi.window_grid(p, n=n_q), spec)
        row.update({"q_under": win.q_under, "q_bar": win.q_bar,
                    "passes_fp": win.passes_fp, "n_points": win.n_points})
        if p >= 51:  # [1 - 1/(2p), 1) lies inside the scannable (0.99, 1)
            hb = franz_parisi.find_window(
                p, beta, franz_parisi.half_band_grid(p, n=n_q_half), spec)
            row.update({"hb_q_under": hb.q_under, "hb_q_bar": hb.q_bar,
                        "hb_window": hb.exists, "hb_n_points": hb.n_points})
        else:
            row.update({"hb_window": False, "hb_n_points": 0})
    except Exception as exc:
        row["error"] = str(exc)
    return row


def _run_simulate(config: dict) -> list[dict]:
    d = sample_disorder(config["n"], config["p"], seed=config["seed"])
    cfg = LangevinConfig(beta=config["beta"], step=config["step"],
                         n_steps=config["n_steps"],
                         record_every=config["record_every"],
                         seed=config["seed"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        curve = correlation_curve(d, config["beta"], cfg, config["n_traj"],
                                  seed=config["seed"],
                                  method=config["method"],
                                  threads=config["threads"])
    return [{"t": t, "corr": c, "stderr": s} for t, c, s in curve]


def _run_chaos(config: dict) -> list[dict]:
    eps = [float(s) for s in str(config["epsilons"]).split(",") if s]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return chaos_scan(config["n"], config["p"], config["beta"], eps,
                          config["n_samples"], config["n_disorders"],
                          seed=config["seed"], burn_in=config["burn_in"],
                          thin=config["thin"], threads=config["threads"])


if __name__ == "__main__":
    entry()
