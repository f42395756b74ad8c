"""``rigidlab <command> --config <path> [--out dir] [--threads N]``.

Exit status: 0 on success, 1 on validation errors, 2 when a numeric gate
refuses to produce output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import asymptotics as asy
from .acceptance import verify_suite
from .cocycles import matching_report
from .config import COMMANDS, ExperimentConfig, load_config, parse_config
from .equilibrium import (
    Potential,
    all_index_functions,
    bowen_integral,
    build_ensemble,
    counting_inequality,
    measure_approx,
    pigeonhole_certificate,
)
from .errors import NumericGate, ValidationError
from .longitudinal import ANALYTIC, FINITE_DIFFERENCE, longitudinal_cocycle, transversal_independence_check
from .suspension import make_suspension, orbit_flow_data
from .toral import enumerate_periodic_orbits, homoclinic_point, make_automorphism


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _write(out_dir: str, name: str, text: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _base(cfg: ExperimentConfig):
    a, b, c, d = cfg.matrix
    return make_automorphism([[a, b], [c, d]])


def _flow(cfg: ExperimentConfig, name: str = "roof"):
    w = cfg.weight(name)
    if not w.is_fiber_constant:
        raise ValidationError(f"[{name}] must not contain fiber powers")
    return make_suspension(_base(cfg), w.base)


def _potential(cfg: ExperimentConfig) -> Potential:
    if cfg.potential_kind == "unstable_jacobian":
        return Potential.unstable_jacobian()
    if cfg.potential_kind == "constant":
        return Potential.constant(cfg.potential_constant)
    if cfg.potential_kind == "weight":
        return Potential.from_weight(cfg.weight("potential"))
    return Potential.zero()


def _rep(orbit):
    x, y = orbit.representative
    return float(x), float(y)


# -- commands -----------------------------------------------------------------

def cmd_enumerate(cfg: ExperimentConfig):
    cat = enumerate_periodic_orbits(_base(cfg), cfg.k_max, threads=cfg.threads)
    rows = [(o.prime_period, o.denominator, *o.numerators[0], *_rep(o)) for o in cat.orbits()]
    csv_text = _csv(["k", "denominator", "num_x", "num_y", "rep_x", "rep_y"], rows)
    counts = {str(k): len(b) for k, b in sorted(cat.items())}
    return {"enumerate.csv": csv_text}, {"orbit_count": cat.orbit_count(), "counts_by_period": counts}


def cmd_spectrum(cfg: ExperimentConfig):
    flow = _flow(cfg)
    rows = []
    for o in enumerate_periodic_orbits(flow.base, cfg.k_max, threads=cfg.threads).orbits():
        fd = orbit_flow_data(flow, o)
        rows.append((o.prime_period, *_rep(o), fd.period, fd.exponent, fd.multiplier))
    return ({"spectrum.csv": _csv(["k", "rep_x", "rep_y", "period", "exponent", "multiplier"], rows)},
            {"orbit_count": len(rows), "roof_min": flow.roof_min})


def cmd_cocycle(cfg: ExperimentConfig):
    flow = _flow(cfg)
    phi = cfg.weight("weight")
    methods = [ANALYTIC, FINITE_DIFFERENCE] if cfg.method == "both" else [cfg.method]
    rows = []
    worst = 0.0
    for o in enumerate_periodic_orbits(flow.base, cfg.k_max).orbits():
        vals = [longitudinal_cocycle(flow, o, phi, m, cfg.h0).value for m in methods]
        for m, v in zip(methods, vals):
            rows.append((o.prime_period, *_rep(o), m, v))
        if len(vals) == 2:
            worst = max(worst, abs(vals[0] - vals[1]))
    summary = {"orbit_count": len(rows) // len(methods)}
    if len(methods) == 2:
        summary["max_method_gap"] = worst
    tilt = cfg.weight("tilt")
    if tilt.components:
        if not tilt.is_fiber_constant:
            raise ValidationError("[tilt] must not contain fiber powers")
        orbits = enumerate_periodic_orbits(flow.base, min(cfg.k_max, 9)).orbits()
        summary["max_tilt_discrepancy"] = max(
            transversal_independence_check(flow, o, tilt.base, cfg.h0).discrepancy for o in orbits)
    return {"cocycle.csv": _csv(["k", "rep_x", "rep_y", "method", "K"], rows)}, summary


def cmd_homoclinic(cfg: ExperimentConfig):
    flow = _flow(cfg)
    h = homoclinic_point(flow.base, cfg.m)
    exp = asy.homoclinic_periods(flow, h, range(cfg.n_min, cfg.n_max + 1))
    tp, unc = asy.estimate_T_prime(exp)
    fit = asy.recover_exponent(exp)
    rows = [(n, math.log(abs(exp.residuals[n]))) for n in exp.reported() if exp.residuals[n] != 0.0]
    summary = {"t0": exp.T0, "t_prime": tp, "t_prime_uncertainty": unc,
               "log_mu_hat": fit.log_mu_hat, "k_is_zero": fit.k_is_zero,
               "t_prime_oracle": asy.homoclinic_sum_oracle(flow, h)}
    return {"homoclinic.csv": _csv(["n", "log_abs_r"], rows)}, summary


def cmd_bowen(cfg: ExperimentConfig):
    flow = _flow(cfg)
    g = cfg.weight("test")
    pot = _potential(cfg)
    rows, ensembles = [], []
    steps = int(math.floor((cfg.t_stop - cfg.t_start) / cfg.t_step + 1e-9)) + 1
    for j in range(steps):
        T = cfg.t_start + j * cfg.t_step
        ens = build_ensemble(flow, T, cfg.delta, pot, threads=cfg.threads)
        info = ens.summary()
        ensembles.append(info)
        if ens.orbit_count:
            rows.append((T, bowen_integral(measure_approx(ens), g)))
    return {"bowen.csv": _csv(["T", "value"], rows)}, {"ensembles": ensembles}


def cmd_match(cfg: ExperimentConfig):
    f1, f2 = _flow(cfg, "roof"), _flow(cfg, "roof2")
    rep = matching_report(f1, cfg.weight("weight"), f2, cfg.weight("weight2"), cfg.k_max, cfg.resolved_tol())
    summary = {"verdict": rep.verdict, "max_gap": rep.max_gap,
               "max_chi_gap": max((abs(r.chi_gap) for r in rep.rows), default=0.0)}
    return {"match.csv": rep.to_csv()}, summary


def cmd_pigeonhole(cfg: ExperimentConfig):
    N = cfg.n
    dom, rng = counting_inequality(N)
    cert = pigeonhole_certificate(N, lambda a: int(np.argmax(a)) + 1)
    summary = {"n": N, "domain_size": dom, "range_size": rng, "inequality_holds": dom > rng,
               "alpha_bar": list(cert.alpha_bar), "beta_bar": list(cert.beta_bar), "index": cert.index,
               "certificate_valid": cert.check()}
    if N == 2:
        summary["exhaustive_index_functions"] = sum(pigeonhole_certificate(2, I).check() for I in all_index_functions(2))
    return {}, summary


HANDLERS = {
    "enumerate": cmd_enumerate,
    "spectrum": cmd_spectrum,
    "cocycle": cmd_cocycle,
    "homoclinic": cmd_homoclinic,
    "bowen": cmd_bowen,
    "match": cmd_match,
    "pigeonhole": cmd_pigeonhole,
}


def run(cfg: ExperimentConfig, out_dir: str | None = None) -> dict:
    """Execute a parsed config and write its artifacts; returns the JSON summary."""
    out_dir = out_dir or cfg.out
    files, summary = HANDLERS[cfg.command](cfg)
    summary = dict(summary)
    summary["command"] = cfg.command
    summary["config"] = cfg.echo()
    for name, text in files.items():
        _write(out_dir, name, text)
    _write(out_dir, f"{cfg.command}.json", _json(summary))
    return summary


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rigidlab", description="Suspension-flow rigidity laboratory")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="experiment config file")
    p.add_argument("--out", help="output directory (overrides the config)")
    p.add_argument("--threads", type=int, help="worker threads for enumeration")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            results = verify_suite()
            return 0 if all(r.passed for r in results) else 1
        if not args.config:
            raise ValidationError("--config is required")
        cfg = load_config(args.config)
        if cfg.command != args.command:
            raise ValidationError(f"config is for command {cfg.command!r}, not {args.command!r}")
        if args.threads is not None:
            if args.threads < 1:
                raise ValidationError("--threads must be >= 1")
            cfg.threads = args.threads
        summary = run(cfg, args.out)
        print(_json(summary["config"]), end="")
        return 0
    except ValidationError as exc:
        print(f"rigidlab: error: {exc}", file=sys.stderr)
        return 1
    except NumericGate as exc:
        print(f"rigidlab: numeric gate {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"rigidlab: error: {exc}", file=sys.stderr)
        return 1


__all__ = ["main", "run", "parse_config"]
