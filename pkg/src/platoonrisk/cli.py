"""Command-line front end.

Subcommands: analyze, stability, bounds, sweep-epsilon, simulate, validate.
Exit codes: 0 success, 2 config error, 3 unstable platoon, 4 numerical
failure.  Output files are written atomically (temp file + rename) and all
floats are serialized with 12 significant digits, so identical configs and
seeds produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import _kernels
from .bounds import evar_bounds
from .config import ScenarioConfig, load_scenario
from .errors import (ConfigError, DivergenceError, DomainError, NearInstabilityError,
                     PlatoonRiskError, QuadratureError, StabilityError)
from .graphs import laplacian, spectrum
from .risk import pair_risks
from .sim import SimConfig, empirical_tail_check, simulate
from .stability import platoon_stable
from .variance import pair_variances

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_UNSTABLE = 3
EXIT_NUMERICAL = 4

CSV_VERSION_LINE = "# schema_version=1"


def _fmt(x) -> str:
    x = float(x)
    if math.isinf(x):
        return "inf"
    return format(x, ".12g")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _round_floats(obj):
    """Round-trip floats through 12-significant-digit text for stable output."""
    if isinstance(obj, float):
        return float("inf") if math.isinf(obj) else float(format(obj, ".12g"))
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def _json_text(doc) -> str:
    doc = _round_floats(json.loads(json.dumps(doc, default=_json_default)))
    return json.dumps(doc, indent=2, allow_nan=True) + "\n"


def _resolve_path(path: str) -> str:
    base = os.environ.get("PLATOONRISK_OUTPUT_DIR")
    if base and not os.path.isabs(path):
        return os.path.join(base, path)
    return path


def _write_atomic(path: str, text: str) -> None:
    path = _resolve_path(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-platoonrisk-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, path: str | None) -> None:
    if path:
        _write_atomic(path, text)
    else:
        sys.stdout.write(text)


def _params_echo(params) -> dict:
    return dataclasses.asdict(params)


def _stability_csv(verdict) -> str:
    buf = io.StringIO()
    buf.write(CSV_VERSION_LINE + "\n")
    buf.write("lambda,s1,s2,a,s2_cap,pass\n")
    for m in verdict.per_mode:
        buf.write(",".join([_fmt(m.lam), _fmt(m.s1), _fmt(m.s2), _fmt(m.a_root),
                            _fmt(m.s2_cap), str(m.passed).lower()]) + "\n")
    return buf.getvalue()


def _require_stable(spec, params):
    verdict = platoon_stable(spec, params.tau, params.beta)
    if not verdict.stable:
        sys.stderr.write("platoon unstable; per-mode report:\n")
        sys.stderr.write(_stability_csv(verdict))
        raise StabilityError("unstable configuration")
    return verdict


def _analysis_pipeline(cfg: ScenarioConfig):
    L = laplacian(cfg.graph)
    spec = spectrum(L)
    _require_stable(spec, cfg.params)
    pv = pair_variances(spec, cfg.params)
    risks = pair_risks(pv.sigma, cfg.params.d, cfg.params.epsilon, cfg.params.c)
    bnds = evar_bounds(spec, cfg.params)
    return L, spec, pv, risks, bnds


def run_analyze(cfg: ScenarioConfig) -> tuple[str, dict]:
    """Full pipeline; returns (CSV text, JSON report document)."""
    _, spec, pv, risks, bnds = _analysis_pipeline(cfg)
    buf = io.StringIO()
    buf.write(CSV_VERSION_LINE + "\n")
    buf.write("pair_index,sigma,kappa_eps,var,cvar,evar,evar_branch\n")
    for r in risks:
        buf.write(",".join([str(r.pair_index), _fmt(r.sigma), _fmt(r.evar.kappa),
                            str(r.var), str(r.cvar), str(r.evar), r.evar.branch]) + "\n")
    report = {
        "params": _params_echo(cfg.params),
        "spectrum": {"eigenvalues": spec.eigenvalues.tolist(),
                     "lambda2": spec.lambda2, "lambda_max": spec.lambda_max},
        "pairs": [
            {"pair_index": r.pair_index, "sigma": r.sigma,
             "kappa_eps": r.evar.kappa,
             "var": str(r.var), "cvar": str(r.cvar), "evar": str(r.evar),
             "evar_branch": r.evar.branch}
            for r in risks
        ],
        "bounds": {"e_min": str(bnds.e_min), "e_max": str(bnds.e_max),
                   "kappa2": bnds.kappa2, "kappan": bnds.kappan,
                   "precondition_ok": bnds.precondition_ok},
    }
    return buf.getvalue(), report


def run_sweep_epsilon(cfg: ScenarioConfig) -> tuple[str, list[str]]:
    """EVaR table over the epsilon sweep; rows sorted by epsilon descending.

    Returns (CSV text, warnings)."""
    if not cfg.epsilon_sweep:
        raise ConfigError("epsilon_sweep missing or empty")
    warnings = []
    eps_list = []
    for e in cfg.epsilon_sweep:
        if e in eps_list:
            warnings.append(f"duplicate epsilon {e} removed from sweep")
        else:
            eps_list.append(e)
    eps_list.sort(reverse=True)
    L = laplacian(cfg.graph)
    spec = spectrum(L)
    _require_stable(spec, cfg.params)
    pv = pair_variances(spec, cfg.params)
    buf = io.StringIO()
    buf.write(CSV_VERSION_LINE + "\n")
    buf.write("epsilon,pair_index,evar,evar_branch\n")
    for e in eps_list:
        risks = pair_risks(pv.sigma, cfg.params.d, e, cfg.params.c)
        for r in risks:
            buf.write(",".join([_fmt(e), str(r.pair_index), str(r.evar),
                                r.evar.branch]) + "\n")
    return buf.getvalue(), warnings


def run_bounds(cfg: ScenarioConfig) -> dict:
    L = laplacian(cfg.graph)
    spec = spectrum(L)
    _require_stable(spec, cfg.params)
    b = evar_bounds(spec, cfg.params)
    return {"lambda2": b.lambda2, "lambdan": b.lambdan,
            "kappa2": b.kappa2, "kappan": b.kappan,
            "e_max": str(b.e_max), "e_min": str(b.e_min),
            "precondition_ok": b.precondition_ok}


def run_simulate(cfg: ScenarioConfig) -> tuple[dict, "object"]:
    if cfg.sim is None:
        raise ConfigError("sim block missing from config")
    res = simulate(cfg.graph, cfg.params, cfg.sim)
    summary = {
        "backend": _kernels.BACKEND,
        "n_samples": res.n_samples,
        "dt": res.dt,
        "stride": res.stride,
        "empirical_mean": res.empirical_mean.tolist(),
        "empirical_var": res.empirical_var.tolist(),
        "ess_mean": res.ess_mean.tolist(),
        "ess_var": res.ess_var.tolist(),
        "velocity_spread": res.velocity_spread,
    }
    return summary, res


def run_validate(cfg: ScenarioConfig, rtol: float = 0.05,
                 _variance_override=None) -> dict:
    """Simulator-vs-theory validation report.

    Compares empirical per-pair variances against the analytic values
    (relative error vs ``rtol``), empirical means against 3 standard errors,
    empirical tails against Chernoff bounds, and the empirical risk ordering.
    ``_variance_override`` is a test hook replacing the analytic sigma_sq.
    """
    if cfg.sim is None:
        raise ConfigError("sim block missing from config")
    L = laplacian(cfg.graph)
    spec = spectrum(L)
    verdict = platoon_stable(spec, cfg.params.tau, cfg.params.beta)
    if not verdict.stable:
        try:
            simulate(cfg.graph, cfg.params, cfg.sim)
            status = "no blow-up within horizon"
        except DivergenceError as exc:
            status = f"diverged at t={exc.time:.6g}"
        return {"stable": False, "divergence": status, "checks": []}
    pv = pair_variances(spec, cfg.params)
    sigma_sq = np.asarray(_variance_override if _variance_override is not None
                          else pv.sigma_sq, dtype=float)
    res = simulate(cfg.graph, cfg.params, cfg.sim)
    checks = []
    rel = np.abs(res.empirical_var - sigma_sq) / sigma_sq
    for j in range(res.n_pairs):
        checks.append({"check": f"variance_pair_{j + 1}",
                       "relative_error": float(rel[j]),
                       "pass": bool(rel[j] <= rtol)})
    se = np.sqrt(sigma_sq / np.maximum(res.ess_mean, 1.0))
    mean_dev = np.abs(res.empirical_mean - cfg.params.d)
    for j in range(res.n_pairs):
        checks.append({"check": f"mean_pair_{j + 1}",
                       "deviation": float(mean_dev[j]),
                       "limit": float(3.0 * se[j]),
                       "pass": bool(mean_dev[j] <= 3.0 * se[j])})
    for delta in (0.0, 0.5, 1.0):
        p_hat, bound = empirical_tail_check(res, delta, cfg.params)
        n_eff = res.ess_mean
        slack = 3.0 * np.sqrt(np.maximum(bound * (1 - bound), 1e-12) / n_eff)
        ok = bool(np.all(p_hat <= bound + slack))
        checks.append({"check": f"chernoff_tail_delta_{delta}",
                       "max_p_hat": float(p_hat.max()),
                       "max_bound": float(bound.max()),
                       "pass": ok})
    risks = pair_risks(np.sqrt(res.empirical_var), cfg.params.d,
                       cfg.params.epsilon, cfg.params.c)
    order_ok = all(r.var.value <= r.cvar.value + 1e-12
                   and r.cvar.value <= r.evar.value + 1e-12 for r in risks)
    checks.append({"check": "risk_ordering_var_cvar_evar", "pass": bool(order_ok)})
    return {"stable": True,
            "all_pass": all(c["pass"] for c in checks),
            "ess_var_min": float(res.ess_var.min()),
            "checks": checks}


def _dump_spectrum_doc(cfg: ScenarioConfig) -> dict:
    L = laplacian(cfg.graph)
    spec = spectrum(L)
    return {"laplacian": L.tolist(),
            "eigenvalues": spec.eigenvalues.tolist(),
            "eigenvectors": spec.eigenvectors.tolist()}


def _variances_csv(cfg: ScenarioConfig) -> str:
    L = laplacian(cfg.graph)
    spec = spectrum(L)
    _require_stable(spec, cfg.params)
    pv = pair_variances(spec, cfg.params)
    buf = io.StringIO()
    buf.write(CSV_VERSION_LINE + "\n")
    buf.write("pair_index,sigma_sq,sigma\n")
    for j, (s2, s) in enumerate(zip(pv.sigma_sq, pv.sigma), start=1):
        buf.write(f"{j},{_fmt(s2)},{_fmt(s)}\n")
    return buf.getvalue()


def _apply_overrides(cfg: ScenarioConfig, args) -> ScenarioConfig:
    params = cfg.params
    if args.epsilon is not None:
        params = dataclasses.replace(params, epsilon=args.epsilon)
    if args.tau is not None:
        params = dataclasses.replace(params, tau=args.tau)
    sim = cfg.sim
    if args.seed is not None:
        base = sim if sim is not None else SimConfig(dt=0.001, t_sample=200.0,
                                                     n_traj=32, seed=0)
        sim = dataclasses.replace(base, seed=args.seed)
    out_path = args.output if args.output is not None else cfg.output_path
    out_format = args.format if args.format is not None else cfg.output_format
    return dataclasses.replace(cfg, params=params, sim=sim,
                               output_path=out_path, output_format=out_format)


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="platoonrisk",
        description="Collision-risk analysis of delayed stochastic vehicle platoons.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="JSON scenario file")
        p.add_argument("--epsilon", type=float, help="override confidence level")
        p.add_argument("--tau", type=float, help="override communication delay")
        p.add_argument("--seed", type=int, help="override simulation seed")
        p.add_argument("--output", help="output file (default: stdout or config value)")
        p.add_argument("--format", choices=["csv", "json"], help="output format")

    p = sub.add_parser("analyze", help="full risk pipeline (CSV or JSON)")
    common(p)
    p.add_argument("--dump-spectrum", metavar="PATH",
                   help="also write Laplacian + spectrum as JSON")
    p.add_argument("--dump-variances", metavar="PATH",
                   help="also write per-pair variances as CSV")

    common(sub.add_parser("stability", help="per-mode stability table (CSV)"))
    common(sub.add_parser("bounds", help="spectral EVaR bounds (JSON)"))
    common(sub.add_parser("sweep-epsilon", help="EVaR vs epsilon table (CSV)"))

    p = sub.add_parser("simulate", help="Monte Carlo SDDE run (summary JSON)")
    common(p)
    p.add_argument("--dt", type=float, help="override time step")
    p.add_argument("--burn", type=float, help="override burn-in horizon")
    p.add_argument("--horizon", type=float, help="override sampling horizon")
    p.add_argument("--traj", type=int, help="override trajectory count")
    p.add_argument("--stride", type=int, help="override sample stride (steps)")
    p.add_argument("--threads", type=int, help="worker threads over trajectory blocks")
    p.add_argument("--samples-csv", metavar="PATH",
                   help="also write raw samples (pair_index, sample)")

    p = sub.add_parser("validate", help="simulator-vs-theory validation (JSON)")
    common(p)
    p.add_argument("--rtol", type=float, default=0.05,
                   help="relative tolerance for variance checks")
    return ap


def _sim_overrides(cfg: ScenarioConfig, args) -> ScenarioConfig:
    sim = cfg.sim if cfg.sim is not None else SimConfig(**{
        "dt": 0.001, "t_sample": 200.0, "n_traj": 32, "seed": 0})
    updates = {}
    if args.dt is not None:
        updates["dt"] = args.dt
    if args.burn is not None:
        updates["t_burn"] = args.burn
    if args.horizon is not None:
        updates["t_sample"] = args.horizon
    if args.traj is not None:
        updates["n_traj"] = args.traj
    if args.stride is not None:
        updates["sample_stride"] = args.stride
    if args.threads is not None:
        updates["n_threads"] = args.threads
    if updates:
        sim = dataclasses.replace(sim, **updates)
    return dataclasses.replace(cfg, sim=sim)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_scenario(args.config)
        cfg = _apply_overrides(cfg, args)
        if args.command == "analyze":
            csv_text, report = run_analyze(cfg)
            if cfg.output_format == "json":
                _emit(_json_text(report), cfg.output_path)
            else:
                _emit(csv_text, cfg.output_path)
            if args.dump_spectrum:
                _write_atomic(args.dump_spectrum, _json_text(_dump_spectrum_doc(cfg)))
            if args.dump_variances:
                _write_atomic(args.dump_variances, _variances_csv(cfg))
        elif args.command == "stability":
            L = laplacian(cfg.graph)
            verdict = platoon_stable(spectrum(L), cfg.params.tau, cfg.params.beta)
            _emit(_stability_csv(verdict), cfg.output_path)
        elif args.command == "bounds":
            _emit(_json_text(run_bounds(cfg)), cfg.output_path)
        elif args.command == "sweep-epsilon":
            text, warnings = run_sweep_epsilon(cfg)
            for w in warnings:
                sys.stderr.write(f"warning: {w}\n")
            _emit(text, cfg.output_path)
        elif args.command == "simulate":
            cfg = _sim_overrides(cfg, args)
            summary, res = run_simulate(cfg)
            _emit(_json_text(summary), cfg.output_path)
            if args.samples_csv:
                buf = io.StringIO()
                buf.write(CSV_VERSION_LINE + "\n")
                buf.write("pair_index,sample\n")
                pooled = res.pooled
                for j in range(pooled.shape[1]):
                    for x in pooled[:, j]:
                        buf.write(f"{j + 1},{_fmt(x)}\n")
                _write_atomic(args.samples_csv, buf.getvalue())
        elif args.command == "validate":
            report = run_validate(cfg, rtol=args.rtol)
            _emit(_json_text(report), cfg.output_path)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except StabilityError as exc:
        sys.stderr.write(f"stability error: {exc}\n")
        return EXIT_UNSTABLE
    except (NearInstabilityError, QuadratureError, DivergenceError, DomainError) as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    except PlatoonRiskError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
