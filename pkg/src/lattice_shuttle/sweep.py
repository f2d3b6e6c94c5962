"""Parameter sweeps, headline numbers and the verification suite.

Rows are computed independently (optionally in a process pool) and always
written in grid order: channel, then tau, then T.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .config import RunConfig
from .constants import HBAR
from .errors import InsufficientSignalError, SingularityError
from .noise import OU, Channel, NoiseSpec, White, load_correlation_csv
from .sensitivity import (
    amplitude_crossing_root,
    find_amplitude_crossing,
    find_g2k_minimum,
    sensitivity,
    white_closed_forms,
)
from .trajectory import design_polynomial
from .verify import estimate_sensitivity_mc, lambda_scaling_check

__all__ = [
    "CSV_HEADER",
    "SweepResult",
    "run_sweep",
    "compute_row",
    "replay_row",
    "write_outputs",
    "report_extrema",
    "format_extrema",
    "run_verify",
    "worker_count",
]

CSV_HEADER = (
    "channel", "tau_over_T0", "T_over_T0", "G1_over_G0", "G2_over_G0", "G_over_G0",
    "mc_G_over_G0", "mc_stderr_over_G0",
)
WORKERS_ENV = "SHUTTLE_WORKERS"


def worker_count(cfg: RunConfig):
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return cfg.workers or 1


def _noise_model(cfg, tau_T0):
    if cfg.correlation_csv is not None:
        return load_correlation_csv(cfg.correlation_csv)
    if tau_T0 == 0:
        return White(cfg.D)
    return OU(cfg.D, tau_T0 * cfg.params.period)


def _tau_values(cfg):
    return (None,) if cfg.correlation_csv is not None else cfg.taus


def compute_row(cfg: RunConfig, channel, tau_T0, T_T0):
    """One sweep point as a dict of raw values (``None`` for absent MC)."""
    p = cfg.params
    channel = Channel(channel)
    spec = NoiseSpec(channel, _noise_model(cfg, tau_T0))
    traj = design_polynomial(T_T0 * p.period, cfg.distance)
    res = sensitivity(p, traj, spec, cfg.n, rtol=cfg.quad_rtol,
                      white_tau_threshold=cfg.white_tau_threshold)
    g0 = res.g0
    row = {
        "channel": channel.value,
        "tau_over_T0": tau_T0,
        "T_over_T0": T_T0,
        "G1_over_G0": res.g1 / g0 if g0 else math.nan,
        "G2_over_G0": res.g2 / g0 if g0 else math.nan,
        "G_over_G0": res.total / g0 if g0 else math.nan,
        "quad_error_over_G0": res.error / g0 if g0 else math.nan,
        "mc_G_over_G0": None,
        "mc_stderr_over_G0": None,
    }
    if cfg.mc_paths and isinstance(spec.model, OU):
        mc = estimate_sensitivity_mc(traj, p, spec, channel, cfg.n, cfg.mc_paths, cfg.seed,
                                     cfg.points_per_T0)
        row["mc_G_over_G0"] = mc.mean / g0
        row["mc_stderr_over_G0"] = mc.stderr / g0
    return row


def _compute_packed(args):
    cfg_dict, channel, tau, T = args
    return compute_row(RunConfig.from_dict(cfg_dict), channel, tau, T)


class SweepResult:
    """Rows plus the run record that reproduces them."""

    def __init__(self, cfg, rows, flags):
        self.cfg = cfg
        self.rows = rows
        self.flags = flags

    def csv_text(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in self.rows:
            writer.writerow([_fmt(row[key]) for key in CSV_HEADER])
        return buf.getvalue()

    def record(self):
        p = self.cfg.params
        return {
            "package": "lattice_shuttle",
            "version": __version__,
            "config": self.cfg.to_dict(),
            "config_text": self.cfg.to_text(),
            "derived": {
                "omega0": p.omega0,
                "T0": p.period,
                "recoil_energy": p.recoil_energy,
                "hbar_omega0_over_ER": p.lamb_dicke_ratio,
                "G0": p.g0(self.cfg.D),
            },
            "tolerances": {
                "quad_rtol": self.cfg.quad_rtol,
                "white_tau_threshold_T0": self.cfg.white_tau_threshold,
                "nsigma_flag": self.cfg.nsigma_flag,
            },
            "seed": self.cfg.seed,
            "mc_paths": self.cfg.mc_paths,
            "columns": list(CSV_HEADER) + ["quad_error_over_G0"],
            "rows": self.rows,
            "flags": self.flags,
        }


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return repr(float(value))


def run_sweep(cfg: RunConfig, workers=None) -> SweepResult:
    """Sensitivities over every (channel, tau, T) of ``cfg``."""
    tasks = [(c, tau, T) for c in cfg.channels for tau in _tau_values(cfg) for T in cfg.T_grid]
    workers = worker_count(cfg) if workers is None else workers
    if workers > 1 and len(tasks) > 1:
        cfg_dict = cfg.to_dict()
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_compute_packed, [(cfg_dict, *t) for t in tasks]))
    else:
        rows = [compute_row(cfg, *t) for t in tasks]
    flags = []
    for i, row in enumerate(rows):
        if row["mc_G_over_G0"] is None:
            continue
        dev = abs(row["mc_G_over_G0"] - row["G_over_G0"])
        se = row["mc_stderr_over_G0"]
        if se > 0 and dev > cfg.nsigma_flag * se:
            flags.append({"row": i, "kind": "mc_disagreement", "nsigma": dev / se})
    return SweepResult(cfg, rows, flags)


def replay_row(record, index):
    """Recompute row ``index`` of a run record from its stored inputs."""
    cfg = RunConfig.from_dict(record["config"])
    row = record["rows"][index]
    return compute_row(cfg, row["channel"], row["tau_over_T0"], row["T_over_T0"])


def _write(path, text):
    path = Path(path)
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True)
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def write_outputs(result: SweepResult, csv_path, json_path):
    _write(csv_path, result.csv_text())
    _write(json_path, json.dumps(result.record(), indent=2, allow_nan=True) + "\n")


def report_extrema(cfg: RunConfig) -> dict:
    """White-noise headline numbers for ``cfg``'s lattice, distance and ``n``."""
    p = cfg.params
    d, n = cfg.distance, cfg.n
    ld = p.lamb_dicke_ratio
    linear_ratio = 181.0 / 924.0 * p.mass * p.omega0 * d**2 / HBAR
    # large-T slopes, from the closed forms
    big = 1e6 * p.period
    k = white_closed_forms(p, big, d, n, Channel.ACCORDION, 1.0)
    q = white_closed_forms(p, big, d, n, Channel.POSITION, 1.0)
    a = white_closed_forms(p, big, d, n, Channel.AMPLITUDE, 1.0)
    crossing = find_amplitude_crossing(p, d, n)
    return {
        "omega0_over_2pi_Hz": p.omega0 / (2 * math.pi),
        "T0_s": p.period,
        "hbar_omega0_over_ER": ld,
        "n": n,
        "distance_m": d,
        "kd_over_pi": p.wavenumber * d / math.pi,
        "min_shuttle_time_over_T0": (6 * p.mass * d**2 / (p.omega0**2 * p.depth)) ** 0.25 / p.period,
        "G2K_min_T_over_T0": find_g2k_minimum(p) / p.period,
        "amplitude_crossing_T_over_T0": crossing / p.period,
        "amplitude_crossing_root_T_over_T0": amplitude_crossing_root(p, d, n) / p.period,
        "G2K_linear_over_G1K": linear_ratio / (2 * n + 1),
        "G2K_linear_over_G1K_in_ld": linear_ratio / (2 * n + 1) / ld,
        "G2K_over_G2Q_slope": (181.0 / 462.0) * (p.wavenumber * d) ** 2,
        "G2K_over_G2Q_large_T": k.g2 / q.g2,
        "G2Q_over_G1A": q.g2 / a.g1,
        "G2Q_over_G1A_expected": ld / (2 * n + 1),
    }


def format_extrema(summary: dict) -> str:
    s = summary
    lines = [
        f"trap frequency          omega0/2pi = {s['omega0_over_2pi_Hz'] / 1e3:.3f} kHz",
        f"Lamb-Dicke ratio        hbar omega0/E_R = {s['hbar_omega0_over_ER']:.4f}",
        f"minimal shuttle time    T/T0 = {s['min_shuttle_time_over_T0']:.4f}",
        f"G2K minimum             T/T0 = {s['G2K_min_T_over_T0']:.6f}",
        f"amplitude crossing      T*/T0 = {s['amplitude_crossing_T_over_T0']:.6f}"
        f"  (root search {s['amplitude_crossing_root_T_over_T0']:.6f}, n = {s['n']})",
        "ratios (white noise, T >> T0):",
        f"  G2K(linear)/G1K = {s['G2K_linear_over_G1K']:.4f}"
        f" = {s['G2K_linear_over_G1K_in_ld']:.4f} hbar omega0/E_R",
        f"  G2K/G2Q         = {s['G2K_over_G2Q_slope']:.4f}",
        f"  G2Q/G1A         = {s['G2Q_over_G1A']:.4f}"
        f"  (hbar omega0/[E_R(2n+1)] = {s['G2Q_over_G1A_expected']:.4f})",
    ]
    return "\n".join(lines)


def run_verify(cfg: RunConfig, log=print) -> dict:
    """Monte-Carlo and lambda-scaling checks for every channel and OU tau.

    Returns a record with a ``flags`` list; any flag means a failed check.
    """
    if cfg.seed is None:
        raise ValueError("verification needs a seed")
    p = cfg.params
    taus = [t for t in cfg.taus if t > 0] if cfg.correlation_csv is None else []
    checks, flags = [], []
    if not taus:
        log("no OU correlation time > 0 in the config; nothing to verify")
    for channel in cfg.channels:
        for tau in taus:
            spec = NoiseSpec(channel, OU(cfg.D, tau * p.period))
            for T_T0 in cfg.verify_T:
                traj = design_polynomial(T_T0 * p.period, cfg.distance)
                quad = sensitivity(p, traj, spec, cfg.n, rtol=cfg.quad_rtol,
                                   white_tau_threshold=cfg.white_tau_threshold)
                mc = estimate_sensitivity_mc(traj, p, spec, channel, cfg.n, cfg.verify_paths,
                                             cfg.seed, cfg.points_per_T0)
                nsig = abs(mc.mean - quad.total) / mc.stderr if mc.stderr > 0 else 0.0
                entry = {
                    "channel": channel.value, "tau_over_T0": tau, "T_over_T0": T_T0,
                    "quad_G_over_G0": quad.total / quad.g0,
                    "mc_G_over_G0": mc.mean / quad.g0,
                    "mc_stderr_over_G0": mc.stderr / quad.g0,
                    "mc_nsigma": nsig,
                }
                if nsig > cfg.verify_nsigma:
                    flags.append({"check": "mc_vs_quadrature", **entry})
                try:
                    sc = lambda_scaling_check(traj, p, spec, channel, cfg.n, cfg.lambdas,
                                              cfg.nonlinear_paths, cfg.seed, cfg.points_per_T0)
                    coef_nsig = abs(sc.coefficient - sc.mc.mean) / sc.mc.stderr
                    entry.update(
                        exponent=sc.exponent,
                        lambda2_coefficient_over_G0=sc.coefficient / quad.g0,
                        lambda2_mc_over_G0=sc.mc.mean / quad.g0,
                        lambda2_nsigma=coef_nsig,
                    )
                    if abs(sc.exponent - 2.0) > cfg.exponent_tol:
                        flags.append({"check": "lambda_exponent", **entry})
                    if coef_nsig > cfg.verify_nsigma:
                        flags.append({"check": "lambda2_coefficient", **entry})
                except (InsufficientSignalError, SingularityError) as exc:
                    entry["scaling_error"] = str(exc)
                    flags.append({"check": "lambda_scaling", **entry})
                checks.append(entry)
                log(
                    f"{channel.value:9s} tau={tau:g} T0  T={T_T0:g} T0  quad={entry['quad_G_over_G0']:.5g}"
                    f"  mc={entry['mc_G_over_G0']:.5g}+-{entry['mc_stderr_over_G0']:.2g}"
                    f" ({nsig:.2f} sigma)  exponent={entry.get('exponent', math.nan):.4f}"
                )
    return {
        "package": "lattice_shuttle",
        "version": __version__,
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "checks": checks,
        "flags": flags,
    }
