"""Timing harness for Algorithm 2 on synthetic instances and the scaling-exponent fit."""
from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .interaction import run_algorithm2_full
from .patterns import build_pattern_index, compute_cost_tables
from .synthetic import gen_synthetic

COLUMNS = ("algorithm", "backend", "n", "C", "seed", "wall_seconds")
AGREE_TOL = 1e-9


@dataclass
class BenchRow:
    algorithm: str
    backend: str
    n: int
    C: float
    seed: int
    wall_seconds: float
    value: float = math.nan


@dataclass
class Fit:
    exponent: float
    intercept: float
    residual: float      # RMS of the log-log residuals
    points: int


@dataclass
class BenchReport:
    rows: list[BenchRow]
    fit_range: tuple[int, int]
    fits: dict = field(default_factory=dict)            # backend -> Fit
    disagreements: list = field(default_factory=list)   # (n, C, seed, values)

    def csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self.rows:
            w.writerow([r.algorithm, r.backend, r.n, r.C, r.seed, f"{r.wall_seconds:.6f}"])
        return buf.getvalue()

    def summary(self) -> str:
        lo, hi = self.fit_range
        lines = []
        for backend, fit in sorted(self.fits.items()):
            lines.append(f"{backend}: T ~ n^{fit.exponent:.3f} over n in [{lo}, {hi}] "
                         f"({fit.points} runs, log-log RMS residual {fit.residual:.3f})")
        backends = {r.backend for r in self.rows}
        if len(backends) > 1:
            state = "agree" if not self.disagreements else \
                f"DISAGREE on {len(self.disagreements)} configurations"
            lines.append(f"backends {', '.join(sorted(backends))} {state}")
        return "\n".join(lines)


def fit_exponent(ns, times, fit_range=(100, 350)) -> Fit:
    """Least squares of log T against log n, using only n inside ``fit_range``."""
    lo, hi = fit_range
    pts = [(n, t) for n, t in zip(ns, times) if lo <= n <= hi and t > 0]
    if len(pts) < 2 or len({n for n, _ in pts}) < 2:
        raise ValueError("need at least two distinct n inside the fit range")
    x = np.log([n for n, _ in pts])
    y = np.log([t for _, t in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return Fit(float(slope), float(intercept), float(np.sqrt(np.mean(resid ** 2))), len(pts))


def time_solve(n: int, C: float, seed: int, backend: str) -> BenchRow:
    """Solver wall time only; instance generation and index construction are excluded."""
    inst = gen_synthetic(n, C, seed)
    index = build_pattern_index(inst.weights)
    tables = compute_cost_tables(index)
    t0 = time.perf_counter()
    run = run_algorithm2_full(index, tables, inst.grammar, backend,
                              keep_levels=False, argmin=False)
    dt = time.perf_counter() - t0
    return BenchRow("interaction", backend, n, C, seed, dt, run.value)


def warm_up(backends):
    for b in backends:
        time_solve(8, 1.0, 0, b)


def run_bench(ns, Cs, seeds, backends=("useful_edge",), fit_range=(100, 350),
              progress=None) -> BenchReport:
    warm_up(backends)
    rows = []
    report = BenchReport(rows, tuple(fit_range))
    for n in ns:
        for C in Cs:
            for seed in seeds:
                vals = {}
                for b in backends:
                    row = time_solve(n, C, seed, b)
                    rows.append(row)
                    vals[b] = row.value
                    if progress:
                        progress(row)
                ref = next(iter(vals.values()))
                if any(abs(v - ref) > AGREE_TOL * (1 + abs(ref)) for v in vals.values()):
                    report.disagreements.append((n, C, seed, vals))
    for b in backends:
        sel = [r for r in rows if r.backend == b]
        try:
            report.fits[b] = fit_exponent([r.n for r in sel], [r.wall_seconds for r in sel],
                                          fit_range)
        except ValueError:
            pass
    return report
