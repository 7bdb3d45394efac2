"""Aggregate statistics: mean/std and the interquartile mean with a bootstrap CI."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

DEFAULT_BOOTSTRAP = 2000


def iqm_weights(n: int) -> np.ndarray:
    """Weight of each sorted position in the middle half, fractional at the edges."""
    lo, hi = n / 4, 3 * n / 4
    idx = np.arange(n)
    return np.clip(np.minimum(idx + 1, hi) - np.maximum(idx, lo), 0, 1)


def iqm(scores: Sequence[float]) -> float:
    x = np.sort(np.asarray(scores, dtype=float))
    if x.size == 0:
        raise ValueError("IQM of an empty sample")
    w = iqm_weights(x.size)
    return float(x @ w / w.sum())


class IqmCi(NamedTuple):
    iqm: float
    ci_low: float
    ci_high: float
    fallback_mean: bool = False


def iqm_ci(scores: Sequence[float], n_bootstrap: int = DEFAULT_BOOTSTRAP, seed: int = 0) -> IqmCi:
    """IQM with a seeded percentile-bootstrap 95% interval.

    With fewer than four scores the plain mean is used instead and
    ``fallback_mean`` is set. The interval is widened if needed so that it
    always contains the point estimate.
    """
    x = np.asarray(scores, dtype=float)
    if x.size == 0:
        raise ValueError("no scores")
    if n_bootstrap < 1:
        raise ValueError("n_bootstrap must be >= 1")
    fallback = x.size < 4
    rng = np.random.default_rng(seed)
    samples = np.sort(x[rng.integers(0, x.size, size=(n_bootstrap, x.size))], axis=1)
    if fallback:
        point = float(x.mean())
        stats = samples.mean(axis=1)
    else:
        w = iqm_weights(x.size)
        point = iqm(x)
        stats = samples @ w / w.sum()
    low, high = np.percentile(stats, [2.5, 97.5])
    return IqmCi(point, min(float(low), point), max(float(high), point), fallback)


@dataclass(frozen=True)
class CellStats:
    n_players: int
    scaffold: str
    n: int
    mean: float
    std: float
    iqm: float
    ci_low: float
    ci_high: float
    aborted: int = 0
    fallback_mean: bool = False


@dataclass(frozen=True)
class AggregateReport:
    cells: tuple[CellStats, ...]
    n_bootstrap: int = DEFAULT_BOOTSTRAP
    notes: tuple[str, ...] = field(default=())

    @property
    def empty(self) -> bool:
        return not self.cells

    def table(self) -> str:
        header = f"{'players':>7}  {'scaffold':<22} {'n':>3}  {'mean±std':>12}  {'IQM [95% CI]':>22}"
        lines = [header, "-" * len(header)]
        for c in self.cells:
            mark = "*" if c.fallback_mean else ""
            abort = f"  ({c.aborted} aborted)" if c.aborted else ""
            lines.append(
                f"{c.n_players:>7}  {c.scaffold:<22} {c.n:>3}  {c.mean:>5.2f}±{c.std:<5.2f}  "
                f"{c.iqm:>6.2f}{mark} [{c.ci_low:.2f}, {c.ci_high:.2f}]{abort}"
            )
        lines.append("")
        lines.append(
            f"IQM uses fractional-weight trimming of the lowest and highest quarter; "
            f"CI from {self.n_bootstrap} seeded bootstrap resamples."
        )
        if any(c.fallback_mean for c in self.cells):
            lines.append("* fewer than 4 games: plain mean shown in place of the IQM.")
        if any(c.aborted for c in self.cells):
            lines.append("Aborted games are excluded from n and from every statistic.")
        lines.extend(self.notes)
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {"n_bootstrap": self.n_bootstrap, "cells": [c.__dict__ for c in self.cells]}


def report(games: Iterable, *, n_bootstrap: int = DEFAULT_BOOTSTRAP, seed: int = 0) -> AggregateReport:
    """Per-(player count, scaffold) statistics over completed GameRecords."""
    cells: dict[tuple[int, str], list] = {}
    aborted: dict[tuple[int, str], int] = {}
    for g in games:
        key = (g.config.n_players, g.scaffold.value)
        cells.setdefault(key, [])
        if g.aborted is None:
            cells[key].append(g.final_score)
        else:
            aborted[key] = aborted.get(key, 0) + 1
    out = []
    for key in sorted(cells):
        scores = cells[key]
        if not scores:
            continue
        x = np.asarray(scores, dtype=float)
        ci = iqm_ci(x, n_bootstrap, seed)
        out.append(CellStats(
            n_players=key[0],
            scaffold=key[1],
            n=len(scores),
            mean=float(x.mean()),
            std=float(x.std(ddof=1)) if x.size > 1 else 0.0,
            iqm=ci.iqm,
            ci_low=ci.ci_low,
            ci_high=ci.ci_high,
            aborted=aborted.get(key, 0),
            fallback_mean=ci.fallback_mean,
        ))
    return AggregateReport(tuple(out), n_bootstrap)
