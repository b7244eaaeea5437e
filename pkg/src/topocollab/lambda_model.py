"""Linear prediction of the best mixing weight from collaborative accuracy.

Cases whose best lambda is a tied set rather than a single value get one
member of that set chosen by simulated annealing, maximizing the absolute
Pearson correlation between collaborative accuracy and lambda. A least
squares line is then fitted to the chosen pairs. Collaborative accuracy is
expressed in percent throughout this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats


@dataclass(frozen=True)
class LambdaObservation:
    """Collaborative accuracy (fraction) and the tied optimal lambdas of one case."""

    gamma_c: float
    tied_set: tuple[float, ...]
    lambda_star: float | None = None


@dataclass(frozen=True)
class RegressionFit:
    intercept: float
    slope: float
    pearson_r: float
    p_value: float
    chosen_lambdas: tuple[float, ...]
    gamma_c_percent: tuple[float, ...]
    seed: int
    trace: dict = field(default_factory=dict)

    @property
    def n_cases(self) -> int:
        return len(self.chosen_lambdas)

    def to_dict(self) -> dict:
        return {
            "a": self.intercept,
            "b": self.slope,
            "r": self.pearson_r,
            "p": self.p_value,
            "n_cases": self.n_cases,
            "seed": self.seed,
        }


def _abs_pearson(n, sx, sxx, sy, syy, sxy) -> float:
    vx = n * sxx - sx * sx
    vy = n * syy - sy * sy
    if vx <= 0 or vy <= 1e-300:
        return 0.0
    return abs(n * sxy - sx * sy) / math.sqrt(vx * vy)


def abs_pearson(x: Sequence[float], y: Sequence[float]) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return _abs_pearson(len(x), x.sum(), (x * x).sum(), y.sum(), (y * y).sum(), (x * y).sum())


def _middle(tied: Sequence[float]) -> int:
    return (len(tied) - 1) // 2


def anneal_assignment(
    x: Sequence[float],
    tied_sets: Sequence[Sequence[float]],
    seed: int = 0,
    epochs: int = 1000,
    t0: float = 1.0,
    cooling: float = 0.95,
    start: Sequence[int] | None = None,
) -> tuple[list[int], dict]:
    """Pick one index per tied set maximizing ``|r(x, lambda)|``.

    Each epoch makes ``len(x)`` proposals, each redrawing one case's lambda
    uniformly from its tied set. The best assignment seen is then polished by
    local search, so the result is never worse than ``start`` (middle
    elements by default).
    """
    rng = np.random.default_rng(seed)
    x = [float(v) for v in x]
    sets = [list(map(float, s)) for s in tied_sets]
    n = len(x)
    idx = list(start) if start is not None else [_middle(s) for s in sets]
    sx = math.fsum(x)
    sxx = math.fsum(v * v for v in x)
    lam = [sets[i][idx[i]] for i in range(n)]
    sy = math.fsum(lam)
    syy = math.fsum(v * v for v in lam)
    sxy = math.fsum(a * b for a, b in zip(x, lam))

    def objective(sy, syy, sxy):
        return _abs_pearson(n, sx, sxx, sy, syy, sxy)

    current = baseline = objective(sy, syy, sxy)
    best, best_idx = current, list(idx)
    free = [i for i in range(n) if len(sets[i]) > 1]
    temp = t0
    accepted = proposals = 0
    if free:
        for _ in range(epochs):
            for _ in range(n):
                i = free[int(rng.integers(len(free)))]
                j = int(rng.integers(len(sets[i])))
                old, new = sets[i][idx[i]], sets[i][j]
                nsy = sy - old + new
                nsyy = syy - old * old + new * new
                nsxy = sxy + x[i] * (new - old)
                cand = objective(nsy, nsyy, nsxy)
                proposals += 1
                delta = cand - current
                if delta >= 0 or rng.random() < math.exp(delta / temp):
                    idx[i], sy, syy, sxy, current = j, nsy, nsyy, nsxy, cand
                    accepted += 1
                    if current > best:
                        best, best_idx = current, list(idx)
            temp *= cooling

    best_idx, best = _polish(x, sets, best_idx)
    return best_idx, {
        "baseline_abs_r": baseline,
        "best_abs_r": best,
        "proposals": proposals,
        "accepted": accepted,
        "epochs": epochs if free else 0,
    }


# Smallest accepted |r| gain in local search; keeps rounding noise from cycling.
_MIN_GAIN = 1e-12


class _Sums:
    """Running sums for ``r(x, lambda)`` under single or paired case changes."""

    def __init__(self, x, vals, idx):
        self.x = np.asarray(x, dtype=float)
        self.vals = vals
        self.n = len(self.x)
        self.sx = float(self.x.sum())
        self.vx = self.n * float(self.x @ self.x) - self.sx * self.sx
        self.set(idx)

    def set(self, idx):
        self.idx = list(idx)
        self.lam = np.array([v[i] for v, i in zip(self.vals, self.idx)])
        self.sy = float(self.lam.sum())
        self.syy = float(self.lam @ self.lam)
        self.sxy = float(self.x @ self.lam)

    def r(self, sy, syy, sxy):
        vy = self.n * syy - sy * sy
        num = self.n * sxy - self.sx * sy
        with np.errstate(invalid="ignore", divide="ignore"):
            out = num / np.sqrt(self.vx * np.maximum(vy, 1e-300))
        return np.where(vy > 1e-300, out, 0.0)

    def current(self) -> float:
        return float(abs(self.r(self.sy, self.syy, self.sxy)))


def _coordinate_ascent(sums: _Sums, idx):
    """Change one case at a time while ``|r|`` improves."""
    sums.set(idx)
    best = sums.current()
    improved = True
    while improved:
        improved = False
        for i, v in enumerate(sums.vals):
            if len(v) == 1:
                continue
            old = sums.lam[i]
            r = np.abs(sums.r(sums.sy - old + v, sums.syy - old * old + v * v, sums.sxy + sums.x[i] * (v - old)))
            j = int(np.argmax(r))
            if r[j] > best + _MIN_GAIN:
                trial = list(sums.idx)
                trial[i] = j
                sums.set(trial)
                best = sums.current()
                improved = True
    return list(sums.idx), best


PAIR_BUDGET = 200_000


def _pair_ascent(sums: _Sums, idx, best):
    """Joint two-case moves, when the number of pair combinations is small."""
    sizes = [len(v) for v in sums.vals]
    if sum(a * b for i, a in enumerate(sizes) for b in sizes[i + 1:]) > PAIR_BUDGET:
        return idx, best
    sums.set(idx)
    x = sums.x
    improved = True
    while improved:
        improved = False
        for i in range(sums.n):
            for j in range(i + 1, sums.n):
                if sizes[i] == 1 and sizes[j] == 1:
                    continue
                a, b = sums.vals[i][:, None], sums.vals[j][None, :]
                li, lj = sums.lam[i], sums.lam[j]
                r = np.abs(sums.r(
                    sums.sy - li - lj + a + b,
                    sums.syy - li * li - lj * lj + a * a + b * b,
                    sums.sxy - x[i] * li - x[j] * lj + x[i] * a + x[j] * b,
                ))
                p, q = np.unravel_index(int(np.argmax(r)), r.shape)
                if r[p, q] > best + _MIN_GAIN:
                    trial = list(sums.idx)
                    trial[i], trial[j] = int(p), int(q)
                    sums.set(trial)
                    best = sums.current()
                    improved = True
    return list(sums.idx), best


def _affine_starts(x, vals, levels=9, spreads=(0.25, 0.5, 1.0, 2.0, 1e6)):
    """Assignments nearest to targets ``c + beta * (x - mean x)``.

    A maximal ``|r|`` makes lambda close to some affine function of ``x``, so
    these seed local searches in basins that single moves cannot reach
    (a flipped sign, or every case shifted to a different level).
    """
    x = np.asarray(x, dtype=float)
    centered = x - x.mean()
    pool = np.concatenate(vals)
    span = float(np.ptp(pool)) or 1.0
    xspan = float(np.ptp(x)) or 1.0
    starts = []
    for c in np.quantile(pool, np.linspace(0, 1, levels)):
        for spread in spreads:
            for sign in (1.0, -1.0):
                target = c + sign * spread * span / xspan * centered
                starts.append([int(np.argmin(np.abs(v - t))) for v, t in zip(vals, target)])
    return starts


def _polish(x, sets, idx):
    """Local search after the chain, restarted from affine target assignments."""
    vals = [np.asarray(s, dtype=float) for s in sets]
    sums = _Sums(x, vals, idx)
    best_idx, best = _coordinate_ascent(sums, idx)
    for start in _affine_starts(x, vals):
        cand, val = _coordinate_ascent(sums, start)
        if val > best + _MIN_GAIN:
            best_idx, best = cand, val
    best_idx, best = _pair_ascent(sums, best_idx, best)
    return best_idx, abs_pearson(x, [s[i] for s, i in zip(sets, best_idx)])


def _observation(obj) -> LambdaObservation:
    if isinstance(obj, LambdaObservation):
        return obj
    return LambdaObservation(float(obj.gamma_c), tuple(obj.tied_set), getattr(obj, "lambda_star", None))


def fit_lambda_model(
    sweeps: Sequence,
    seed: int = 0,
    epochs: int = 1000,
    t0: float = 1.0,
    cooling: float = 0.95,
) -> RegressionFit:
    """Fit ``lambda* = a + b * gamma_c`` with ``gamma_c`` in percent.

    ``sweeps`` holds sweep results or :class:`LambdaObservation` items; the
    tied set of each is the annealing search space.
    """
    obs = [_observation(s) for s in sweeps]
    if len(obs) < 3:
        raise ValueError("at least 3 cases are required")
    x = [100.0 * o.gamma_c for o in obs]
    if max(x) - min(x) <= 0:
        raise ValueError("degenerate regressor: all collaborative accuracies are identical")
    sets = []
    start = []
    for o in obs:
        tied = sorted(set(o.tied_set))
        if not tied:
            raise ValueError("empty tied set")
        sets.append(tied)
        start.append(tied.index(o.lambda_star) if o.lambda_star in tied else _middle(tied))
    idx, trace = anneal_assignment(x, sets, seed, epochs, t0, cooling, start)
    lam = [s[i] for s, i in zip(sets, idx)]
    if max(lam) - min(lam) <= 0:
        slope, intercept, r, p = 0.0, float(lam[0]), 0.0, 1.0
    else:
        res = stats.linregress(x, lam)
        slope, intercept, r, p = float(res.slope), float(res.intercept), float(res.rvalue), float(res.pvalue)
    return RegressionFit(intercept, slope, r, p, tuple(lam), tuple(x), seed, trace)


def predict_lambda(fit: RegressionFit, gamma_c_percent: float) -> float:
    """Predicted lambda for a collaborative accuracy in percent, clamped to [0, 1]."""
    return float(min(1.0, max(0.0, fit.intercept + fit.slope * gamma_c_percent)))
