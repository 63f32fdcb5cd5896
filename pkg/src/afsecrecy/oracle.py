"""Brute-force and finite-difference checks for the closed-form solver.

The grid search works on *fractions* of each layer's power cap rather than
on raw betas: a layer's cap depends on what the upstream layers send, so
the feasible set is not a box in beta, but it is the unit cube in
fractions.  The rate is evaluated here by its own batched recurrence
(signal and noise powers propagated layer by layer), independent of the
path-sum machinery in :mod:`afsecrecy.rates`.

Within a layer the objective only depends on the multiset of betas, so the
per-node search visits each sorted tuple once; every per-node grid point is
a permutation of one of them with the same value.
"""

from __future__ import annotations

import itertools
import logging
import math
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .network import EcgalNetwork, NetworkError, ScalingAssignment, layer_caps
from .rates import RateResult, evaluate, log_ratio
from .scaling import ScalingSolution

log = logging.getLogger(__name__)

DEFAULT_EVAL_CAP = 10**8
EVAL_CAP_ENV = "AF_SECRECY_EVAL_CAP"
MAX_ASYMMETRIC_AXES = 9
_CHUNK = 1 << 17
_LN2 = math.log(2.0)


class BudgetExceeded(RuntimeError):
    """The requested search would exceed the evaluation budget or axis cap."""


def eval_cap() -> int:
    raw = os.environ.get(EVAL_CAP_ENV)
    if raw is None:
        return DEFAULT_EVAL_CAP
    try:
        return int(float(raw))
    except ValueError:
        raise ValueError(f"{EVAL_CAP_ENV} must be a number, got {raw!r}") from None


@dataclass(frozen=True)
class GridSpec:
    steps_per_axis: int = 64
    refine_rounds: int = 3
    symmetric_only: bool = True

    def __post_init__(self):
        if self.steps_per_axis < 8:
            raise ValueError("steps_per_axis must be >= 8")
        if self.refine_rounds < 0:
            raise ValueError("refine_rounds must be >= 0")


@dataclass(frozen=True)
class GridResult:
    assignment: ScalingAssignment
    rate: RateResult
    fractions: np.ndarray
    fraction_steps: tuple[float, ...]
    beta_steps: tuple[float, ...]
    eps_grid: float
    history: tuple[float, ...]
    evaluations: int


# --- batched rate recurrence -------------------------------------------------


def batch_log_ratio(net: EcgalNetwork, fractions: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Raw log-ratio for a batch of cap fractions.

    ``fractions`` has shape (B, L, m); returns ``(betas, raw)`` with betas
    of the same shape and raw of shape (B,).
    """
    B, L, _ = fractions.shape
    betas = np.empty_like(fractions)
    signal = np.full(B, net.h_s**2)
    noise = np.zeros(B)
    for l in range(L):
        cap = np.sqrt(net.P / (net.P_s * signal + (noise + 1.0) * net.sigma2))
        b = fractions[:, l, :] * cap[:, None]
        betas[:, l, :] = b
        s1 = b.sum(axis=1)
        s2 = (b * b).sum(axis=1)
        if l < L - 1:
            g2 = net.h_mid[l] ** 2
            signal = signal * s1 * s1 * g2
            noise = noise * s1 * s1 * g2 + s2 * g2
    snrs = []
    for g in (net.h_t, net.h_e):
        g2 = g * g
        amp = signal * s1 * s1 * g2
        n = noise * s1 * s1 * g2 + s2 * g2
        snrs.append(net.P_s / net.sigma2 * amp / (1.0 + n))
    snr_t, snr_e = snrs
    raw = 0.5 * np.log1p((snr_t - snr_e) / (1.0 + snr_e)) / _LN2
    return betas, raw


@lru_cache(maxsize=32)
def _multisets(steps: int, m: int) -> np.ndarray:
    combos = itertools.combinations_with_replacement(range(steps), m)
    flat = np.fromiter(itertools.chain.from_iterable(combos), dtype=np.int64)
    return flat.reshape(-1, m)


def _candidates(grid: np.ndarray, m: int, symmetric: bool) -> np.ndarray:
    if symmetric:
        return np.repeat(grid[:, None], m, axis=1)
    return grid[_multisets(len(grid), m)]


def _search_round(net, cands: list[np.ndarray]) -> tuple[float, np.ndarray]:
    sizes = [len(c) for c in cands]
    total = math.prod(sizes)
    best_val = -math.inf
    best = None
    for start in range(0, total, _CHUNK):
        flat = np.arange(start, min(start + _CHUNK, total))
        idx = np.unravel_index(flat, sizes)
        T = np.stack([c[i] for c, i in zip(cands, idx)], axis=1)
        _, raw = batch_log_ratio(net, T)
        vals = np.maximum(raw, 0.0)
        k = int(np.argmax(vals))
        # strict '>' keeps the earliest (lexicographically smallest) maximizer
        if vals[k] > best_val:
            best_val = float(vals[k])
            best = T[k].copy()
    return best_val, best


def _round_size(L: int, m: int, steps: int, symmetric: bool) -> int:
    per_layer = steps if symmetric else math.comb(steps + m - 1, m)
    return per_layer**L


def _eps_grid(net, T: np.ndarray, steps: Sequence[float], symmetric: bool) -> float:
    L, m = T.shape
    probes = []
    for l in range(L):
        nodes = [slice(None)] if symmetric else range(m)
        for node in nodes:
            for sign in (-1.0, 1.0):
                P = T.copy()
                P[l, node] = np.clip(P[l, node] + sign * steps[l], 0.0, 1.0)
                probes.append(P)
    _, raw = batch_log_ratio(net, np.stack([T] + probes))
    vals = np.maximum(raw, 0.0)
    return float(np.max(np.abs(vals[1:] - vals[0])))


def grid_search(net: EcgalNetwork, m: int, spec: GridSpec = GridSpec()) -> GridResult:
    """Deterministic zoom-in grid maximization of the clamped secrecy rate.

    Searches ``m`` relays per layer: per layer (``spec.symmetric_only``) or
    per node.  Each refine round re-grids every layer over
    ``[min - step, max + step]`` of the incumbent's fractions.
    """
    sub = net.with_relays(m)
    L, s = sub.L, spec.steps_per_axis
    symmetric = spec.symmetric_only
    if not symmetric and L * m > MAX_ASYMMETRIC_AXES:
        raise BudgetExceeded(f"per-node search over {L * m} axes exceeds cap {MAX_ASYMMETRIC_AXES}")
    per_round = _round_size(L, m, s, symmetric)
    needed = per_round * (spec.refine_rounds + 1)
    cap = eval_cap()
    if needed > cap:
        raise BudgetExceeded(f"grid search needs {needed} evaluations, budget is {cap}")

    grids = [np.linspace(0.0, 1.0, s) for _ in range(L)]
    steps = [1.0 / (s - 1)] * L
    best_val, best = -math.inf, None
    history = []
    for _ in range(spec.refine_rounds + 1):
        val, T = _search_round(sub, [_candidates(g, m, symmetric) for g in grids])
        if val > best_val:
            best_val, best = val, T
        history.append(best_val)
        new_grids, new_steps = [], []
        for l in range(L):
            lo = max(0.0, float(best[l].min()) - steps[l])
            hi = min(1.0, float(best[l].max()) + steps[l])
            new_grids.append(np.linspace(lo, hi, s))
            new_steps.append((hi - lo) / (s - 1))
        final_steps = steps
        grids, steps = new_grids, new_steps

    betas, _ = batch_log_ratio(sub, best[None])
    assignment = ScalingAssignment(betas[0])
    caps = layer_caps(sub, assignment)
    return GridResult(
        assignment=assignment,
        rate=evaluate(sub, assignment),
        fractions=best,
        fraction_steps=tuple(final_steps),
        beta_steps=tuple(float(st * c) for st, c in zip(final_steps, caps)),
        eps_grid=_eps_grid(sub, best, final_steps, symmetric),
        history=tuple(history),
        evaluations=needed,
    )


def within_layer_spread(s: ScalingAssignment) -> np.ndarray:
    return s.betas.max(axis=1) - s.betas.min(axis=1)


def spread_in_steps(g: GridResult) -> float:
    """Largest within-layer spread of the incumbent, in final grid steps.

    Measured on the cap fractions the grid actually searched, so one step
    reads as 1 up to the rounding of the grid coordinates.
    """
    spread = g.fractions.max(axis=1) - g.fractions.min(axis=1)
    return float(np.max(spread / np.asarray(g.fraction_steps)))


# --- finite differences -------------------------------------------------------


@dataclass(frozen=True)
class FiniteDifference:
    value: float
    one_sided: bool


def central_difference(
    f: Callable[[float], float],
    x: float,
    rel_step: float = 1e-6,
    lo: float = -math.inf,
    hi: float = math.inf,
    scale: float = 1.0,
) -> FiniteDifference:
    """First derivative by central differences, one-sided at a bound.

    The step is ``rel_step * |x|`` (``rel_step * scale`` at ``x = 0``).
    """
    h = rel_step * (abs(x) if x != 0.0 else scale)
    if x - h < lo:
        return FiniteDifference((f(x + h) - f(x)) / h, True)
    if x + h > hi:
        return FiniteDifference((f(x) - f(x - h)) / h, True)
    return FiniteDifference((f(x + h) - f(x - h)) / (2.0 * h), False)


def curvature_sign(f: Callable[[float], float], x: float, rel_step: float = 1e-4) -> int:
    """Sign of the numerical second derivative of ``f`` at ``x``."""
    h = rel_step * abs(x)
    if h == 0.0 or x - h == x:
        raise ValueError(f"second-difference step underflows at x={x!r}")
    f0 = f(x)
    d2 = (f(x + h) - 2.0 * f0 + f(x - h)) / (h * h)
    noise = 8.0 * np.finfo(float).eps * max(abs(f0), 1e-300) / (h * h)
    if abs(d2) <= noise:
        return 0
    return 1 if d2 > 0 else -1


def raw_rate_along(net: EcgalNetwork, m: int, beta_per_layer: Sequence[float], layer: int) -> Callable[[float], float]:
    """Unclamped log-ratio as a function of one layer's symmetric beta."""
    sub = net.with_relays(m)
    base = list(beta_per_layer)
    if len(base) != sub.L:
        raise NetworkError(f"need {sub.L} per-layer betas, got {len(base)}")
    if not 1 <= layer <= sub.L:
        raise NetworkError(f"layer {layer} out of range 1..{sub.L}")

    def f(x: float) -> float:
        b = list(base)
        b[layer - 1] = x
        r = evaluate(sub, ScalingAssignment.symmetric(b, m))
        return log_ratio(r.snr_t, r.snr_e)

    return f


def _layer_cap(net: EcgalNetwork, m: int, beta_per_layer: Sequence[float], layer: int) -> float:
    sub = net.with_relays(m)
    return float(layer_caps(sub, ScalingAssignment.symmetric(beta_per_layer, m))[layer - 1])


def finite_diff_gradient(
    net: EcgalNetwork, m: int, beta_per_layer: Sequence[float], layer: int, rel_step: float = 1e-6
) -> FiniteDifference:
    """d(raw log-ratio)/d(beta_layer); one-sided (and flagged) at 0 or the cap."""
    f = raw_rate_along(net, m, beta_per_layer, layer)
    cap = _layer_cap(net, m, beta_per_layer, layer)
    return central_difference(f, float(beta_per_layer[layer - 1]), rel_step, lo=0.0, hi=cap, scale=cap)


def second_derivative_sign(
    net: EcgalNetwork, m: int, beta_per_layer: Sequence[float], layer: int, rel_step: float = 1e-4
) -> int:
    f = raw_rate_along(net, m, beta_per_layer, layer)
    return curvature_sign(f, float(beta_per_layer[layer - 1]), rel_step)


def stationarity_residual(net: EcgalNetwork, sol: ScalingSolution, rel_step: float = 1e-6) -> FiniteDifference:
    """|d f / d beta_L| * beta_L / |f| at the solution's last-layer beta."""
    betas = sol.beta_per_layer
    L = len(betas)
    fd = finite_diff_gradient(net, sol.m, betas, L, rel_step)
    f = raw_rate_along(net, sol.m, betas, L)(betas[-1])
    scale = max(abs(f), 1e-300)
    return FiniteDifference(abs(fd.value) * betas[-1] / scale, fd.one_sided)


def interior_backoff_gains(net: EcgalNetwork, sol: ScalingSolution, eps: float = 1e-3) -> list[float]:
    """For each interior layer, rate(solution) - rate(layer backed off by eps).

    Positive entries mean full power on that layer beats a slightly lower
    scaling factor with every other layer held at the solution.
    """
    sub = net.with_relays(sol.m)
    base = list(sol.beta_per_layer)
    ref = evaluate(sub, sol.assignment()).rate_bits
    out = []
    for l in range(len(base) - 1):
        b = list(base)
        b[l] *= 1.0 - eps
        out.append(ref - evaluate(sub, ScalingAssignment.symmetric(b, sol.m)).rate_bits)
    return out
