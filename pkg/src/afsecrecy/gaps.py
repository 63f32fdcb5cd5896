"""Rate loss from using k of N relays per layer, and its analytical upper bounds.

The additive gap ``R^N - R^k`` is bounded for large source power and the
multiplicative gap ``R^N / R^k`` for small source power.  Which bound
applies depends on the network depth (diamond, two layers, deeper) and on
whether the last layer of the optimum sits at its power cap (``MAX``) or
at the interior stationary point (``GLB``).  Logs are base 2 throughout.
"""

from __future__ import annotations

import csv
import enum
import io
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .network import EcgalNetwork, NetworkError
from .scaling import Case, solve, optimal_rate

log = logging.getLogger(__name__)

REGIME_FACTOR = 1e-2
CASE_I_MUL_RATIO_BAND = (1.0, 4.0)


class Kind(str, enum.Enum):
    ADDITIVE = "additive"
    MULTIPLICATIVE = "multiplicative"

    def __str__(self):
        return self.value


class BoundId(str, enum.Enum):
    DIAMOND_I_ADD = "DIAMOND_I_ADD"
    DIAMOND_I_MUL = "DIAMOND_I_MUL"
    DIAMOND_II_ADD = "DIAMOND_II_ADD"
    DIAMOND_II_MUL = "DIAMOND_II_MUL"
    L2_I_ADD = "L2_I_ADD"
    L2_I_MUL = "L2_I_MUL"
    L2_II_ADD = "L2_II_ADD"
    L2_II_MUL = "L2_II_MUL"
    ASYMP_MAX_ADD = "ASYMP_MAX_ADD"
    ASYMP_MAX_MUL = "ASYMP_MAX_MUL"
    ASYMP_GLB_ADD = "ASYMP_GLB_ADD"
    ASYMP_GLB_MUL = "ASYMP_GLB_MUL"

    def __str__(self):
        return self.value


def _log2(x):
    return math.log2(x)


def _case(case) -> Case:
    case = Case(case)
    if case is Case.ZERO:
        raise ValueError("no gap bound exists for the ZERO case")
    return case


def _check_nk(net: EcgalNetwork, k: int):
    if int(k) != k or not 1 <= k <= net.N:
        raise NetworkError(f"k={k!r} outside 1..{net.N}")


# --- diamond ----------------------------------------------------------------


def bound_diamond(net: EcgalNetwork, k: int, case, kind) -> float:
    if net.L != 1:
        raise NetworkError(f"diamond bounds need L = 1, got L = {net.L}")
    _check_nk(net, k)
    case, kind = _case(case), Kind(kind)
    N, s2, P, ht, he = net.N, net.sigma2, net.P, net.h_t, net.h_e
    if case is Case.MAX:
        if kind is Kind.ADDITIVE:
            return 0.5 * _log2(1.0 + s2 / (P * he**2) * (1 / k**2 - 1 / N**2))
        return (N / k) * (1.0 + s2 / P * (1 / (k * he**2) - 1 / (N * ht**2)))
    if kind is Kind.ADDITIVE:
        return 0.25 * _log2(N / k)
    return max(N / k, ht / he)


# --- two layers ---------------------------------------------------------------


def bound_two_layer(net: EcgalNetwork, k: int, case, kind) -> float:
    if net.L != 2:
        raise NetworkError(f"two-layer bounds need L = 2, got L = {net.L}")
    _check_nk(net, k)
    case, kind = _case(case), Kind(kind)
    N, s2, P = net.N, net.sigma2, net.P
    h1, h2, he = net.h_mid[0], net.h_t, net.h_e
    if case is Case.MAX and kind is Kind.ADDITIVE:
        first = 1.0 + (h2**2 / h1**2) * (1 / k - 1 / N) + s2 / (P * h1**2) * (1 / k**2 - 1 / N**2)
        second = (
            1.0
            + s2 / (P * he**2) * (1 / k**2 - 1 / N**2)
            + s2 / (P * h1**2) * (1 / k**3 - 1 / N**3)
            + s2**2 / (P * h1**2 * P * he**2) * (1 / k**4 - 1 / N**4)
        )
        return 0.5 * _log2(first) + 0.5 * _log2(second)
    if case is Case.MAX:
        bracket = (
            1.0
            + s2 / (P * h1**2) * (1 / k**2 - 1 / N**2)
            + s2 / P * (1 / (k**2 * he**2) - 1 / (N**2 * h2**2))
            + s2 / (P * h1**2) * s2 / P * (1 / (k**3 * he**2) - 1 / (N**3 * h2**2))
        )
        return (N / k) ** 2 * bracket
    if kind is Kind.ADDITIVE:
        snr1 = P * h1**2 / s2
        # inner roots mix k^-6 with k^-3 terms; kept exactly as derived
        root_k = math.sqrt(1 / k**6 + snr1 / k**3)
        root_N = math.sqrt(1 / N**6 + snr1 / N**3)
        inner = (1 / k**3 - 1 / N**3) + (h2 / he) * (root_k - root_N)
        return 0.75 * _log2(N / k) + 0.5 * _log2(1.0 + s2 / (P * h1**2) * inner)
    return max((N / k) * (1.0 + s2 / (P * h1**2) * (1 / k**2 - 1 / N**2)), h2 / he)


# --- any depth, asymptotic -----------------------------------------------------


def asymptotic_constants(net: EcgalNetwork) -> tuple[float, float]:
    """``a = h_L^2 sum_{i=1}^{L-1} h_i^-2`` and ``b`` (same sum from i = 2)."""
    hL2 = net.h_t**2
    inv = [1.0 / h**2 for h in net.h_mid]
    return hL2 * math.fsum(inv), hL2 * math.fsum(inv[1:])


def bound_asymptotic(net: EcgalNetwork, k: int, case, kind) -> float:
    if net.L < 2:
        raise NetworkError(f"asymptotic layered bounds need L >= 2, got L = {net.L}")
    _check_nk(net, k)
    case, kind = _case(case), Kind(kind)
    N, s2, P = net.N, net.sigma2, net.P
    h1, hL, he = net.h_mid[0], net.h_t, net.h_e
    a, b = asymptotic_constants(net)
    if case is Case.MAX and kind is Kind.ADDITIVE:
        return 0.5 * _log2(1.0 + a * (1 / k - 1 / N)) + 0.5 * _log2(
            1.0 + a * s2 / (P * hL**2) * (1 / k**3 - 1 / N**3) + s2 / (P * he**2) * (1 / k**2 - 1 / N**2)
        )
    if case is Case.MAX:
        return (N / k) ** 2 * (
            1.0
            + s2 / (P * h1**2) * (1 / k**2 - 1 / N**2)
            + s2 / P * (1 / (k**2 * he**2) - 1 / (N**2 * hL**2))
            + s2 / (P * hL**2) * (1 / k**3 - 1 / N**3) * b
        )
    if kind is Kind.ADDITIVE:
        return 0.75 * _log2(N / k) + 0.5 * _log2(
            1.0
            + math.sqrt(s2 * a / (P * he**2)) * (k**-1.5 - N**-1.5)
            + s2 * a / (P * hL**2) * (1 / k**3 - 1 / N**3)
        )
    return max(
        (N / k) * (1.0 + s2 / (P * h1**2) * (1 / k**2 - 1 / N**2) + s2 * b / P * (1 / k**3 - 1 / N**3)),
        hL / he,
    )


_FAMILY = {
    1: (bound_diamond, "DIAMOND", {Case.MAX: "I", Case.GLB: "II"}),
    2: (bound_two_layer, "L2", {Case.MAX: "I", Case.GLB: "II"}),
}
_ASYMP = (bound_asymptotic, "ASYMP", {Case.MAX: "MAX", Case.GLB: "GLB"})


def bound_for(net: EcgalNetwork, k: int, case, kind) -> tuple[BoundId, float]:
    """Dispatch on depth: diamond (L=1), two-layer example (L=2), asymptotic (L>=3)."""
    case, kind = _case(case), Kind(kind)
    fn, prefix, tags = _FAMILY.get(net.L, _ASYMP)
    suffix = "ADD" if kind is Kind.ADDITIVE else "MUL"
    return BoundId(f"{prefix}_{tags[case]}_{suffix}"), fn(net, k, case, kind)


# --- reports ------------------------------------------------------------------


@dataclass(frozen=True)
class GapReport:
    net: EcgalNetwork
    k: int
    kind: Kind
    case_N: Case
    case_k: Case
    rate_N: float
    rate_k: float
    additive_gap: float
    multiplicative_gap: float | None
    bound_id: BoundId | None
    bound_value: float | None
    slack: float | None
    regime_ok: bool
    alt_bound: tuple[BoundId, float] | None = None

    @property
    def L(self):
        return self.net.L

    @property
    def N(self):
        return self.net.N

    @property
    def P_s(self):
        return self.net.P_s

    @property
    def mul_gap_missing(self) -> bool:
        """True when R^k = 0 < R^N, where the ratio is undefined."""
        return self.multiplicative_gap is None and self.rate_N > 0.0

    def holds(self, add_tol: float = 0.0, mul_factor: float = 1.0) -> bool | None:
        """Whether the gap is within the bound (None when no bound applies)."""
        if self.bound_value is None:
            return None
        if self.kind is Kind.ADDITIVE:
            return self.additive_gap <= self.bound_value + add_tol
        if self.multiplicative_gap is None:
            return None
        return self.multiplicative_gap <= self.bound_value * mul_factor


def default_kind(net: EcgalNetwork) -> Kind:
    return Kind.ADDITIVE if net.P_s >= net.sigma2 else Kind.MULTIPLICATIVE


def in_regime(net: EcgalNetwork, kind) -> bool:
    """N small against P_s/sigma^2 (additive) or sigma^2/P_s (multiplicative)."""
    if Kind(kind) is Kind.ADDITIVE:
        return net.N <= REGIME_FACTOR * net.P_s / net.sigma2
    return net.N <= REGIME_FACTOR * net.sigma2 / net.P_s


def gaps(net: EcgalNetwork, k: int, kind=None) -> GapReport:
    if int(k) != k or not 1 <= k < net.N:
        raise NetworkError(f"need 1 <= k < N = {net.N}, got k = {k!r}")
    k = int(k)
    kind = default_kind(net) if kind is None else Kind(kind)
    sol_N, sol_k = solve(net, net.N), solve(net, k)
    rate_N = optimal_rate(net, net.N).rate_bits
    rate_k = optimal_rate(net, k).rate_bits
    add = rate_N - rate_k
    mul = rate_N / rate_k if rate_k > 0.0 else None
    case_N, case_k = sol_N.last_layer_case, sol_k.last_layer_case

    bound_id = bound_value = slack = alt = None
    regime_ok = False
    if Case.ZERO not in (case_N, case_k):
        bound_id, bound_value = bound_for(net, k, case_N, kind)
        if case_k is not case_N:
            alt = bound_for(net, k, case_k, kind)
        regime_ok = case_N is case_k and in_regime(net, kind)
        if bound_id is BoundId.DIAMOND_I_MUL:
            lo, hi = CASE_I_MUL_RATIO_BAND
            if not lo < net.h_t / net.h_e <= hi:
                regime_ok = False
        if kind is Kind.ADDITIVE:
            slack = bound_value - add
        elif mul is not None:
            slack = bound_value / mul
    report = GapReport(net, k, kind, case_N, case_k, rate_N, rate_k, add, mul, bound_id, bound_value, slack, regime_ok, alt)
    if regime_ok and report.holds() is False:
        log.info("bound %s exceeded: N=%d k=%d P_s=%r slack=%r", bound_id, net.N, k, net.P_s, slack)
    return report


AXES = ("P_s", "k", "N", "L")


def _net_for_depth(template: EcgalNetwork, L: int) -> EcgalNetwork:
    if L == 1:
        return template.replace(L=1, h_mid=())
    if not template.h_mid:
        raise ValueError("an L sweep needs a template with at least one interlayer gain")
    mid = list(template.h_mid[: L - 1])
    mid += [template.h_mid[-1]] * (L - 1 - len(mid))
    return template.replace(L=L, h_mid=tuple(mid))


def sweep(template: EcgalNetwork, axis: str, values: Sequence, k: int | None = None, kind=None) -> list[GapReport]:
    """One report per value of ``axis``, in input order.

    For the ``L`` axis the template's interlayer gains are truncated, or
    extended by repeating the last one.
    """
    if axis not in AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; expected one of {AXES}")
    values = list(values)
    if any(not math.isfinite(v) for v in values):
        raise ValueError("sweep values must be finite")
    if values != sorted(values):
        raise ValueError("sweep values must be sorted")
    if axis != "k" and k is None:
        raise ValueError(f"a {axis} sweep needs k")
    out = []
    for v in values:
        if axis == "P_s":
            out.append(gaps(template.replace(P_s=v), k, kind))
        elif axis == "k":
            out.append(gaps(template, int(v), kind))
        elif axis == "N":
            if v <= k:
                raise ValueError(f"N sweep value {v} must exceed k = {k}")
            out.append(gaps(template.replace(N=int(v)), k, kind))
        else:
            out.append(gaps(_net_for_depth(template, int(v)), k, kind))
    return out


CSV_HEADER = (
    "L,N,k,P_s,P,sigma2,h_s,h_mid,h_t,h_e,case_N,case_k,rate_N,rate_k,"
    "add_gap,mul_gap,bound_id,bound_value,slack,regime_ok"
).split(",")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def report_row(r: GapReport) -> list[str]:
    n = r.net
    return [
        _fmt(v)
        for v in (
            n.L, n.N, r.k, n.P_s, n.P, n.sigma2, n.h_s,
            ";".join(repr(h) for h in n.h_mid) or None,
            n.h_t, n.h_e, r.case_N, r.case_k, r.rate_N, r.rate_k,
            r.additive_gap, r.multiplicative_gap, r.bound_id, r.bound_value, r.slack, r.regime_ok,
        )
    ]


def write_csv(reports: Iterable[GapReport], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in reports:
        w.writerow(report_row(r))


def to_csv(reports: Iterable[GapReport]) -> str:
    buf = io.StringIO()
    write_csv(reports, buf)
    return buf.getvalue()
