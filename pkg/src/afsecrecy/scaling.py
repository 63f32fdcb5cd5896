"""Closed-form optimal relay scaling for symmetric layered networks.

Interior layers always transmit at full power (``beta_{l,max}``).  The last
layer sits at ``min(beta_{L,max}, beta_{L,glb})`` when the destination link
is stronger than the eavesdropper link, and is switched off otherwise.
``beta_{L,glb}`` is the interior stationary point of the secrecy rate in the
last-layer scaling factor.

Every solver takes the number of relays ``m`` used per layer, so the same
code produces the all-relay (``m = N``) and simplified (``m = k``) optima.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .network import EcgalNetwork, NetworkError, ScalingAssignment, layer_products, receive_power
from .rates import RateResult, evaluate


class Case(str, enum.Enum):
    MAX = "MAX"
    GLB = "GLB"
    ZERO = "ZERO"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ScalingSolution:
    m: int
    beta_per_layer: tuple[float, ...]
    last_layer_case: Case
    beta_L_max: float
    beta_L_glb: float | None

    def assignment(self) -> ScalingAssignment:
        return ScalingAssignment.symmetric(self.beta_per_layer, self.m)


def _check_m(net: EcgalNetwork, m: int) -> int:
    if int(m) != m or not 1 <= m <= net.N:
        raise NetworkError(f"relay count m={m!r} outside 1..{net.N}")
    return int(m)


def layered_beta_max(net: EcgalNetwork, m: int) -> list[float]:
    """Power-cap scaling factor of every layer, each computed with all
    upstream layers already at their own caps."""
    m = _check_m(net, m)
    betas: list[float] = []
    for l in range(1, net.L + 1):
        betas.append(math.sqrt(net.P / receive_power(net, betas, l, m)))
    return betas


def _glb_from_products(net: EcgalNetwork, m: int, A: float, B: float) -> float:
    # log-space: P_s/sigma2 can be extreme
    log_b2 = -(
        math.log(m)
        + math.log(net.h_t)
        + math.log(net.h_e)
        + math.log1p(m * B)
        + 0.5 * math.log1p((net.P_s / net.sigma2) * m * A / (1.0 + m * B))
    )
    return math.exp(0.5 * log_b2)


def layered_beta_L_glb(net: EcgalNetwork, m: int, interior: list[float] | None = None) -> float:
    """Stationary last-layer scaling factor (the beta, not its square).

    ``interior`` are the betas of layers 1..L-1; they default to the caps
    from :func:`layered_beta_max`.  For ``L = 1`` this reduces to the
    diamond expression (``A = h_s^2``, ``B = 0``).
    """
    m = _check_m(net, m)
    if net.L == 1:
        return _glb_from_products(net, m, net.h_s**2, 0.0)
    if interior is None:
        interior = layered_beta_max(net, m)[:-1]
    prods = layer_products(net, interior, 1, net.L - 1, m)
    return _glb_from_products(net, m, net.h_s**2 * prods.H2, math.fsum(prods.G2))


def _compose(net: EcgalNetwork, m: int, interior: list[float], beta_max: float, beta_glb: float) -> ScalingSolution:
    if net.h_t <= net.h_e:
        last, case = 0.0, Case.ZERO
    elif beta_max <= beta_glb:
        last, case = beta_max, Case.MAX
    else:
        last, case = beta_glb, Case.GLB
    return ScalingSolution(m, tuple(interior) + (last,), case, beta_max, beta_glb)


def diamond_beta_opt(net: EcgalNetwork, m: int) -> ScalingSolution:
    if net.L != 1:
        raise NetworkError(f"diamond solver needs L = 1, got L = {net.L}")
    m = _check_m(net, m)
    beta_max = math.sqrt(net.P / (net.P_s * net.h_s**2 + net.sigma2))
    return _compose(net, m, [], beta_max, layered_beta_L_glb(net, m))


def solve(net: EcgalNetwork, m: int) -> ScalingSolution:
    m = _check_m(net, m)
    caps = layered_beta_max(net, m)
    interior = caps[:-1]
    return _compose(net, m, interior, caps[-1], layered_beta_L_glb(net, m, interior))


def optimal_rate(net: EcgalNetwork, m: int) -> RateResult:
    """Optimal secure AF rate using ``m`` relays in every layer.

    All size-m relay subsets are equivalent by symmetry, so the m-per-layer
    network is evaluated directly.
    """
    sol = solve(net, m)
    return evaluate(net.with_relays(sol.m), sol.assignment())
