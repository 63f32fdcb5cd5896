"""Symmetric layered (ECGAL) relay networks and their modified channel gains.

Every relay layer holds ``N`` relays, adjacent layers are fully connected and
all links between two adjacent layers share one gain.  Layers are indexed
``1..L`` in the public functions; the gain *leaving* layer ``l`` is
``h_mid[l-1]`` for ``l < L`` and ``h_t`` (or ``h_e``) for the last layer.

The product forms below collapse the equal-delay path sums; the brute-force
path enumeration in :func:`h_source_dest_pathsum` is kept as an independent
check on them.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

DEFAULT_PATH_CAP = 10**6


class NetworkError(ValueError):
    """Invalid network description or incompatible scaling assignment."""


class EnumerationCapExceeded(RuntimeError):
    """Raised when brute-force path enumeration would exceed its cap."""


def _positive_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise NetworkError(f"{name} must be finite and > 0, got {value!r}")
    return value


@dataclass(frozen=True)
class EcgalNetwork:
    """Immutable description of a symmetric layered relay network.

    Parameters
    ----------
    L : int
        Number of relay layers (``L = 1`` is the diamond network).
    N : int
        Relays per layer.
    h_s : float
        Gain from the source to every layer-1 relay.
    h_mid : sequence of float
        ``L - 1`` gains; ``h_mid[l]`` connects layer ``l+1`` to layer ``l+2``.
    h_t, h_e : float
        Gains from every last-layer relay to the destination and to the
        eavesdropper.
    P_s : float
        Source power.
    P : float
        Per-relay power cap.
    sigma2 : float
        Noise variance at every receiver.
    """

    L: int
    N: int
    h_s: float
    h_mid: tuple[float, ...]
    h_t: float
    h_e: float
    P_s: float
    P: float
    sigma2: float

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 1:
            raise NetworkError(f"L must be an integer >= 1, got {self.L!r}")
        if int(self.N) != self.N or self.N < 1:
            raise NetworkError(f"N must be an integer >= 1, got {self.N!r}")
        object.__setattr__(self, "L", int(self.L))
        object.__setattr__(self, "N", int(self.N))
        mid = tuple(_positive_finite(f"h_mid[{i}]", h) for i, h in enumerate(self.h_mid))
        if len(mid) != self.L - 1:
            raise NetworkError(f"h_mid must hold L-1 = {self.L - 1} gains, got {len(mid)}")
        object.__setattr__(self, "h_mid", mid)
        for name in ("h_s", "h_t", "h_e", "P_s", "P", "sigma2"):
            object.__setattr__(self, name, _positive_finite(name, getattr(self, name)))

    @classmethod
    def diamond(cls, N, h_s, h_t, h_e, P_s, P, sigma2):
        return cls(1, N, h_s, (), h_t, h_e, P_s, P, sigma2)

    def gain_out(self, layer: int, eavesdropper: bool = False) -> float:
        """Gain leaving ``layer`` (1-based); the last layer feeds t or e."""
        if not 1 <= layer <= self.L:
            raise NetworkError(f"layer {layer} out of range 1..{self.L}")
        if layer < self.L:
            return self.h_mid[layer - 1]
        return self.h_e if eavesdropper else self.h_t

    def gains_out(self, eavesdropper: bool = False) -> tuple[float, ...]:
        return self.h_mid + ((self.h_e if eavesdropper else self.h_t),)

    def with_relays(self, m: int) -> "EcgalNetwork":
        """The same network restricted to ``m`` relays per layer."""
        if not 1 <= m <= self.N:
            raise NetworkError(f"relay count m={m} outside 1..{self.N}")
        return replace(self, N=m)

    def replace(self, **changes) -> "EcgalNetwork":
        return replace(self, **changes)


@dataclass(frozen=True)
class ScalingAssignment:
    """Per-node amplification factors, ``betas[l-1, i]`` for relay i of layer l."""

    betas: np.ndarray = field(repr=False)

    def __post_init__(self):
        b = np.array(self.betas, dtype=float)
        if b.ndim != 2 or b.size == 0:
            raise NetworkError(f"betas must be a non-empty L x N matrix, got shape {b.shape}")
        if not np.all(np.isfinite(b)) or np.any(b < 0.0):
            raise NetworkError("betas must be finite and non-negative")
        b.setflags(write=False)
        object.__setattr__(self, "betas", b)

    @classmethod
    def symmetric(cls, per_layer: Sequence[float], n: int) -> "ScalingAssignment":
        """Every relay of layer l gets ``per_layer[l-1]``."""
        return cls(np.repeat(np.asarray(per_layer, dtype=float)[:, None], n, axis=1))

    @property
    def shape(self) -> tuple[int, int]:
        return self.betas.shape

    def __repr__(self):
        return f"ScalingAssignment({self.betas.tolist()!r})"

    def __eq__(self, other):
        if not isinstance(other, ScalingAssignment):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.betas, other.betas))

    def __hash__(self):
        return hash((self.shape, self.betas.tobytes()))


@dataclass(frozen=True)
class LayerGainProducts:
    """Signal product ``H2`` and per-layer noise products ``G2`` over layers i..j."""

    H2: float
    G2: tuple[float, ...]


def _check_shape(net: EcgalNetwork, s: ScalingAssignment) -> np.ndarray:
    if s.shape != (net.L, net.N):
        raise NetworkError(f"assignment shape {s.shape} does not match network (L={net.L}, N={net.N})")
    return s.betas


def h_source_dest(net: EcgalNetwork, s: ScalingAssignment, eavesdropper: bool = False) -> float:
    """Modified source-to-sink gain, summed over all equal-delay paths.

    With full bipartite links the path sum factorizes into
    ``h_s * prod_l (sum_i beta_{l,i}) * g_l``.
    """
    betas = _check_shape(net, s)
    out = net.h_s
    for layer_sum, g in zip(betas.sum(axis=1), net.gains_out(eavesdropper)):
        out *= layer_sum * g
    return float(out)


def h_source_dest_pathsum(
    net: EcgalNetwork,
    s: ScalingAssignment,
    eavesdropper: bool = False,
    cap: int = DEFAULT_PATH_CAP,
) -> float:
    """Same quantity as :func:`h_source_dest` by explicit path enumeration.

    Test-only; cost is ``N**L``.
    """
    betas = _check_shape(net, s)
    if net.N**net.L > cap:
        raise EnumerationCapExceeded(f"N**L = {net.N**net.L} paths exceeds cap {cap}")
    gains = net.gains_out(eavesdropper)
    total = []
    for path in itertools.product(range(net.N), repeat=net.L):
        term = net.h_s
        for layer, i in enumerate(path):
            term *= betas[layer, i] * gains[layer]
        total.append(term)
    return math.fsum(total)


def h_relay_dest(
    net: EcgalNetwork,
    s: ScalingAssignment,
    l: int,
    j: int,
    eavesdropper: bool = False,
) -> float:
    """Modified gain from the noise of relay ``j`` in layer ``l`` to the sink.

    Both indices are 1-based.  Equals
    ``beta_{l,j} g_l * prod_{m>l} (sum_i beta_{m,i}) g_m``.
    """
    betas = _check_shape(net, s)
    if not 1 <= l <= net.L:
        raise NetworkError(f"layer index {l} out of range 1..{net.L}")
    if not 1 <= j <= net.N:
        raise NetworkError(f"relay index {j} out of range 1..{net.N}")
    gains = net.gains_out(eavesdropper)
    out = betas[l - 1, j - 1] * gains[l - 1]
    for m in range(l, net.L):
        out *= betas[m].sum() * gains[m]
    return float(out)


def noise_gain_sum(net: EcgalNetwork, s: ScalingAssignment, eavesdropper: bool = False) -> float:
    """``sum_{l,j} h_{lj,t}^2`` (or the eavesdropper version) in O(L*N)."""
    betas = _check_shape(net, s)
    gains = net.gains_out(eavesdropper)
    # downstream[l] = prod_{m>l} (sum_i beta_{m,i} g_m)^2
    downstream = 1.0
    total = 0.0
    for l in range(net.L - 1, -1, -1):
        total += float(np.sum(betas[l] ** 2)) * gains[l] ** 2 * downstream
        downstream *= (betas[l].sum() * gains[l]) ** 2
    return total


def layer_products(
    net: EcgalNetwork,
    per_layer_beta: Sequence[float],
    i: int,
    j: int,
    m: int | None = None,
) -> LayerGainProducts:
    """H^2_{i,j} and G^2_{m,j} for a per-layer symmetric assignment.

    ``H2 = prod_{k=i..j} (m beta_k)^2 h_k^2`` and
    ``G2[q] = m beta_q^2 h_q^2 prod_{k=q+1..j} (m beta_k)^2 h_k^2``
    for ``q = i..j``; ``m`` defaults to ``net.N``.
    """
    m = net.N if m is None else m
    if not 1 <= i <= j <= net.L - 1:
        raise NetworkError(f"invalid layer range i={i}, j={j} for L={net.L}")
    if len(per_layer_beta) < j:
        raise NetworkError(f"need betas for layers 1..{j}, got {len(per_layer_beta)}")
    h = net.h_mid
    H2 = 1.0
    for k in range(i, j + 1):
        H2 *= (m * per_layer_beta[k - 1]) ** 2 * h[k - 1] ** 2
    G2 = []
    for q in range(i, j + 1):
        g = m * per_layer_beta[q - 1] ** 2 * h[q - 1] ** 2
        for k in range(q + 1, j + 1):
            g *= (m * per_layer_beta[k - 1]) ** 2 * h[k - 1] ** 2
        G2.append(g)
    return LayerGainProducts(H2, tuple(G2))


def receive_power(net: EcgalNetwork, per_layer_beta: Sequence[float], l: int, m: int | None = None) -> float:
    """Received signal-plus-noise power at any relay of layer ``l``."""
    if not 1 <= l <= net.L:
        raise NetworkError(f"layer index {l} out of range 1..{net.L}")
    if l == 1:
        return net.P_s * net.h_s**2 + net.sigma2
    prods = layer_products(net, per_layer_beta, 1, l - 1, m)
    return net.P_s * net.h_s**2 * prods.H2 + (math.fsum(prods.G2) + 1.0) * net.sigma2


def layer_caps(net: EcgalNetwork, s: ScalingAssignment) -> np.ndarray:
    """beta_{l,max} for each layer given the *actual* upstream assignment.

    All relays of a layer hear the same superposition, so the cap is shared
    within a layer.
    """
    betas = _check_shape(net, s)
    caps = np.empty(net.L)
    signal = net.h_s**2
    noise = 0.0
    for l in range(net.L):
        caps[l] = math.sqrt(net.P / (net.P_s * signal + (noise + 1.0) * net.sigma2))
        if l < net.L - 1:
            gain2 = (betas[l].sum() * net.h_mid[l]) ** 2
            signal *= gain2
            noise = noise * gain2 + float(np.sum(betas[l] ** 2)) * net.h_mid[l] ** 2
    return caps


def check_feasible(net: EcgalNetwork, s: ScalingAssignment, rtol: float = 1e-12) -> bool:
    """True iff every relay respects its power cap (with relative slack ``rtol``)."""
    caps = layer_caps(net, s)
    return bool(np.all(s.betas**2 <= (caps**2 * (1.0 + rtol))[:, None]))
