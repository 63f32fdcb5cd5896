"""Property checks of a scaling solver against the brute-force oracle."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

from .network import EcgalNetwork
from .oracle import (
    BudgetExceeded,
    GridSpec,
    curvature_sign,
    grid_search,
    interior_backoff_gains,
    raw_rate_along,
    stationarity_residual,
    spread_in_steps,
)
from .rates import evaluate
from .scaling import Case, ScalingSolution, solve

STATIONARITY_TOL = 1e-6
BACKOFF_EPS = 1e-3
# one grid step, with room for rounding in the grid coordinates
SPREAD_LIMIT = 1.0 + 1e-9


class Status(str, enum.Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    SKIP = "SKIP"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: Status
    residual: float | None = None
    detail: str = ""

    def line(self) -> str:
        res = "" if self.residual is None else f" residual={self.residual:.3e}"
        det = f" ({self.detail})" if self.detail else ""
        return f"{self.status} {self.name}{res}{det}"


def _ok(flag: bool) -> Status:
    return Status.PASS if flag else Status.FAIL


def run_checks(
    net: EcgalNetwork,
    m: int | None = None,
    spec: GridSpec = GridSpec(),
    solver: Callable[[EcgalNetwork, int], ScalingSolution] = solve,
) -> list[CheckResult]:
    m = net.N if m is None else m
    sub = net.with_relays(m)
    sol = solver(net, m)
    closed = evaluate(sub, sol.assignment()).rate_bits
    out = []

    sym = GridSpec(spec.steps_per_axis, spec.refine_rounds, symmetric_only=True)
    try:
        g = grid_search(net, m, sym)
        short = g.rate.rate_bits - closed
        out.append(CheckResult("grid_agreement", _ok(short <= g.eps_grid), short, f"eps_grid={g.eps_grid:.3e}"))
    except BudgetExceeded as exc:
        out.append(CheckResult("grid_agreement", Status.SKIP, detail=str(exc)))

    if sol.last_layer_case is Case.GLB:
        st = stationarity_residual(net, sol)
        out.append(CheckResult("stationarity", _ok(st.value <= STATIONARITY_TOL and not st.one_sided), st.value))
    else:
        out.append(CheckResult("stationarity", Status.SKIP, detail=f"case {sol.last_layer_case}"))

    if net.h_t != net.h_e and sol.beta_L_glb is not None:
        betas = list(sol.beta_per_layer[:-1]) + [sol.beta_L_glb]
        sign = curvature_sign(raw_rate_along(net, m, betas, len(betas)), sol.beta_L_glb)
        want = -1 if net.h_t > net.h_e else 1
        out.append(CheckResult("second_derivative", _ok(sign == want), float(sign), f"expected {want:+d}"))
    else:
        out.append(CheckResult("second_derivative", Status.SKIP, detail="h_t == h_e"))

    if net.h_t > net.h_e:
        want = min(sol.beta_L_max, sol.beta_L_glb)
        got = sol.beta_per_layer[-1]
    else:
        want, got = 0.0, sol.beta_per_layer[-1]
    out.append(CheckResult("min_composition", _ok(got == want), abs(got - want)))

    if net.L >= 2 and net.h_t > net.h_e:
        gains = interior_backoff_gains(net, sol, BACKOFF_EPS)
        out.append(CheckResult("boundary_optimality", _ok(min(gains) > 0.0), min(gains)))
    else:
        out.append(CheckResult("boundary_optimality", Status.SKIP, detail="no interior layer" if net.L < 2 else "h_t <= h_e"))

    if spec.symmetric_only:
        out.append(CheckResult("symmetric_optimum", Status.SKIP, detail="symmetric-only search requested"))
    else:
        try:
            g = grid_search(net, m, spec)
            steps = spread_in_steps(g)
            out.append(CheckResult("symmetric_optimum", _ok(steps <= SPREAD_LIMIT), steps, "spread in grid steps"))
        except BudgetExceeded as exc:
            out.append(CheckResult("symmetric_optimum", Status.SKIP, detail=str(exc)))
    return out


def all_passed(results: list[CheckResult]) -> bool:
    return not any(r.status is Status.FAIL for r in results)

