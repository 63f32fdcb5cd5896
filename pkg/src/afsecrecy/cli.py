"""Batch front end.

Exit codes: 0 success (or skipped checks), 1 a verified property failed,
2 usage or input error.

Sweep specs are ``<axis>=<spec>`` where ``<spec>`` is either a
comma-separated list of values or ``start,stop,points,log`` /
``start,stop,points,lin``.  Log ranges are generated by repeated
multiplication with a fixed ratio, endpoints pinned exactly.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from . import netfile
from .gaps import AXES, Kind, gaps, sweep, to_csv
from .network import NetworkError, ScalingAssignment
from .oracle import GridSpec
from .rates import evaluate
from .scaling import solve
from .verify import Status, all_passed, run_checks

log = logging.getLogger("afsecrecy")

COMMANDS = ("solve", "rate", "gaps", "sweep", "verify")


class UsageError(Exception):
    pass


def range_values(start: float, stop: float, points: int, scale: str) -> list[float]:
    if points < 1:
        raise UsageError("a range needs at least one point")
    if points == 1:
        return [start]
    if scale == "log":
        if start <= 0 or stop <= 0:
            raise UsageError("log ranges need positive endpoints")
        ratio = math.exp(math.log(stop / start) / (points - 1))
        vals = [start]
        for _ in range(points - 2):
            vals.append(vals[-1] * ratio)
        return vals + [stop]
    if scale == "lin":
        step = (stop - start) / (points - 1)
        return [start + i * step for i in range(points - 1)] + [stop]
    raise UsageError(f"unknown range scale {scale!r}")


def parse_sweep(text: str) -> tuple[str, list[float]]:
    axis, sep, spec = text.partition("=")
    axis = axis.strip()
    if not sep or axis not in AXES:
        raise UsageError(f"--sweep must be <axis>=<spec> with axis in {AXES}, got {text!r}")
    parts = [p.strip() for p in spec.split(",") if p.strip()]
    try:
        if len(parts) == 4 and parts[3] in ("log", "lin"):
            return axis, range_values(float(parts[0]), float(parts[1]), int(parts[2]), parts[3])
        return axis, [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"cannot parse sweep values {spec!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="af-secrecy",
        description="Secure amplify-and-forward rates and relay-simplification gaps in layered networks.",
    )
    p.add_argument("--net", required=True, help="network description file")
    p.add_argument("--cmd", required=True, choices=COMMANDS)
    p.add_argument("--k", type=int, help="relays used per layer (solve/rate: default N)")
    p.add_argument("--beta", help="per-layer symmetric betas for 'rate', comma-separated")
    p.add_argument("--kind", choices=[k.value for k in Kind], help="gap bound kind (default by P_s/sigma2)")
    p.add_argument("--sweep", help="<axis>=<values> or <axis>=start,stop,points,log")
    p.add_argument("--grid-steps", type=int, default=64)
    p.add_argument("--refine", type=int, default=3)
    p.add_argument("--symmetric-only", action="store_true", help="skip the per-node symmetry search in verify")
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _print_solution(net, m):
    sol = solve(net, m)
    res = evaluate(net.with_relays(m), sol.assignment())
    print(f"network: L={net.L} N={net.N} using m={m} relays per layer")
    for l, b in enumerate(sol.beta_per_layer, 1):
        print(f"  layer {l}: beta = {b:.9g}  beta^2 = {b * b:.9g}")
    print(f"  last-layer case: {sol.last_layer_case}")
    glb = "" if sol.beta_L_glb is None else f"{sol.beta_L_glb ** 2:.9g}"
    print(f"  beta_L_max^2 = {sol.beta_L_max ** 2:.9g}  beta_L_glb^2 = {glb}")
    print(f"  SNR_t = {res.snr_t:.9g}  SNR_e = {res.snr_e:.9g}  rate = {res.rate_bits:.9g} bits/use")
    betas = ",".join(repr(b) for b in sol.beta_per_layer)
    print(
        f"RESULT m={m} case={sol.last_layer_case} betas={betas} snr_t={res.snr_t!r} "
        f"snr_e={res.snr_e!r} rate_bits={res.rate_bits!r}"
    )


def _print_rate(net, m, beta_text):
    if beta_text is None:
        raise UsageError("--cmd rate needs --beta")
    try:
        betas = [float(b) for b in beta_text.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse --beta {beta_text!r}") from None
    if len(betas) != net.L:
        raise UsageError(f"--beta needs {net.L} values, got {len(betas)}")
    res = evaluate(net.with_relays(m), ScalingAssignment.symmetric(betas, m))
    print(f"  SNR_t = {res.snr_t:.9g}  SNR_e = {res.snr_e:.9g}  rate = {res.rate_bits:.9g} bits/use")
    print(f"RESULT m={m} snr_t={res.snr_t!r} snr_e={res.snr_e!r} rate_bits={res.rate_bits!r}")


def _write_reports(reports, out):
    text = to_csv(reports)
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc}") from None


def _gap_reports(net, args):
    if args.k is None:
        raise UsageError(f"--cmd {args.cmd} needs --k")
    if args.cmd == "sweep" and not args.sweep:
        raise UsageError("--cmd sweep needs --sweep")
    if not args.sweep:
        if not 1 <= args.k < net.N:
            raise UsageError(f"--k must satisfy 1 <= k < N = {net.N}")
        return [gaps(net, args.k, args.kind)]
    axis, values = parse_sweep(args.sweep)
    if axis != "N" and axis != "k" and not 1 <= args.k < net.N:
        raise UsageError(f"--k must satisfy 1 <= k < N = {net.N}")
    try:
        return sweep(net, axis, values, args.k, args.kind)
    except (ValueError, NetworkError) as exc:
        raise UsageError(str(exc)) from None


def _verify(net, args) -> int:
    m = net.N if args.k is None else args.k
    try:
        spec = GridSpec(args.grid_steps, args.refine, symmetric_only=args.symmetric_only)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    results = run_checks(net, m, spec)
    for r in results:
        print(r.line())
    if any(r.status is Status.SKIP for r in results):
        log.warning("some checks were skipped")
    ok = all_passed(results)
    print("VERIFY", "PASS" if ok else "FAIL")
    return 0 if ok else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        try:
            net = netfile.load(args.net)
        except OSError as exc:
            raise UsageError(f"cannot read {args.net}: {exc}") from None
        except netfile.NetFileError as exc:
            raise UsageError(f"invalid network file ({exc.key}): {exc}") from None
        if args.k is not None and not 1 <= args.k <= net.N and args.cmd in ("solve", "rate", "verify"):
            raise UsageError(f"--k must satisfy 1 <= k <= N = {net.N}")
        if args.cmd == "solve":
            _print_solution(net, args.k or net.N)
        elif args.cmd == "rate":
            _print_rate(net, args.k or net.N, args.beta)
        elif args.cmd in ("gaps", "sweep"):
            _write_reports(_gap_reports(net, args), args.out)
        else:
            return _verify(net, args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
