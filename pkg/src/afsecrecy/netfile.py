"""Plain-text network description files.

One ``key = value`` pair per line; ``#`` starts a comment.  Required keys::

    L, N, h_s, h_mid, h_t, h_e, P_s, P, sigma2

``h_mid`` is a comma-separated list (empty for ``L = 1``).  Reals are
written as shortest round-trip decimals; hex floats (``0x1.8p+1``) are
accepted on input, so every double survives a dump/load cycle unchanged.
"""

from __future__ import annotations

from pathlib import Path

from .network import EcgalNetwork, NetworkError

KEYS = ("L", "N", "h_s", "h_mid", "h_t", "h_e", "P_s", "P", "sigma2")


class NetFileError(ValueError):
    def __init__(self, key: str | None, message: str):
        super().__init__(message)
        self.key = key


def _real(key: str, text: str) -> float:
    text = text.strip()
    try:
        if text.lower().lstrip("+-").startswith("0x"):
            return float.fromhex(text)
        return float(text)
    except ValueError:
        raise NetFileError(key, f"{key}: cannot parse {text!r} as a real number") from None


def _int(key: str, text: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise NetFileError(key, f"{key}: cannot parse {text.strip()!r} as an integer") from None


def parse(text: str) -> EcgalNetwork:
    fields: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise NetFileError(key or None, f"line {lineno}: expected 'key = value'")
        if key not in KEYS:
            raise NetFileError(key, f"line {lineno}: unknown key {key!r}")
        if key in fields:
            raise NetFileError(key, f"line {lineno}: duplicate key {key!r}")
        fields[key] = value
    for key in KEYS:
        if key not in fields:
            raise NetFileError(key, f"missing required key {key!r}")

    mid_text = fields["h_mid"].strip()
    h_mid = tuple(_real("h_mid", t) for t in mid_text.split(",")) if mid_text else ()
    kwargs = {"L": _int("L", fields["L"]), "N": _int("N", fields["N"]), "h_mid": h_mid}
    for key in ("h_s", "h_t", "h_e", "P_s", "P", "sigma2"):
        kwargs[key] = _real(key, fields[key])
    try:
        return EcgalNetwork(**kwargs)
    except NetworkError as exc:
        bad = next((k for k in KEYS if str(exc).startswith(k)), None)
        raise NetFileError(bad, str(exc)) from None


def dump(net: EcgalNetwork) -> str:
    lines = [f"L = {net.L}", f"N = {net.N}", f"h_s = {net.h_s!r}", "h_mid = " + ", ".join(repr(h) for h in net.h_mid)]
    lines += [f"{k} = {getattr(net, k)!r}" for k in ("h_t", "h_e", "P_s", "P", "sigma2")]
    return "\n".join(lines) + "\n"


def load(path) -> EcgalNetwork:
    return parse(Path(path).read_text())


def save(net: EcgalNetwork, path) -> None:
    Path(path).write_text(dump(net))

