"""Command-line front end.

Points, regions and measures are JSON, given inline (an argument starting
with ``{``) or as a path to a file. Every subcommand writes JSON with sorted
keys, so identical invocations produce byte-identical output.

Exit codes: 0 success, 1 identity-suite failures, 2 usage errors, 3 I/O or
schema errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

EXIT_OK = 0
EXIT_FAILURES = 1
EXIT_USAGE = 2
EXIT_IO = 3


class InputError(Exception):
    """Unreadable or malformed input; maps to exit code 3."""


@dataclass(frozen=True)
class CliConfig:
    """Parsed command line; ``dim`` is set when given explicitly (``lattice --dim``), else taken from the inputs."""

    subcommand: str
    dim: int | None = None
    seed: int = 0
    samples: int = 200_000
    out: str | None = None
    fmt: str = "json"
    params: dict = field(default_factory=dict)


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not v > 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be a positive finite number, got {text}")
    return v


def _dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated dimensions, got {text!r}")
    if not dims or any(d < 1 for d in dims):
        raise argparse.ArgumentTypeError("dimensions must be >= 1")
    return dims


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="siegel-bergman", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="subcommand", required=True)

    def common(p, samples=200_000):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--samples", type=_positive_int, default=samples)
        p.add_argument("--out", default=None, help="output path (default: stdout)")

    p = sub.add_parser("kernel", help="K(z,w), k_z(w) and ||K_z||_p")
    p.add_argument("--z", required=True, help="point JSON")
    p.add_argument("--w", required=True, help="point JSON")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("metric", help="Bergman distance between two points")
    p.add_argument("--from", dest="from_", required=True, help="point JSON")
    p.add_argument("--to", required=True, help="point JSON")
    p.add_argument("--out", default=None)

    p = sub.add_parser("lattice", help="r-lattice of a bounded region")
    p.add_argument("--region", required=True, help="region JSON")
    p.add_argument("--r", type=_positive_float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=_positive_int, default=None, help="needed unless the region is a ball")
    p.add_argument("--out", default=None)

    p = sub.add_parser("berezin", help="Berezin transform of a measure at a point")
    p.add_argument("--measure", required=True)
    p.add_argument("--z", required=True)
    common(p)

    p = sub.add_parser("averaging", help="averaging function mu(D(z,r))/|D(z,r)|")
    p.add_argument("--measure", required=True)
    p.add_argument("--z", required=True)
    p.add_argument("--r", type=_positive_float, required=True)
    common(p, samples=20_000)

    p = sub.add_parser("diagnose", help="Carleson / vanishing-Carleson diagnostics")
    p.add_argument("--measure", required=True)
    p.add_argument("--r", type=_positive_float, default=1.0)
    p.add_argument("--lattice-samples", type=_positive_int, default=4096)
    common(p)
    p.set_defaults(seed=7)
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json")
    fmt.add_argument("--csv", dest="fmt", action="store_const", const="csv", help="shell-trend table")

    p = sub.add_parser("verify", help="run the identity suite")
    p.add_argument("--dims", type=_dims, default=(1, 2))
    common(p, samples=1_000_000)
    return ap


def parse_args(argv=None) -> CliConfig:
    ns = vars(build_parser().parse_args(argv))
    cmd = ns.pop("subcommand")
    seed = ns.pop("seed", 0)
    samples = ns.pop("samples", 200_000)
    out = ns.pop("out", None)
    fmt = ns.pop("fmt", None) or "json"
    dim = ns.pop("dim", None)
    return CliConfig(cmd, dim, seed, samples, out, fmt, ns)


# ---------------------------------------------------------------------------


def _load_json(text: str):
    try:
        if text.lstrip().startswith(("{", "[")):
            return json.loads(text)
        return json.loads(Path(text).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read {text}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON in {text[:60]!r}: {exc}") from exc


def _point(text: str):
    from .geometry import CPoint

    obj = _load_json(text)
    try:
        return CPoint.from_json(obj)
    except (ValueError, AttributeError) as exc:
        raise InputError(str(exc)) from exc


def _measure(text: str):
    from .measures import SchemaError, measure_from_json

    try:
        return measure_from_json(_load_json(text))
    except SchemaError as exc:
        raise InputError(f"schema error: {exc}") from exc


def _region(text: str):
    from .integrate import RegionSpec

    try:
        return RegionSpec.from_json(_load_json(text))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"schema error: {exc}") from exc


def _clean(obj):
    """Replace non-finite floats with strings so the output stays strict JSON."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _cnum(z: complex) -> list[float]:
    return [z.real, z.imag]


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot write {out}: {exc.strerror}") from exc


def _dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _require_dim(z, mu) -> None:
    if z.dim != mu.dim:
        raise InputError(f"point has dimension {z.dim}, measure has dimension {mu.dim}")


def _run(cfg: CliConfig) -> int:
    from .geometry import DomainError

    P = cfg.params
    cmd = cfg.subcommand
    try:
        if cmd == "kernel":
            from .kernel import bergman_kernel, kernel_norm, normalized_kernel

            z, w = _point(P["z"]), _point(P["w"])
            if z.dim != w.dim:
                raise InputError("points have different dimensions")
            rep = {
                "z": z.to_json(),
                "w": w.to_json(),
                "K": _cnum(bergman_kernel(z, w)),
                "k_z(w)": _cnum(normalized_kernel(z, w)),
                "p": P["p"],
                "norm_K_z_p": kernel_norm(z, P["p"]),
            }
        elif cmd == "metric":
            from .metric import bergman_distance

            z, w = _point(P["from_"]), _point(P["to"])
            if z.dim != w.dim:
                raise InputError("points have different dimensions")
            rep = {"from": z.to_json(), "to": w.to_json(), "beta": bergman_distance(z, w)}
        elif cmd == "lattice":
            from .lattice import build_lattice

            region = _region(P["region"])
            try:
                rep = build_lattice(region, P["r"], cfg.seed, n=cfg.dim).to_json()
            except ValueError as exc:
                raise InputError(str(exc)) from exc
        elif cmd == "berezin":
            from .measures import berezin

            mu, z = _measure(P["measure"]), _point(P["z"])
            _require_dim(z, mu)
            rep = {"z": z.to_json(), "berezin": berezin(mu, z, cfg.samples, cfg.seed).to_json()}
        elif cmd == "averaging":
            from .measures import averaging

            mu, z = _measure(P["measure"]), _point(P["z"])
            _require_dim(z, mu)
            res = averaging(mu, z, P["r"], cfg.samples, cfg.seed)
            rep = {"z": z.to_json(), "r": P["r"], "averaging": res.to_json()}
        elif cmd == "diagnose":
            from .carleson import DiagnoseConfig, diagnose

            mu = _measure(P["measure"])
            dc = DiagnoseConfig(r=P["r"], seed=cfg.seed, samples=cfg.samples, lattice_samples=P["lattice_samples"])
            report = diagnose(mu, dc)
            if cfg.fmt == "csv":
                _emit(report.shell_csv(), cfg.out)
                return EXIT_OK
            rep = report.to_json()
        elif cmd == "verify":
            from .verify import run_suite

            rows = run_suite(cfg.samples, cfg.seed, P["dims"])
            rep = {
                "samples": cfg.samples,
                "seed": cfg.seed,
                "dims": list(P["dims"]),
                "checks": [c.to_json() for c in rows],
                "failures": sum(not c.passed for c in rows),
            }
            _emit(_dumps(rep), cfg.out)
            return EXIT_FAILURES if rep["failures"] else EXIT_OK
        else:  # pragma: no cover - argparse rejects unknown subcommands
            raise InputError(f"unknown subcommand {cmd}")
    except DomainError as exc:
        raise InputError(str(exc)) from exc
    _emit(_dumps(rep), cfg.out)
    return EXIT_OK


def run(cfg: CliConfig) -> int:
    try:
        return _run(cfg)
    except InputError as exc:
        print(f"siegel-bergman {cfg.subcommand}: {exc}", file=sys.stderr)
        return EXIT_IO


def main(argv=None) -> int:
    try:
        cfg = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
