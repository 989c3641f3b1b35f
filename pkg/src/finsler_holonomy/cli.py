"""Command-line interface.

Exit codes: 0 success / certified, 1 I/O or parse failure, 2 hypothesis
violation, 3 inconclusive or rank-deficient certificate.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .curvature import flag_curvature_residual
from .errors import FinslerError
from .independence import CERTIFY_GAP, DEFAULT_GRID, HYPOTHESIS_TOL, RANK_TOL, VERDICT_CERTIFIED, VERDICT_VIOLATION, certify
from .metrics import BALL_FAMILIES, MetricSpec, profile_from_dict, spec_from_dict
from .profile import PolarProfile, profile_curvature
from .spray import geodesic_integrate
from .submanifold import certify_via_plane
from .transport import REPROJECTION_LIMIT, loop_holonomy, nonlinearity_defect, square_loop

TOOL = "finsler-holonomy"
EXIT_OK, EXIT_IO, EXIT_VIOLATION, EXIT_INCONCLUSIVE = 0, 1, 2, 3

log = logging.getLogger(__name__)


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    metric: dict | None
    out: str | None
    grid: int = DEFAULT_GRID
    tol: float = RANK_TOL
    seed: int = 0
    options: dict = field(default_factory=dict)

    def canonical(self) -> dict:
        return {
            "command": self.command,
            "metric": self.metric,
            "grid": self.grid,
            "tol": self.tol,
            "seed": self.seed,
            "options": self.options,
        }

    def digest(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _load_spec(cfg: RunConfig) -> MetricSpec:
    try:
        return spec_from_dict(cfg.metric)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"invalid metric spec: {exc}") from exc


def _parse_vector(text: str | None, n: int, default) -> np.ndarray:
    if text is None:
        return np.asarray(default, float)
    try:
        v = np.array([float(s) for s in text.split(",")])
    except ValueError as exc:
        raise InputError(f"cannot parse vector {text!r}") from exc
    if v.size != n:
        raise InputError(f"expected {n} components, got {v.size}")
    return v


def _parse_plane(text: str) -> tuple[int, int]:
    try:
        i, j = (int(s) for s in text.split(","))
    except ValueError as exc:
        raise InputError(f"--plane expects two 1-based indices 'i,j', got {text!r}") from exc
    return i - 1, j - 1


def _envelope(cfg: RunConfig, tolerances: dict, body: dict) -> dict:
    return {
        "tool": TOOL,
        "version": __version__,
        "config": cfg.canonical(),
        "config_hash": cfg.digest(),
        "tolerances": tolerances,
        "report": body,
    }


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError(f"cannot write {out}: {exc.strerror or exc}") from exc


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


# commands ------------------------------------------------------------------


def cmd_certify(cfg: RunConfig) -> int:
    spec = _load_spec(cfg)
    condition = cfg.options["condition"]
    params = {"N": cfg.grid, "tolerance": cfg.tol}
    if cfg.options.get("plane"):
        report = certify_via_plane(spec, _parse_plane(cfg.options["plane"]), condition, **params)
    else:
        report = certify(spec, condition, **params)
    tolerances = {"rank": cfg.tol, "certify_gap": CERTIFY_GAP, "hypothesis": HYPOTHESIS_TOL}
    text = json.dumps(_envelope(cfg, tolerances, report.to_dict()), sort_keys=True, indent=2) + "\n"
    _emit(text, cfg.out)
    if report.verdict == VERDICT_CERTIFIED:
        return EXIT_OK
    if report.verdict == VERDICT_VIOLATION:
        return EXIT_VIOLATION
    return EXIT_INCONCLUSIVE


def _random_chart_points(spec: MetricSpec, rng: np.random.Generator, count: int):
    n = spec.n
    for _ in range(count):
        if spec.family in BALL_FAMILIES:
            d = rng.normal(size=n)
            x = d / np.linalg.norm(d) * 0.6 * rng.uniform() ** (1.0 / n)
        else:
            x = rng.uniform(-1.0, 1.0, n)
        yield x, rng.normal(size=n)


def cmd_curvature(cfg: RunConfig) -> int:
    spec = _load_spec(cfg)
    lam = cfg.options.get("lam")
    lam = spec.flag_curvature if lam is None else lam
    if lam is None:
        raise InputError("no flag curvature known for this metric; pass --lambda")
    rng = np.random.default_rng(cfg.seed)
    n = spec.n
    rows = []
    for x, y in _random_chart_points(spec, rng, cfg.options["samples"]):
        res = flag_curvature_residual(spec, x, y, lam)
        rows.append([*x, *y, res.residual, res.sign])
    header = [f"x{i + 1}" for i in range(n)] + [f"y{i + 1}" for i in range(n)] + ["residual", "matched_sign"]
    _emit(_csv(header, rows), cfg.out)
    return EXIT_OK


def cmd_transport(cfg: RunConfig) -> int:
    spec = _load_spec(cfg)
    n = spec.n
    x0 = _parse_vector(cfg.options.get("x0"), n, np.zeros(n))
    hmap = loop_holonomy(spec, square_loop(x0, cfg.options["side"]), cfg.options["samples"])
    defect = nonlinearity_defect(hmap)
    header = [f"y{i + 1}" for i in range(n)] + [f"image{i + 1}" for i in range(n)] + ["correction", "valid", "defect"]
    rows = [
        [*hmap.inputs[:, k], *hmap.outputs[:, k], hmap.corrections[k], int(hmap.valid[k]), defect]
        for k in range(hmap.inputs.shape[1])
    ]
    _emit(_csv(header, rows), cfg.out)
    return EXIT_OK


def cmd_geodesic(cfg: RunConfig) -> int:
    spec = _load_spec(cfg)
    n = spec.n
    x0 = _parse_vector(cfg.options.get("x0"), n, np.zeros(n))
    y0 = _parse_vector(cfg.options.get("y0"), n, np.eye(n)[0])
    trace = geodesic_integrate(spec, x0, y0, cfg.options["T"], n_out=cfg.options["points"], allow_exit=True)
    header = ["t"] + [f"x{i + 1}" for i in range(n)] + [f"xdot{i + 1}" for i in range(n)] + ["F"]
    rows = [[trace.t[k], *trace.x[:, k], *trace.xdot[:, k], trace.F[k]] for k in range(len(trace.t))]
    _emit(_csv(header, rows), cfg.out)
    return EXIT_OK


def _profile_of(cfg: RunConfig) -> PolarProfile:
    d = cfg.metric
    try:
        if "family" in d:
            spec = spec_from_dict(d)
            if spec.family != "PolarProfilePointwise":
                raise InputError("the profile command needs a PolarProfilePointwise metric or a bare profile")
            return spec.profile_F if cfg.options.get("which") == "F" else spec.profile_P
        return profile_from_dict(d)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"invalid profile: {exc}") from exc


def cmd_profile(cfg: RunConfig) -> int:
    prof = _profile_of(cfg)
    t = 2.0 * np.pi * np.arange(cfg.grid) / cfg.grid
    r, rd, rdd = prof.derivatives(t, 2)
    kappa = profile_curvature(prof, t)
    rows = zip(t, r, rd, rdd, kappa)
    _emit(_csv(["t", "r", "rdot", "rddot", "kappa"], rows), cfg.out)
    return EXIT_OK


COMMANDS = {
    "certify": cmd_certify,
    "curvature": cmd_curvature,
    "transport": cmd_transport,
    "geodesic": cmd_geodesic,
    "profile": cmd_profile,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=TOOL, description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--metric", required=True, help="metric spec JSON file")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--grid", type=int, default=DEFAULT_GRID, help="angular grid size")
        p.add_argument("--tol", type=float, default=RANK_TOL, help="rank tolerance")
        p.add_argument("--seed", type=int, default=0, help="seed for random sampling")

    p = sub.add_parser("certify", help="certify infinite-dimensional holonomy")
    common(p)
    p.add_argument("--condition", required=True, choices=["A", "B", "C"])
    p.add_argument("--plane", help="1-based coordinate indices 'i,j' of a 2-plane")

    p = sub.add_parser("curvature", help="flag-curvature residuals at random points (CSV)")
    common(p)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--lambda", dest="lam", type=float, help="override the known flag curvature")

    p = sub.add_parser("transport", help="square-loop holonomy map (CSV)")
    common(p)
    p.add_argument("--side", type=float, default=0.3)
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--x0", help="loop corner, comma separated")

    p = sub.add_parser("geodesic", help="geodesic trace (CSV)")
    common(p)
    p.add_argument("--x0")
    p.add_argument("--y0")
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--points", type=int, default=101)

    p = sub.add_parser("profile", help="polar profile and curvature (CSV)")
    common(p)
    p.add_argument("--which", choices=["F", "P"], default="P")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    skip = {"command", "metric", "out", "grid", "tol", "seed", "verbose"}
    options = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    try:
        if args.grid < 64:
            raise InputError("--grid must be at least 64")
        if args.tol <= 0:
            raise InputError("--tol must be positive")
        cfg = RunConfig(args.command, _load_json(args.metric), args.out, args.grid, args.tol, args.seed, options)
        return COMMANDS[args.command](cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except FinslerError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
