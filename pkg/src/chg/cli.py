"""Command-line front end.

Exit codes: 0 success, 1 usage or input error, 2 numerical failure,
3 verification failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import List, Optional

import numpy as np

from chg.catalog import catalog as catalog_group, names as catalog_names
from chg.control import dset_estimate, dset_predict, limit_pair, mz_matrix, phi_z_geometric
from chg.errors import (
    DimensionMismatch,
    GeometryError,
    NotInGroup,
    ParseError,
    UnknownName,
)
from chg.hermitian import BOUNDARY_TOL, cartan_invariant, herm_values, triple_class
from chg.io import cloud_to_csv, group_to_json, load_group, orbit_to_csv
from chg.limitset import (
    VerifyParams,
    chen_greenberg_estimate,
    cluster_count,
    kulkarni_from_cg,
    verify_main_theorem,
)
from chg.orbit import GroupPresentation, orbit_bfs
from chg.projective import RANK_TOL, ProjectiveSubspace, fs_distance
from chg.pu1n import PP_TOL, cartan_decompose

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3
INPUT_ERRORS = (ParseError, NotInGroup, UnknownName, DimensionMismatch)

log = logging.getLogger("chg")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    depth: int = 10
    budget: int = 10 ** 6
    delta: float = 1e-3
    boundary_tol: float = BOUNDARY_TOL
    rank_tol: float = RANK_TOL
    convergence_tol: float = PP_TOL
    tol: float = 1e-2
    seed: int = 0
    threads: int = 1
    frontier_cap: Optional[int] = None
    out: Optional[str] = None
    format: str = "json"

    def __post_init__(self):
        for name in ("delta", "boundary_tol", "rank_tol", "convergence_tol", "tol"):
            if not getattr(self, name) > 0:
                raise UsageError(f"{name} must be positive")
        if self.depth < 1:
            raise UsageError("depth must be at least 1")
        if self.budget < 1:
            raise UsageError("budget must be at least 1")
        if self.threads < 1:
            raise UsageError("threads must be at least 1")


def _complex_token(tok: str) -> complex:
    t = tok.strip().replace(" ", "").replace("i", "j")
    if t in ("j", "+j"):
        return 1j
    if t == "-j":
        return -1j
    try:
        return complex(t)
    except ValueError:
        raise UsageError(f"cannot read complex number {tok!r}") from None


def parse_point(text: str, n: Optional[int] = None) -> np.ndarray:
    """'e2' (needs n) or comma-separated complex entries such as '1,0,i'."""
    s = text.strip()
    if s.startswith("e") and s[1:].isdigit():
        if n is None:
            raise UsageError(f"basis point {s!r} needs a dimension")
        k = int(s[1:])
        if not 1 <= k <= n + 1:
            raise UsageError(f"basis index {k} out of range for n = {n}")
        v = np.zeros(n + 1, dtype=complex)
        v[k - 1] = 1
        return v
    return np.array([_complex_token(t) for t in s.split(",")])


def parse_points(text: str, n: Optional[int] = None) -> List[np.ndarray]:
    parts = [p for p in text.replace("<", "").replace(">", "").split("|")]
    explicit = [parse_point(p) for p in parts if not p.strip().startswith("e")]
    if explicit:
        n = explicit[0].shape[0] - 1
    return [parse_point(p, n) for p in parts]


def read_matrix(path: str) -> np.ndarray:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    except OSError as exc:
        raise UsageError(str(exc)) from None
    if isinstance(doc, dict):
        doc = doc.get("matrix", doc.get("generators", [None])[0])
    try:
        rows = [[complex(*e) if isinstance(e, list) else complex(e) for e in row] for row in doc]
    except (TypeError, ValueError):
        raise ParseError("matrix entries must be numbers or [re, im] pairs") from None
    widths = {len(r) for r in rows}
    if len(widths) != 1 or widths.pop() != len(rows):
        raise UsageError("matrix must be square")
    return np.array(rows, dtype=complex)


def resolve_group(args) -> GroupPresentation:
    name = args.catalog or args.group
    if name is None:
        raise UsageError("a group is required: --group PATH or --catalog NAME")
    if args.group and Path(args.group).exists():
        return load_group(args.group)
    return catalog_group(name, args.n)


def _jsonable(x):
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            return {"re": x.real.tolist(), "im": x.imag.tolist()}
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def emit(text: str, cfg: RunConfig) -> None:
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


def emit_json(doc, cfg: RunConfig) -> None:
    emit(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n", cfg)


def cmd_decompose(args, cfg):
    if not args.matrix:
        raise UsageError("decompose needs --matrix PATH")
    g = read_matrix(args.matrix)
    d = cartan_decompose(g)
    rec = d.reconstruct()
    scale = g.reshape(-1)[np.argmax(np.abs(g))] / rec.reshape(-1)[np.argmax(np.abs(g))]
    err = float(np.linalg.norm(rec * scale - g) / np.linalg.norm(g))
    emit_json({"lambda": d.lam, "k1": d.k1, "k2": d.k2, "relative_error": err}, cfg)
    return EXIT_OK


def cmd_invariant(args, cfg):
    if not args.points:
        raise UsageError("invariant needs --points 'x | y | z'")
    pts = parse_points(args.points, args.n)
    if len(pts) != 3:
        raise UsageError("invariant needs exactly three points")
    A = cartan_invariant(*pts, tol=cfg.boundary_tol)
    emit_json({"invariant": A, "class": triple_class(*pts).value}, cfg)
    return EXIT_OK


def cmd_pencil(args, cfg):
    if not args.point:
        raise UsageError("pencil needs --point z")
    z = parse_point(args.point)
    M = mz_matrix(z)
    n = z.shape[0] - 1
    e1 = np.eye(n + 1)[0]
    en = np.eye(n + 1)[n]
    rng = np.random.default_rng(cfg.seed)
    z0 = z[1:n]
    w = np.concatenate([[0], rng.normal(size=n - 1) + 1j * rng.normal(size=n - 1), [0]])
    image = phi_z_geometric(z, w)
    emit_json({
        "mz": M,
        "eigenvalues": np.linalg.eigvals(M),
        "invariant_e1_z_en": cartan_invariant(e1, z, en, tol=cfg.boundary_tol),
        "sample_w": w,
        "phi_z_w": image.coords,
        "middle_of_z": z0,
    }, cfg)
    return EXIT_OK


def _cloud_doc(points, wl, bv, extra):
    doc = dict(extra)
    doc["points"] = points
    doc["word_lengths"] = np.asarray(wl)
    doc["ball_values"] = np.asarray(bv)
    return doc


def cmd_orbit(args, cfg):
    G = resolve_group(args)
    cloud = orbit_bfs(G, cfg.depth, cfg.budget, None, cfg.frontier_cap, cfg.seed, cfg.threads)
    log.info("enumerated %d elements (truncated=%s)", cloud.dedup_count, cloud.truncated)
    if cfg.format == "csv":
        emit(orbit_to_csv(cloud), cfg)
    else:
        emit_json(_cloud_doc(cloud.points, cloud.word_lengths, cloud.ball_values, {
            "group": G.name, "depth": cloud.depth, "dedup_count": cloud.dedup_count,
            "truncated": cloud.truncated, "mode": cloud.mode}), cfg)
    return EXIT_OK


def cmd_limitset(args, cfg):
    G = resolve_group(args)
    est = chen_greenberg_estimate(G, cfg.depth, cfg.delta, budget=cfg.budget,
                                  frontier_cap=cfg.frontier_cap, seed=cfg.seed, threads=cfg.threads)
    if cfg.format == "csv":
        pts = est.boundary_samples
        emit(cloud_to_csv(pts, est.word_lengths, herm_values(pts)), cfg)
        return EXIT_OK
    doc = {"group": G.name, "depth": cfg.depth, "delta": cfg.delta, "samples": len(est),
           "truncated": est.truncated}
    if len(est):
        fam = kulkarni_from_cg(est)
        doc["clusters"] = cluster_count(est)
        doc["hyperplane_bases"] = fam.bases
    emit_json(doc, cfg)
    return EXIT_OK


def cmd_dset(args, cfg):
    G = resolve_group(args)
    if not G.generators:
        raise UsageError("group has no generators")
    if not args.point:
        raise UsageError("dset needs --point x")
    x = parse_point(args.point, G.n)
    g = G.generators[0]
    seq = [np.linalg.matrix_power(g, m) for m in range(1, cfg.depth + 1)]
    lp = limit_pair(seq)
    pred = dset_predict(lp, x)
    rows = dset_estimate(seq, x, seed=cfg.seed)
    if isinstance(pred, ProjectiveSubspace):
        dist = max(pred.distance(r) for r in rows)
        kind, frame = "line", pred.frame
    else:
        dist = max(fs_distance(pred, r) for r in rows)
        kind, frame = "point", pred.coords
    emit_json({"prediction": kind, "frame": frame, "max_distance": dist,
               "estimate": np.array(rows)}, cfg)
    return EXIT_OK


def cmd_verify(args, cfg):
    G = resolve_group(args)
    D = cfg.depth
    depths = sorted({max(1, D // 3), max(1, (2 * D) // 3), D})
    params = VerifyParams(depths=tuple(depths), delta=cfg.delta, budget=cfg.budget,
                          frontier_cap=cfg.frontier_cap if cfg.frontier_cap else 200,
                          eq_depths=(max(1, D // 2), D), seed=cfg.seed, threads=cfg.threads,
                          criterion_i_tol=cfg.tol)
    report = verify_main_theorem(G, params)
    doc = report.to_dict()
    doc["run_config"] = asdict(cfg)
    emit_json(doc, cfg)
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_catalog(args, cfg):
    if args.catalog or args.group:
        emit(group_to_json(catalog_group(args.catalog or args.group, args.n)), cfg)
    else:
        emit("\n".join(catalog_names()) + "\n", cfg)
    return EXIT_OK


COMMANDS = {
    "decompose": cmd_decompose,
    "invariant": cmd_invariant,
    "pencil": cmd_pencil,
    "orbit": cmd_orbit,
    "limitset": cmd_limitset,
    "dset": cmd_dset,
    "verify": cmd_verify,
    "catalog": cmd_catalog,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="chg", description="Complex hyperbolic groups and their limit sets.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--group", help="group file (JSON) or catalog name")
    p.add_argument("--catalog", help="built-in group name")
    p.add_argument("--n", type=int, default=None, help="dimension for catalog groups")
    p.add_argument("--matrix", help="matrix file for decompose")
    p.add_argument("--points", help="three points 'x | y | z' for invariant")
    p.add_argument("--point", help="a point, e.g. '1,1,1,-1' or 'e2'")
    p.add_argument("--depth", type=int, default=10)
    p.add_argument("--budget", type=int, default=10 ** 6)
    p.add_argument("--frontier-cap", type=int, default=None)
    p.add_argument("--delta", type=float, default=1e-3)
    p.add_argument("--tol", type=float, default=1e-2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out")
    p.add_argument("--format", choices=["csv", "json"], default="json")
    return p


def _error_record(kind: str, exc: Exception) -> None:
    rec = {"error": type(exc).__name__, "kind": kind, "message": str(exc)}
    for attr in ("line", "column", "index", "residual", "gap"):
        if getattr(exc, attr, None) is not None:
            rec[attr] = getattr(exc, attr)
    sys.stderr.write(json.dumps(rec) + "\n")


def run(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=os.environ.get("CHG_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        cfg = RunConfig(depth=args.depth, budget=args.budget, delta=args.delta, tol=args.tol,
                        seed=args.seed, threads=args.threads, frontier_cap=args.frontier_cap,
                        out=args.out, format=args.format)
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        _error_record("usage", exc)
        return EXIT_USAGE
    except INPUT_ERRORS as exc:
        _error_record("input", exc)
        return EXIT_USAGE
    except GeometryError as exc:
        _error_record("numerical", exc)
        return EXIT_NUMERIC
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        _error_record("numerical", exc)
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
