"""Command line entry point and the reproducible experiment pipeline.

Every subcommand prints a JSON report (or CSV for the blow-up table) to
stdout or to ``--out``.  Errors exit with the code attached to the
exception family: 2 config, 3 numerical, 4 validation.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .atoms import Atom, build_base_atom, family_params, validate_atom
from .blowup import blowup_experiment
from .classify import equiv_norm_decision, hardy_equal_decision
from .dilations import check_admissible
from .errors import ConfigError, ConfigInvalid, HardyDilError, PipelineStageFailure
from .grid import Bump, GridFunction, GridSpec, lp_quasinorm
from .lie import LieAlgebra, load_group
from .maximal import Ladder, radial_maximal
from .moments import delta_semigroup, min_admissible_alpha, shared_alpha
from .quasinorm import QuasiNormHandle, estimate_eta_constants, estimate_quasi_triangle_C, quasi_norm
from .sequence import build_aux_atom, build_counterexample_state, singular_limit_diagnostics

BUNDLED = ("heisenberg-same.json", "r2-diverge.json")


# ------------------------------------------------------------ helpers


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return _jsonable(v.item())
    if isinstance(v, float) and not math.isfinite(v):
        return None if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if hasattr(v, "matrix"):
        return _jsonable(v.matrix)
    if isinstance(v, QuasiNormHandle):
        return {"matrix": _jsonable(v.dilation.matrix)}
    return v


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def parse_matrix(text, field_name: str = "matrix"):
    """Row-major JSON array, given inline or as a path to a JSON file."""
    if isinstance(text, (list, tuple, np.ndarray)):
        data = text
    else:
        s = str(text).strip()
        if not s.startswith("["):
            path = Path(s)
            if not path.exists():
                raise ConfigInvalid(field_name, f"file {s} does not exist")
            s = path.read_text()
        try:
            data = json.loads(s)
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(field_name, f"not a JSON array: {exc}") from None
    M = np.asarray(data, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ConfigInvalid(field_name, f"expected a square matrix, got shape {M.shape}")
    return M


def dilation(matrix, algebra: LieAlgebra, normalize: bool = False, field_name: str = "matrix"):
    D = check_admissible(parse_matrix(matrix, field_name), algebra)
    return D.normalized() if normalize else D


def save_atom(atom: Atom, prefix) -> tuple[Path, Path]:
    """JSON header next to a ``.npy`` value payload."""
    prefix = Path(prefix)
    head, payload = prefix.with_suffix(".json"), prefix.with_suffix(".npy")
    header = atom.to_header()
    header["payload"] = payload.name
    head.write_text(dumps(header))
    with open(payload, "wb") as fh:
        np.save(fh, np.ascontiguousarray(atom.values.values))
    return head, payload


def load_atom(path) -> Atom:
    head = Path(path).with_suffix(".json")
    if not head.exists():
        raise ConfigInvalid("atom", f"file {head} does not exist")
    h = json.loads(head.read_text())
    vals = np.load(head.with_name(h.get("payload", head.with_suffix(".npy").name)))
    params = {k: (np.asarray(v) if isinstance(v, list) else v) for k, v in h["params"].items()}
    g = GridSpec.from_json(h["grid"])
    return Atom(GridFunction(g, vals), h["kind"], h["p"], h["alpha"], params, h.get("moment_residual", float("nan")))


# ------------------------------------------------------------ pipeline


@dataclass
class ExperimentConfig:
    group: str | dict
    A: list
    B: list
    p: float
    grid: dict = field(default_factory=lambda: {"L": 2.0, "m": 65})
    atom_grid: dict = field(default_factory=lambda: {"L": 2.0, "m": 129})
    ladder: dict = field(default_factory=lambda: {"q": 8, "K": 48})
    atom: dict = field(default_factory=dict)
    seed: int = 0
    j_max: int = 5
    output: str = "hardydil-out"
    normalize_min_eigenvalue: bool = False
    tolerance: float = 1e-9
    base_dir: str = "."

    def to_json(self):
        d = dict(self.__dict__)
        d.pop("base_dir")
        return d


def _need(raw, key):
    if key not in raw:
        raise ConfigInvalid(key, "missing")
    return raw[key]


def _grid_field(raw, key, default):
    g = dict(default)
    g.update(raw.get(key, {}))
    L, m = g["L"], g["m"]
    if not (isinstance(m, int) and m >= 3 and m % 2 == 1):
        raise ConfigInvalid(f"{key}.m", f"must be an odd integer >= 3, got {m!r}")
    if not float(L) > 0:
        raise ConfigInvalid(f"{key}.L", "must be positive")
    return {"L": float(L), "m": m}


def load_config(source) -> ExperimentConfig:
    """Parse and check a config (dict, JSON path, or bundled config name)."""
    base = Path(".")
    if isinstance(source, dict):
        raw = source
    else:
        path = Path(str(source))
        if not path.exists() and path.name in BUNDLED:
            path = Path(str(resources.files("hardydil") / "configs" / path.name))
        if not path.exists():
            raise ConfigInvalid("config", f"file {source} does not exist")
        raw = json.loads(path.read_text())
        base = path.parent
    p = float(_need(raw, "p"))
    if not 0 < p <= 1:
        raise ConfigInvalid("p", f"must lie in (0, 1], got {p}")
    group = _need(raw, "group")
    if isinstance(group, str) and group.endswith(".json"):
        gp = Path(group) if Path(group).is_absolute() else base / group
        if not gp.exists():
            raise ConfigInvalid("group", f"file {gp} does not exist")
    ladder = {"q": 8, "K": 48, **raw.get("ladder", {})}
    if int(ladder["q"]) < 1 or int(ladder["K"]) < 0:
        raise ConfigInvalid("ladder", "q must be >= 1 and K >= 0")
    atom = dict(raw.get("atom", {}))
    for k in ("theta", "eps_ball", "R"):
        if k in atom and not float(atom[k]) > 0:
            raise ConfigInvalid(f"atom.{k}", "must be positive")
    tol = float(raw.get("tolerance", 1e-9))
    if not tol > 0:
        raise ConfigInvalid("tolerance", "must be positive")
    j_max = int(raw.get("j_max", 5))
    if j_max < 1:
        raise ConfigInvalid("j_max", "must be >= 1")
    return ExperimentConfig(
        group=group,
        A=parse_matrix(_need(raw, "A"), "A").tolist(),
        B=parse_matrix(_need(raw, "B"), "B").tolist(),
        p=p,
        grid=_grid_field(raw, "grid", {"L": 2.0, "m": 65}),
        atom_grid=_grid_field(raw, "atom_grid", {"L": 2.0, "m": 129}),
        ladder={"q": int(ladder["q"]), "K": int(ladder["K"])},
        atom=atom,
        seed=int(raw.get("seed", 0)),
        j_max=j_max,
        output=str(raw.get("output", "hardydil-out")),
        normalize_min_eigenvalue=bool(raw.get("normalize_min_eigenvalue", False)),
        tolerance=tol,
        base_dir=str(base),
    )


def config_hash(cfg: ExperimentConfig) -> str:
    blob = json.dumps(_jsonable(cfg.to_json()), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class _Stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, et, ev, tb):
        if ev is not None and isinstance(ev, (HardyDilError, ArithmeticError, ValueError, np.linalg.LinAlgError)):
            if isinstance(ev, PipelineStageFailure):
                return False
            raise PipelineStageFailure(self.name, ev) from ev
        return False


def run_pipeline(config, output=None) -> Path:
    """Classification, atoms, blow-up table and manifest in one directory.

    Stage seeds are spawned from the root seed, so reruns are byte-identical.
    The blow-up stage needs ``p < 1`` and is skipped (and recorded) at ``p = 1``.
    """
    cfg = config if isinstance(config, ExperimentConfig) else load_config(config)
    out = Path(output if output is not None else cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    seeds = np.random.SeedSequence(cfg.seed).spawn(3)
    files = {}

    with _Stage("setup"):
        gspec = cfg.group
        if isinstance(gspec, str) and gspec.endswith(".json") and not Path(gspec).is_absolute():
            gspec = str(Path(cfg.base_dir) / gspec)
        algebra = load_group(gspec)
        A = dilation(cfg.A, algebra, cfg.normalize_min_eigenvalue, "A")
        B = dilation(cfg.B, algebra, cfg.normalize_min_eigenvalue, "B")

    with _Stage("classify"):
        report = hardy_equal_decision(A, B, tol=cfg.tolerance)
        norms = equiv_norm_decision(A, B, tol=cfg.tolerance)
        doc = {"hardy": report.to_json(), "norms": norms.to_json()}
        path = out / "classification.json"
        path.write_text(dumps(doc))
        files[path.name] = path

    with _Stage("atoms"):
        n = algebra.dim
        alpha = cfg.atom.get("alpha")
        alpha = shared_alpha(A, B, cfg.p) if alpha is None else int(alpha)
        ag = GridSpec(cfg.atom_grid["L"], cfg.atom_grid["m"], n)
        a0 = build_base_atom(
            algebra, alpha,
            theta=float(cfg.atom.get("theta", 0.2)),
            eps_ball=float(cfg.atom.get("eps_ball", 0.2)),
            R=float(cfg.atom.get("R", 2.0)),
            grid=ag, p=cfg.p, rng=np.random.default_rng(seeds[0]),
        )
        for f in save_atom(a0, out / "atom_base"):
            files[f.name] = f
        for j in range(1, cfg.j_max + 1):
            aj = build_aux_atom(build_counterexample_state(A, B, j), a0, A, B)
            for f in save_atom(aj, out / f"atom_aux_j{j}"):
                files[f.name] = f

    notes = []
    if cfg.p < 1:
        with _Stage("blowup"):
            res = blowup_experiment(
                A, B, cfg.p, cfg.j_max, algebra,
                theta=float(cfg.atom.get("theta", 0.2)),
                eps_ball=float(cfg.atom.get("eps_ball", 0.2)),
                R=float(cfg.atom.get("R", 2.0)),
                eval_grid=GridSpec(cfg.grid["L"], cfg.grid["m"], n),
                q=cfg.ladder["q"],
                seed=int(seeds[1].generate_state(1)[0]),
                alpha=alpha, a0=a0,
            )
            path = out / "blowup.csv"
            path.write_text(res.to_csv())
            files[path.name] = path
            path = out / "blowup_meta.json"
            path.write_text(dumps({"meta": res.meta, "rows": res.rows}))
            files[path.name] = path
    else:
        notes.append("blow-up stage skipped: it needs p < 1")

    manifest = {
        "version": __version__,
        "config_sha256": config_hash(cfg),
        "config": cfg.to_json(),
        "files": {k: _sha256(v) for k, v in sorted(files.items())},
        "notes": notes,
    }
    (out / "manifest.json").write_text(dumps(manifest))
    return out


def emit_plotdata(csv_path, out_dir=None, columns=("integral_p", "marker")) -> dict:
    """Write ``j value`` series files, one per column; no rendering."""
    src = Path(csv_path)
    if not src.exists():
        raise FileNotFoundError(f"CSV file {src} does not exist")
    out = Path(out_dir) if out_dir is not None else src.parent
    out.mkdir(parents=True, exist_ok=True)
    with open(src, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        rows = list(reader)
    if not rows:
        warnings.warn(f"{src} holds no data rows; writing empty series", RuntimeWarning, stacklevel=2)
    elif "j" not in header:
        raise ConfigInvalid("j", f"column missing from {src}")
    written = {}
    for col in columns:
        if rows and col not in header:
            raise ConfigInvalid(col, f"column missing from {src}")
        path = out / f"{src.stem}.{col}.dat"
        with open(path, "w") as fh:
            fh.write(f"# j {col}\n")
            for r in rows:
                fh.write(f"{r['j']} {r[col]}\n")
        written[col] = path
    return written


# ------------------------------------------------------------ commands


def _emit(args, text: str):
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _setup(args):
    algebra = load_group(args.group)
    norm = getattr(args, "normalize_min_eigenvalue", False)
    return algebra, norm


def cmd_group_check(args):
    algebra = load_group(args.group)
    _emit(args, dumps({"name": algebra.name, "dim": algebra.dim, "abelian": algebra.is_abelian,
                       "step": algebra.nilpotency_step, "valid": True}))


def cmd_dilation_check(args):
    algebra, norm = _setup(args)
    D = dilation(args.matrix, algebra, norm)
    _emit(args, dumps({"eigenvalues": D.eigenvalues, "trace": D.trace, "normalized": D.is_normalized,
                       "matrix": D.matrix, "admissible": True}))


def cmd_norm_eval(args):
    algebra, norm = _setup(args)
    h = QuasiNormHandle(dilation(args.matrix, algebra, norm), algebra)
    x = np.asarray(json.loads(args.point), dtype=float)
    _emit(args, dumps({"point": x, "rho": quasi_norm(h, x)}))


def cmd_norm_constants(args):
    algebra, norm = _setup(args)
    h = QuasiNormHandle(dilation(args.matrix, algebra, norm), algebra)
    tri = estimate_quasi_triangle_C(h, args.samples, seed=args.seed, R=args.R)
    eta = estimate_eta_constants(h, args.R, args.samples, seed=args.seed)
    _emit(args, dumps({"C": tri["C"], "gamma": eta["gamma"], "c1": eta["c1"], "c2": eta["c2"],
                       "seed": args.seed, "samples": args.samples, "R": args.R}))


def cmd_moments_alpha(args):
    M = parse_matrix(args.matrix)
    algebra = load_group(args.group or f"abelian:{len(M)}")
    D = dilation(M, algebra, args.normalize_min_eigenvalue)
    a = min_admissible_alpha(D, args.p)
    cap = a if args.cap is None else args.cap
    _emit(args, dumps({"p": args.p, "alpha_min": a, "delta": delta_semigroup(D, cap), "cap": cap}))


def cmd_atom_build_base(args):
    algebra = load_group(args.group)
    g = GridSpec(args.L, args.m, algebra.dim)
    a0 = build_base_atom(algebra, args.alpha, args.theta, args.eps, args.R, grid=g, p=args.p,
                         rng=np.random.default_rng(args.seed))
    head, _ = save_atom(a0, args.prefix)
    sys.stdout.write(dumps({"header": str(head), "moment_residual": a0.moment_residual,
                            "omega0": a0.params["omega0"]}))


def cmd_atom_build_aux(args):
    algebra, norm = _setup(args)
    A = dilation(args.A, algebra, norm, "A")
    B = dilation(args.B, algebra, norm, "B")
    a0 = load_atom(args.atom)
    st = build_counterexample_state(A, B, args.j)
    head, _ = save_atom(build_aux_atom(st, a0, A, B), args.prefix)
    sys.stdout.write(dumps({"header": str(head), "state": st.to_json()}))


def cmd_atom_validate(args):
    algebra, norm = _setup(args)
    a = load_atom(args.atom)
    A = dilation(args.A, algebra, norm, "A")
    if args.kind == "family":
        B = dilation(args.B, algebra, norm, "B")
        params = family_params(a, A, B)
    elif args.kind == "modified":
        params = {"x0": a.params.get("x0"), "k": int(a.params["k"]), "R": a.params["R"], "A": A}
    else:
        params = {"x0": a.params.get("x0"), "r": a.params["r"], "handle": QuasiNormHandle(A, algebra)}
    rep = validate_atom(a, args.kind, params, algebra)
    _emit(args, dumps(rep.to_json()))
    if not rep.passed:
        return 4
    return 0


def cmd_maximal_eval(args):
    algebra, norm = _setup(args)
    A = dilation(args.A, algebra, norm, "A")
    a = load_atom(args.atom)
    phi = Bump(algebra.dim, outer=args.radius, inner=args.radius / 2, normalized=True)
    res = radial_maximal(a.values, phi, A, Ladder.symmetric(args.q, args.K), algebra)
    out = res.as_grid_function() if res.grid is not None else None
    doc = {"sup": float(res.values.max()), "ladder_size": len(res.t_ladder),
           "lp_p": lp_quasinorm(out, a.p) ** a.p if out is not None else None,
           "argmax_t_range": [float(res.argmax_t.min()), float(res.argmax_t.max())]}
    if args.values:
        np.save(args.values, res.values)
    _emit(args, dumps(doc))


def cmd_classify_norms(args):
    algebra, norm = _setup(args)
    rep = equiv_norm_decision(dilation(args.A, algebra, norm, "A"), dilation(args.B, algebra, norm, "B"),
                              tol=args.tol)
    _emit(args, dumps(rep.to_json()))


def cmd_classify_hardy(args):
    algebra, norm = _setup(args)
    rep = hardy_equal_decision(dilation(args.A, algebra, norm, "A"), dilation(args.B, algebra, norm, "B"),
                               tol=args.tol, J=args.scan_window)
    _emit(args, dumps(rep.to_json()))


def cmd_experiment_blowup(args):
    algebra, norm = _setup(args)
    if not 0 < args.p < 1:
        raise ConfigInvalid("p", f"blow-up needs 0 < p < 1, got {args.p}")
    A = dilation(args.A, algebra, norm, "A")
    B = dilation(args.B, algebra, norm, "B")
    n = algebra.dim
    res = blowup_experiment(A, B, args.p, args.jmax, algebra, eval_grid=GridSpec(args.L, args.m, n),
                            atom_grid=GridSpec(args.atom_L, args.atom_m, n), q=args.q, seed=args.seed)
    _emit(args, res.to_csv())
    if args.meta:
        Path(args.meta).write_text(dumps({"meta": res.meta, "rows": res.rows}))


def cmd_experiment_singular(args):
    algebra, norm = _setup(args)
    A = dilation(args.A, algebra, norm, "A")
    B = dilation(args.B, algebra, norm, "B")
    alpha = shared_alpha(A, B, args.p) if args.alpha is None else args.alpha
    a0 = build_base_atom(algebra, alpha, grid=GridSpec(args.L, args.m, algebra.dim), p=args.p,
                         rng=np.random.default_rng(args.seed))
    rep = singular_limit_diagnostics(A, B, a0, args.j, count=args.count, seed=args.seed, direct_m=args.direct_m)
    _emit(args, dumps(rep))


def cmd_experiment_pipeline(args):
    out = run_pipeline(args.config, args.output)
    sys.stdout.write(dumps({"output": str(out), "manifest": str(out / "manifest.json")}))


def cmd_experiment_plotdata(args):
    written = emit_plotdata(args.csv, args.output)
    sys.stdout.write(dumps({k: str(v) for k, v in written.items()}))


# ------------------------------------------------------------ parser


def _common(p, group_default="abelian:2", group=True):
    if group:
        p.add_argument("--group", default=group_default, help="preset name or JSON group file")
    p.add_argument("--normalize-min-eigenvalue", action="store_true",
                   help="rescale matrices so that their smallest eigenvalue is 1")
    p.add_argument("--out", help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hardydil", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    top = ap.add_subparsers(dest="area", required=True)

    def area(name, help_):
        return top.add_parser(name, help=help_).add_subparsers(dest="action", required=True)

    g = area("group", "Lie algebra checks")
    p = g.add_parser("check")
    p.add_argument("--group", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_group_check)

    d = area("dilation", "admissibility checks")
    p = d.add_parser("check")
    _common(p)
    p.add_argument("--matrix", required=True)
    p.set_defaults(func=cmd_dilation_check)

    nrm = area("norm", "quasi-norm evaluation and constants")
    p = nrm.add_parser("eval")
    _common(p)
    p.add_argument("--matrix", required=True)
    p.add_argument("--point", required=True, help="JSON coordinate vector")
    p.set_defaults(func=cmd_norm_eval)
    p = nrm.add_parser("constants")
    _common(p)
    p.add_argument("--matrix", required=True)
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_norm_constants)

    m = area("moments", "moment orders")
    p = m.add_parser("alpha")
    _common(p, group_default=None)
    p.add_argument("--matrix", required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--cap", type=float, help="truncation of the printed semigroup (default alpha_min)")
    p.set_defaults(func=cmd_moments_alpha)

    at = area("atom", "atom construction and validation")
    p = at.add_parser("build-base")
    p.add_argument("--group", default="abelian:2")
    p.add_argument("--alpha", type=int, required=True)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--theta", type=float, default=0.2)
    p.add_argument("--eps", type=float, default=0.2)
    p.add_argument("--R", type=float, default=2.0)
    p.add_argument("--L", type=float, default=2.0)
    p.add_argument("--m", type=int, default=129)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--prefix", required=True, help="output path without suffix")
    p.set_defaults(func=cmd_atom_build_base)
    p = at.add_parser("build-aux")
    _common(p)
    p.add_argument("--atom", required=True, help="base atom header")
    p.add_argument("--A", required=True)
    p.add_argument("--B", required=True)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--prefix", required=True)
    p.set_defaults(func=cmd_atom_build_aux)
    p = at.add_parser("validate")
    _common(p)
    p.add_argument("--atom", required=True)
    p.add_argument("--kind", choices=("classical", "modified", "family"), required=True)
    p.add_argument("--A", required=True)
    p.add_argument("--B")
    p.set_defaults(func=cmd_atom_validate)

    mx = area("maximal", "radial maximal functions")
    p = mx.add_parser("eval")
    _common(p)
    p.add_argument("--atom", required=True)
    p.add_argument("--A", required=True)
    p.add_argument("--radius", type=float, default=0.5)
    p.add_argument("--q", type=int, default=8)
    p.add_argument("--K", type=int, default=24)
    p.add_argument("--values", help="save node values as .npy")
    p.set_defaults(func=cmd_maximal_eval)

    c = area("classify", "decision procedures")
    for name, fn in (("norms", cmd_classify_norms), ("hardy", cmd_classify_hardy)):
        p = c.add_parser(name)
        _common(p)
        p.add_argument("--A", required=True)
        p.add_argument("--B", required=True)
        p.add_argument("--tol", type=float, default=1e-9)
        if name == "hardy":
            p.add_argument("--scan-window", type=int, default=64)
        p.set_defaults(func=fn)

    e = area("experiment", "counterexample experiments and pipelines")
    p = e.add_parser("blowup")
    _common(p)
    p.add_argument("--A", required=True)
    p.add_argument("--B", required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--jmax", type=int, default=5)
    p.add_argument("--L", type=float, default=2.0)
    p.add_argument("--m", type=int, default=65)
    p.add_argument("--atom-L", type=float, default=2.0)
    p.add_argument("--atom-m", type=int, default=129)
    p.add_argument("--q", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--meta", help="write per-row diagnostics as JSON")
    p.set_defaults(func=cmd_experiment_blowup)
    p = e.add_parser("singular-limit")
    _common(p)
    p.add_argument("--A", required=True)
    p.add_argument("--B", required=True)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--alpha", type=int)
    p.add_argument("--j", type=int, nargs="+", default=[1, 2, 3, 4])
    p.add_argument("--count", type=int, default=5)
    p.add_argument("--L", type=float, default=2.0)
    p.add_argument("--m", type=int, default=129)
    p.add_argument("--direct-m", type=int, default=801)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_experiment_singular)
    p = e.add_parser("pipeline")
    p.add_argument("config", help="JSON config path or bundled config name")
    p.add_argument("--output", help="override the output directory")
    p.set_defaults(func=cmd_experiment_pipeline)
    p = e.add_parser("plotdata")
    p.add_argument("csv")
    p.add_argument("--output")
    p.set_defaults(func=cmd_experiment_plotdata)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rc = args.func(args)
    except HardyDilError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (json.JSONDecodeError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ConfigError.exit_code
    return rc or 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
