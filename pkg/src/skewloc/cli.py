"""Command-line driver.

Subcommands: classify a (j,d) cell, compute invariants for built-in models or
file-supplied operator bundles, sweep a model parameter, scan a (kappa, rho)
plateau, export a model to the bundle format, and run the self-check suite.

Exit codes: 0 success, 1 configuration or I/O error, 2 when a computation ran
but a cross-check failed (FlowDisagreement, BoundViolation, non-constant
plateau, failing self-check).
"""

import argparse
import csv
import io
import json
import os
import struct
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import linalg, models
from .errors import (
    BoundViolation,
    FlowDisagreement,
    OutOfRange,
    ParseError,
    SkewlocError,
)
from .flows import z2_index_kernel, z2_index_via_flow
from .localizer import (
    PairingData,
    admissible_bounds,
    complex_index,
    localizer_gap,
    nudge_rho,
    plateau_scan,
    z2_index_det,
    z2_index_pfaffian,
)
from .symmetry import Group, SymmetryOperator, classify

#: Fixed CSV column order; jsonl rows carry the same keys plus audit extras.
CSV_COLUMNS = ("model", "params", "j", "d", "method", "kappa", "rho",
               "admissible", "g", "localizer_gap", "value", "value_mod2")

_MAGIC = b"SKWB"
_VERSION = 1
_HEADER = struct.Struct("<4sIiiIIiid")


# ---------------------------------------------------------------------------
# matrix-bundle file format
# ---------------------------------------------------------------------------

def save_operators(path, data: PairingData):
    """Write a pairing to the self-describing binary bundle format.

    Header (little endian): magic "SKWB", version, j, d, matrix size n,
    presence flags (1: S, 2: Sigma, 4: gap override), S parity, Sigma parity,
    gap override. Then each present matrix as n*n row-major complex128
    (re, im float64 pairs): H, D0, S, Sigma.
    """
    flags = 0
    if data.S is not None:
        flags |= 1
    if data.Sigma is not None:
        flags |= 2
    if data.gap_override is not None:
        flags |= 4
    header = _HEADER.pack(
        _MAGIC, _VERSION, data.cls.j, data.cls.d, data.dim, flags,
        data.S.parity if data.S is not None else 0,
        data.Sigma.parity if data.Sigma is not None else 0,
        data.gap_override if data.gap_override is not None else 0.0,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        for M in _bundle_matrices(data):
            fh.write(np.ascontiguousarray(M, dtype="<c16").tobytes())


def _bundle_matrices(data: PairingData):
    mats = [data.hamiltonian, data.dirac]
    if data.S is not None:
        mats.append(data.S.matrix)
    if data.Sigma is not None:
        mats.append(data.Sigma.matrix)
    return mats


def load_operators(path) -> PairingData:
    """Read a pairing bundle; symmetry relations are re-validated on load."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise ParseError("truncated header", offset=len(blob))
    magic, version, j, d, n, flags, sp, sgp, gap = _HEADER.unpack_from(blob, 0)
    if magic != _MAGIC:
        raise ParseError(f"bad magic {magic!r}", offset=0)
    if version != _VERSION:
        raise ParseError(f"unsupported version {version}", offset=4)
    if not (0 <= j <= 7 and 0 <= d <= 7):
        raise ParseError(f"cell ({j},{d}) out of range", offset=8)
    offset = _HEADER.size
    count = 2 + bool(flags & 1) + bool(flags & 2)
    mats = []
    for _ in range(count):
        nbytes = n * n * 16
        if len(blob) < offset + nbytes:
            raise ParseError("truncated matrix payload", offset=len(blob))
        M = np.frombuffer(blob[offset:offset + nbytes], dtype="<c16")
        mats.append(M.reshape(n, n).copy())
        offset += nbytes
    if len(blob) != offset:
        raise ParseError("trailing bytes after payload", offset=offset)
    it = iter(mats[2:])
    S = SymmetryOperator(next(it), sp) if flags & 1 else None
    Sigma = SymmetryOperator(next(it), sgp) if flags & 2 else None
    return PairingData(cls=classify(j, d), hamiltonian=mats[0], dirac=mats[1],
                       S=S, Sigma=Sigma,
                       gap_override=gap if flags & 4 else None)


# ---------------------------------------------------------------------------
# invariant evaluation
# ---------------------------------------------------------------------------

def _resolve_kappa_rho(data: PairingData, kappa, rho):
    """Resolve "auto" to kappa = 0.9 kappa_max and rho = 1.1 rho_min(kappa)."""
    bounds = admissible_bounds(data)
    if kappa == "auto":
        if not np.isfinite(bounds.kappa_max):
            kappa = 1.0
        else:
            kappa = 0.9 * bounds.kappa_max
    else:
        kappa = float(kappa)
    if rho == "auto":
        rho = 1.1 * bounds.rho_min(kappa)
    else:
        rho = float(rho)
    return kappa, nudge_rho(data, rho), bounds


def _methods_for(data: PairingData, method: str):
    if data.cls.group != Group.Z2:
        # integer-valued cells have the half-signature only
        return ["halfsig"]
    if method == "all":
        out = ["pfaffian", "det", "flow", "kernel"]
        if (data.cls.j + data.cls.d) % 2 == 0:
            out.remove("det")
        return out
    return [method]


def evaluate(data: PairingData, method: str, kappa="auto", rho="auto",
             metadata=None):
    """Run one or more methods on a pairing and return result-row dicts."""
    kappa, rho, bounds = _resolve_kappa_rho(data, kappa, rho)
    meta = dict(metadata or {})
    model = meta.pop("model", "")
    params = ";".join(f"{k}={v}" for k, v in sorted(meta.items()))
    rows = []
    for name in _methods_for(data, method):
        t0 = time.perf_counter()
        value, err = None, None
        lg = None
        try:
            if name == "pfaffian":
                value = z2_index_pfaffian(data, kappa, rho)
            elif name == "det":
                value = z2_index_det(data, kappa, rho)
            elif name == "flow":
                value = z2_index_via_flow(data)
            elif name == "kernel":
                value = z2_index_kernel(data)
            elif name == "halfsig":
                value = complex_index(data, kappa, rho, check_bound=False)
            else:
                raise OutOfRange(f"unknown method {name!r}")
            if name not in ("flow", "kernel"):
                lg = localizer_gap(data, kappa, rho)
        except SkewlocError as exc:
            err = exc
        z2 = data.cls.group == Group.Z2
        rows.append({
            "model": model,
            "params": params,
            "j": data.cls.j,
            "d": data.cls.d,
            "method": name,
            "kappa": f"{kappa:.6g}",
            "rho": f"{rho:.6g}",
            "admissible": bounds.is_admissible(kappa, rho),
            "g": f"{data.gap:.6g}",
            "localizer_gap": "" if lg is None else f"{lg:.6g}",
            "value": "" if value is None else value,
            "value_mod2": (1 - value) // 2 if z2 and value is not None else "",
            "wall_time": time.perf_counter() - t0,
            "error": "" if err is None else f"{type(err).__name__}: {err}",
        })
        if err is not None and not isinstance(
                err, (FlowDisagreement, BoundViolation)):
            raise err
    return rows


# ---------------------------------------------------------------------------
# model construction from flags
# ---------------------------------------------------------------------------

def _build_model(args) -> models.ModelInstance:
    name = args.model
    if name == "kitaev":
        return models.kitaev_chain(args.mu, args.size)
    if name == "ssh":
        return models.ssh_chain(args.t1, args.t2, args.size)
    if name == "qwz":
        return models.qwz_model(args.m, args.size)
    raise OutOfRange(f"unknown model {name!r}")


def _instance(args):
    if getattr(args, "input", None):
        return load_operators(args.input), {"model": "file"}
    inst = _build_model(args)
    return inst.pairing, inst.metadata


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _emit(rows, fmt, path):
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, extrasaction="ignore",
                           lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow(r)
        text = buf.getvalue()
    elif fmt == "jsonl":
        text = "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows)
    else:
        cols = [c for c in CSV_COLUMNS if any(str(r.get(c, "")) for r in rows)]
        widths = {c: max(len(c), *(len(str(r.get(c, ""))) for r in rows))
                  for c in cols}
        lines = ["  ".join(c.ljust(widths[c]) for c in cols)]
        for r in rows:
            lines.append("  ".join(str(r.get(c, "")).ljust(widths[c])
                                   for c in cols))
        text = "\n".join(lines) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_classify(args):
    cls = classify(args.j, args.d)
    print(f"{cls.group.value}, pairing: {cls.pairing_kind.value}")
    return 0


def _cmd_invariant(args):
    data, meta = _instance(args)
    rows = evaluate(data, args.method, args.kappa, args.rho, metadata=meta)
    _emit(rows, args.format, args.output)
    bad = [r for r in rows if r["error"]]
    values = {r["value"] for r in rows if r["value"] != ""}
    if bad or (args.method == "all" and len(values) > 1):
        return 2
    return 0


def _sweep_point(args, value):
    patched = argparse.Namespace(**vars(args))
    setattr(patched, args.param, value)
    try:
        inst = _build_model(patched)
        return evaluate(inst.pairing, args.method, args.kappa, args.rho,
                        metadata=inst.metadata)
    except SkewlocError as exc:
        return [{
            "model": args.model, "params": f"{args.param}={value}",
            "j": "", "d": "", "method": args.method, "kappa": "", "rho": "",
            "admissible": "", "g": "", "localizer_gap": "", "value": "",
            "value_mod2": "", "error": f"{type(exc).__name__}: {exc}",
        }]


def _thread_count():
    env = os.environ.get("SKEWLOC_THREADS")
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def _cmd_sweep(args):
    values = np.linspace(args.start, args.stop, args.steps)
    with ThreadPoolExecutor(max_workers=_thread_count()) as pool:
        results = list(pool.map(lambda v: _sweep_point(args, float(v)), values))
    rows = [r for rs in results for r in rs]
    _emit(rows, args.format, args.output)
    return 0


def _cmd_plateau(args):
    data, meta = _instance(args)
    kappa, rho, bounds = _resolve_kappa_rho(data, args.kappa, args.rho)
    kappa_grid = [kappa * f for f in (0.6, 0.7, 0.8, 0.9, 1.0)]
    rho_grid = [nudge_rho(data, rho * f) for f in (1.0, 1.25, 1.5, 1.75, 2.0)]
    method = "det" if args.method in ("det", "all") else "pfaffian"
    result = plateau_scan(data, kappa_grid, rho_grid, method=method)
    rows = []
    for p in result.points:
        rows.append({
            "model": meta.get("model", ""),
            "params": ";".join(f"{k}={v}" for k, v in sorted(meta.items())
                               if k != "model"),
            "j": data.cls.j, "d": data.cls.d, "method": method,
            "kappa": f"{p.kappa:.6g}", "rho": f"{p.rho:.6g}",
            "admissible": p.admissible,
            "g": f"{data.gap:.6g}",
            "localizer_gap": "" if p.localizer_gap is None
                             else f"{p.localizer_gap:.6g}",
            "value": "" if p.value is None else p.value,
            "value_mod2": "" if p.value is None else (1 - p.value) // 2,
            "error": p.error or "",
        })
    _emit(rows, args.format, args.output)
    print(f"plateau: constant_sign={result.constant_sign} sign={result.sign}",
          file=sys.stderr)
    return 0 if result.constant_sign else 2


def _cmd_export(args):
    data = _build_model(args).pairing
    save_operators(args.output, data)
    print(f"wrote {args.output}")
    return 0


def _cmd_selfcheck(args):
    failures = []

    def check(label, fn):
        t0 = time.perf_counter()
        try:
            fn()
            print(f"  ok   {label} ({time.perf_counter() - t0:.1f}s)")
        except Exception as exc:  # noqa: BLE001 - reported, drives exit code
            failures.append(label)
            print(f"  FAIL {label}: {type(exc).__name__}: {exc}")

    def pfaffian_identities():
        rng = np.random.default_rng(7)
        for _ in range(50):
            n = 2 * int(rng.integers(1, 6))
            A = rng.normal(size=(n, n))
            A = A - A.T
            B = rng.normal(size=(n, n))
            if abs(np.linalg.det(B)) < 1e-6 or linalg.gap(A) < 1e-6:
                continue
            lhs = linalg.pfaffian_sign(B.T @ A @ B)
            rhs = int(np.sign(np.linalg.det(B))) * linalg.pfaffian_sign(A)
            assert lhs == rhs, "Pf(B^T A B) = det(B) Pf(A) failed"

    def kitaev_agreement():
        for mu, want in ((0.0, -1), (2.0, +1)):
            inst = models.kitaev_chain(mu, 25)
            rows = evaluate(inst.pairing, "all", metadata=inst.metadata)
            vals = {r["value"] for r in rows}
            assert vals == {want}, f"methods disagree at mu={mu}: {vals}"

    def random_cells():
        for (j, d) in models.Z2_CELLS:
            data = models.random_pairing(j, d, seed=3)
            v = z2_index_via_flow(data, window_fraction=1.0)
            k = z2_index_kernel(data, window_fraction=1.0)
            assert v == k, f"flow/kernel mismatch in cell ({j},{d})"

    def root_invariance():
        from .flows import orientation_flow_pair
        from .symmetry import symmetry_root
        S = SymmetryOperator.identity(2)
        root = symmetry_root(S)
        assert np.allclose(root @ root, S.matrix)
        # Lagrangian projection: conj(P) = 1 - P, so i(1-2P) is real skew
        P = 0.5 * np.array([[1.0, -1.0j], [1.0j, 1.0]])
        assert orientation_flow_pair(P, np.eye(2), S) == +1

    print("selfcheck:")
    check("pfaffian identities", pfaffian_identities)
    check("kitaev method agreement", kitaev_agreement)
    check("flow/kernel agreement on all Z2 cells", random_cells)
    check("orientation-flow root law", root_invariance)
    if failures:
        print(f"{len(failures)} check(s) failed")
        return 2
    print("all checks passed")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # argparse exits with 2 by default; configuration errors are exit 1
        self.print_usage(sys.stderr)
        raise SystemExit(self._config_error(message))

    @staticmethod
    def _config_error(message):
        print(f"error: {message}", file=sys.stderr)
        return 1


def _add_model_args(p, with_input=True):
    p.add_argument("--model", choices=("kitaev", "ssh", "qwz"))
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=1.0)
    p.add_argument("--t2", type=float, default=0.3)
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--size", type=int, default=20, help="lattice half-width L")
    if with_input:
        p.add_argument("--input", help="operator bundle file instead of --model")


def _add_common_args(p):
    p.add_argument("--kappa", default="auto")
    p.add_argument("--rho", default="auto")
    p.add_argument("--method", default="all",
                   choices=("pfaffian", "det", "flow", "kernel", "all"))
    p.add_argument("--output", default=None)
    p.add_argument("--format", default="pretty",
                   choices=("csv", "jsonl", "pretty"))


def build_parser():
    parser = _Parser(prog="skewloc",
                     description="Index pairings via spectral localizers")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("classify", help="group and pairing kind of a cell")
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.set_defaults(fn=_cmd_classify)

    p = sub.add_parser("invariant", help="compute an index")
    _add_model_args(p)
    _add_common_args(p)
    p.set_defaults(fn=_cmd_invariant)

    p = sub.add_parser("sweep", help="sweep one model parameter")
    _add_model_args(p, with_input=False)
    _add_common_args(p)
    p.add_argument("--param", required=True, choices=("mu", "t1", "t2", "m"))
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("plateau", help="scan a (kappa, rho) grid")
    _add_model_args(p)
    _add_common_args(p)
    p.set_defaults(fn=_cmd_plateau)

    p = sub.add_parser("export", help="write a model to a bundle file")
    _add_model_args(p, with_input=False)
    p.add_argument("--output", required=True)
    p.set_defaults(fn=_cmd_export)

    p = sub.add_parser("selfcheck", help="run the property suite")
    p.set_defaults(fn=_cmd_selfcheck)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.subcommand in ("invariant", "sweep", "plateau", "export") and \
            not getattr(args, "input", None) and args.model is None:
        print("error: --model (or --input) is required", file=sys.stderr)
        return 1
    try:
        return args.fn(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (FlowDisagreement, BoundViolation) as exc:
        print(f"cross-check failed: {exc}", file=sys.stderr)
        return 2
    except SkewlocError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
