"""Command-line front end.

Every leaf subcommand accepts --format, --cache-dir, --threads, --seed and
--verify.  Exit status: 0 success, 2 input error, 3 failed verification.
"""

from __future__ import annotations

import argparse
import cmath
import csv
import hashlib
import io
import json
import os
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import characters as ch
from . import current_algebra as ca
from . import koszul as kz
from . import operators as ops
from . import reduction as rd
from .series import FugacitySpec, SeriesError, TruncatedSeries, rational_str

EXIT_INPUT = 2
EXIT_VERIFY = 3


class InputError(Exception):
    pass


class VerifyError(Exception):
    pass


# ---------------------------------------------------------------------------
# parsing helpers


def _pair(text: str) -> tuple[int, int]:
    try:
        a, b = (int(x) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected 'a,b', got {text!r}") from exc
    return a, b


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _matrix(text: str, dim: int) -> list[list]:
    named = ca.gl_basis(dim)
    if text in named:
        return named[text]
    rows = [[Fraction(x) for x in r.split(",")] for r in text.split(";")]
    if len(rows) != dim or any(len(r) != dim for r in rows):
        raise InputError(f"matrix {text!r} is not {dim}x{dim}")
    return rows


def _a_element(text: str) -> ca.AElement:
    """Parse a product like 'z1^2*w2*omega' (or '1')."""
    exps = {"z1": 0, "z2": 0, "w1": 0, "w2": 0}
    omega = False
    for factor in text.replace(" ", "").split("*"):
        if factor in ("", "1"):
            continue
        name, _, power = factor.partition("^")
        if name == "omega":
            omega = True
            continue
        if name not in exps:
            raise InputError(f"unknown A2 generator {name!r}")
        exps[name] += int(power or 1)
    return ca.AElement.monomial(exps["z1"], exps["z2"], exps["w1"], exps["w2"], omega=omega)


def _fmt_num(x) -> str:
    if isinstance(x, complex):
        return f"{x.real:.15g}{x.imag:+.15g}j"
    if isinstance(x, float):
        return f"{x:.15g}"
    if isinstance(x, (int, Fraction)):
        return rational_str(x)
    return str(x)


# ---------------------------------------------------------------------------
# output


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k) if not isinstance(k, str) else k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (Fraction, complex, float)):
        return _fmt_num(x)
    return x


def _emit_series(s: TruncatedSeries, fmt: str, out) -> None:
    if fmt == "json":
        out.write(s.dumps() + "\n")
        return
    names = [v.name for v in s.spec.variables]
    rows = []
    for exps, c in s.items():
        rows.append([rational_str(exps[n]) for n in names] + [rational_str(c)])
    if fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(names + ["coeff"])
        w.writerows(rows)
    else:
        for r in rows:
            mono = " ".join(f"{n}^{v}" for n, v in zip(names, r[:-1]) if v != "0") or "1"
            out.write(f"{r[-1]}\t{mono}\n")


def _emit_table(rows: list[dict], fmt: str, out) -> None:
    rows = [{k: _jsonable(v) for k, v in r.items()} for r in rows]
    if fmt == "json":
        out.write(json.dumps(rows, indent=1) + "\n")
        return
    header = list(rows[0]) if rows else []
    if fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([r[h] if not isinstance(r[h], (list, dict)) else json.dumps(r[h]) for h in header])
    else:
        for r in rows:
            out.write("  ".join(f"{k}={v}" for k, v in r.items()) + "\n")


def _emit_record(rec: dict, fmt: str, out) -> None:
    rec = _jsonable(rec)
    if fmt == "json":
        out.write(json.dumps(rec, indent=1, sort_keys=True) + "\n")
    elif fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["key", "value"])
        for k in sorted(rec):
            v = rec[k]
            w.writerow([k, v if not isinstance(v, (list, dict)) else json.dumps(v, sort_keys=True)])
    else:
        for k in sorted(rec):
            v = rec[k]
            out.write(f"{k}: {v if not isinstance(v, (list, dict)) else json.dumps(v, sort_keys=True)}\n")


# ---------------------------------------------------------------------------
# cache


class Cache:
    def __init__(self, directory: str | None):
        directory = os.environ.get("TWISTCHAR_CACHE") or directory
        self.dir = Path(directory) if directory else None
        if self.dir:
            self.dir.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def key(op: str, params: dict) -> str:
        blob = json.dumps({"op": op, "params": _jsonable(params)}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()

    def get(self, op: str, params: dict):
        if not self.dir:
            return None
        path = self.dir / f"{self.key(op, params)}.json"
        if path.exists():
            return json.loads(path.read_text())
        return None

    def put(self, op: str, params: dict, payload) -> None:
        if not self.dir:
            return
        path = self.dir / f"{self.key(op, params)}.json"
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(payload))
        tmp.replace(path)

    def series(self, op: str, params: dict, compute) -> TruncatedSeries:
        hit = self.get(op, params)
        if hit is not None:
            return TruncatedSeries.from_json(hit)
        s = compute()
        self.put(op, params, s.to_json())
        return s


# ---------------------------------------------------------------------------
# subcommands


def _free_spec(args, flavors) -> FugacitySpec:
    ranges = {"q1": (0, args.q_max), "q2": (0, args.q_max)}
    for n in flavors.names:
        ranges[n] = (-args.z_max, args.z_max)
    ranges["u"] = (0, args.u_max)
    return FugacitySpec.build(ranges, mode_vars=("q1", "q2"), mode_bound=args.q_max)


def cmd_char_free(args, cache, out):
    flavors = ch.FlavorWeights.uniform(args.dim_v)
    spec = _free_spec(args, flavors)
    params = {"dim_v": args.dim_v, "spec": spec.to_json(), "method": args.method}
    s = cache.series("char free", params, lambda: ch.free_character(flavors, spec, args.method))
    if args.verify:
        other = "pe" if args.method == "lattice" else "lattice"
        if ch.free_character(flavors, spec, other) != s:
            raise VerifyError("lattice and plethystic constructions disagree")
        if ops.brute_supercharacter(spec, flavors) != s:
            raise VerifyError("free character disagrees with the operator enumeration")
    _emit_series(s, args.format, out)


def cmd_char_su2(args, cache, out):
    q = args.q_max
    spec = FugacitySpec.build({"p": (-q, q), "q": (0, q), "z": (-args.z_max, args.z_max), "u": (0, args.u_max)},
                              mode_vars=("q",), mode_bound=q)
    params = {"dim_v": args.dim_v, "spec": spec.to_json()}
    s = cache.series("char su2", params, lambda: ch.su2_character(args.dim_v, spec))
    if args.verify:
        flavors = ch.FlavorWeights.uniform(args.dim_v)
        target = _free_spec(args, flavors)
        if ch.change_to_u2(s, target) != ch.free_character(flavors, target):
            raise VerifyError("SU(2) form does not reproduce the free character")
    _emit_series(s, args.format, out)


def cmd_char_potential(args, cache, out):
    n, q = args.degree, args.q_max
    spec = FugacitySpec.build({"p": (-q, q), "q": (0, q), "z": (0, args.z_max)}, mode_vars=("q",), mode_bound=q)
    params = {"n": n, "spec": spec.to_json()}
    s = cache.series("char potential", params, lambda: ch.potential_character(n, spec))
    if args.verify:
        w = kz.Superpotential.parse(f"x^{n + 1}/{n + 1}")
        table = kz.cohomology_table(w, q, args.z_max, threads=args.threads)
        if table.euler_series(spec) != s:
            raise VerifyError("potential character disagrees with the Koszul Euler characteristics")
    _emit_series(s, args.format, out)


def cmd_char_gamma(args, cache, out):
    params = ch.ComplexParams(args.q1, args.q2, args.z)
    value = ch.elliptic_gamma_numeric(params)
    rec = {"gamma": value}
    if args.verify:
        rng = random.Random(args.seed)
        worst = 0.0
        points = [(args.q1, args.q2, args.z)]
        for _ in range(4):
            r1, r2 = rng.uniform(0.05, 0.4), rng.uniform(0.05, 0.4)
            t1, t2, tz = (rng.uniform(0, 6.283185307179586) for _ in range(3))
            points.append((cmath.rect(r1, t1), cmath.rect(r2, t2), cmath.rect(rng.uniform(0.5, 1.5), tz)))
        for q1, q2, z in points:
            lhs = ch.elliptic_gamma_numeric(ch.ComplexParams(q1, q2, q1 * z))
            rhs = ch.theta0(z, q2) * ch.elliptic_gamma_numeric(ch.ComplexParams(q1, q2, z))
            worst = max(worst, abs(lhs - rhs) / abs(rhs))
        rec["shift_identity_max_rel_error"] = worst
        if worst > 1e-10:
            raise VerifyError(f"shift identity violated: relative error {worst:.3e}")
    _emit_record(rec, args.format, out)


def cmd_jacobi(args, cache, out):
    weights = [int(x) for x in args.weights.split(",")] if args.weights else None
    try:
        w = kz.Superpotential.parse(args.potential, weights=weights)
    except Exception as exc:
        raise InputError(str(exc)) from exc
    params = {"potential": str(w), "weights": list(w.weights), "max_weight": args.max_weight, "z_max": args.z_max}
    rows = cache.get("jacobi", params)
    if rows is None:
        table = kz.cohomology_table(w, args.max_weight, args.z_max, threads=args.threads)
        rows = [r for r in table.rows() if r["cohomology_dim"] or args.all]
        if args.verify:
            for s in table.sectors():
                if table.euler(s) != table.chain_euler(s):
                    raise VerifyError(f"Euler characteristic mismatch in sector {s}")
        cache.put("jacobi", params, rows)
    _emit_table(rows, args.format, out)


def cmd_operators_enumerate(args, cache, out):
    monos = ops.enumerate_weight_space(args.weight, (args.z_min, args.z_max), (args.u_min, args.u_max), args.dim_v)
    if args.verify:
        again = ops.enumerate_weight_space(args.weight, (args.z_min, args.z_max), (args.u_min, args.u_max),
                                           args.dim_v, traversal="reversed")
        if again != monos:
            raise VerifyError("enumeration depends on traversal order")
    if args.format == "text":
        for m in monos:
            out.write(str(m) + "\n")
    else:
        rows = [{"monomial": str(m), "q1": m.q_weights()[0], "q2": m.q_weights()[1],
                 "z": m.z_charge()[0], "u": m.u_charge()} for m in monos]
        _emit_table(rows, args.format, out)


def cmd_current_bracket(args, cache, out):
    dim = {"gl1": 1, "gl2": 2, "gl3": 3}[args.algebra]
    x, y = _matrix(args.X, dim), _matrix(args.Y, dim)
    rep = ca.current_bracket_report(x, y, args.m, args.n)
    if args.verify and rep["linear"] != rep["predicted_linear"]:
        raise VerifyError("hbar^1 part differs from the single-contraction prediction")
    rec = {
        "linear": [{"beta_mode": list(k[0]), "gamma_mode": list(k[1]), "matrix": v}
                   for k, v in sorted(rep["linear"].items())],
        "central": rep["central"],
        "closes_on_current": rep["closes"],
        "closing_mode": list(rep["closing_mode"]) if rep["closing_mode"] else None,
        "trace_xy": rep["trace_xy"],
    }
    _emit_record(rec, args.format, out)


def cmd_current_ell3(args, cache, out):
    dim = {"gl1": 1, "gl2": 2, "gl3": 3}[args.algebra]
    a, b, c = (_a_element(t) for t in (args.a, args.b, args.c))
    x, y, z = (_matrix(t, dim) for t in (args.X, args.Y, args.Z))
    theta = ca.CubicInvariant.trace_form()
    _emit_record({"ell3": ca.ell3(a, b, c, x, y, z, theta), "theta": theta(x, y, z)}, args.format, out)


def cmd_current_cohomology(args, cache, out):
    dims = ca.a2_cohomology(args.max_weight)
    if args.verify:
        for (p1, p2), (h0, h1) in dims.items():
            want0 = int(p1 >= 0 and p2 >= 0)
            want1 = int(p1 <= -1 and p2 <= -1)
            if (h0, h1) != (want0, want1):
                raise VerifyError(f"unexpected cohomology at weight {(p1, p2)}")
    rows = [{"p1": w[0], "p2": w[1], "h0": h[0], "h1": h[1]} for w, h in sorted(dims.items())]
    _emit_table(rows, args.format, out)


def _reduce_spec(args) -> FugacitySpec:
    return FugacitySpec.build({"q": (0, args.q_max), "z": (-args.z_max, args.z_max), "u": (0, args.u_max)},
                              mode_vars=("q",), mode_bound=args.q_max)


def cmd_reduce_t2(args, cache, out):
    spec = _reduce_spec(args)
    s = rd.reduced_character(rd.TargetSpectrum.torus(args.dim_v), spec)
    if args.verify and s != TruncatedSeries.one(spec):
        raise VerifyError("torus reduction is not 1")
    _emit_series(s, args.format, out)


def cmd_reduce_p1(args, cache, out):
    spec = _reduce_spec(args)
    target = rd.TargetSpectrum.projective_line(args.bundle_degree, args.dim_v)
    s = rd.reduced_character(target, spec)
    if args.verify:
        h0 = max(args.bundle_degree + 1, 0)
        if args.bundle_degree >= 0 and s != rd.one_dimensional_character(h0 * args.dim_v, spec):
            raise VerifyError("P^1 reduction differs from the one-dimensional character")
    _emit_series(s, args.format, out)


def cmd_reduce_surface(args, cache, out):
    override = None
    if (args.h0 is None) != (args.h1 is None):
        raise InputError("--h0 and --h1 must be given together")
    if args.h0 is not None:
        override = (args.h0, args.h1)
    h0, h1 = rd.surface_cohomology(args.genus, args.degree, override)
    _emit_record({"h0": h0, "h1": h1, "euler": h0 - h1}, args.format, out)


def cmd_reduce_plane(args, cache, out):
    params = rd.DeformedComplexParams(args.eps_plus, args.eps_minus, args.jets, args.sign)
    res = rd.hodge_derham_dims(params)
    rec = {
        "by_degree": {str(k): v for k, v in res["by_degree"].items()},
        "by_bidegree": None if res["by_bidegree"] is None else
        {f"{k[0]},{k[1]}": v for k, v in res["by_bidegree"].items()},
        "total": res["total"],
    }
    _emit_record(rec, args.format, out)


def cmd_partition3d(args, cache, out):
    value = ch.partition3d_truncated(args.tau1, args.tau2, args.a_f, args.n_cutoff, args.mode_cutoff)
    _emit_record({"partial_product": value, "n_cutoff": args.n_cutoff, "mode_cutoff": args.mode_cutoff},
                 args.format, out)


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--cache-dir", default=None)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--verify", action="store_true", help="run the independent cross-check")

    p = argparse.ArgumentParser(prog="twistchar", description="Characters of holomorphically twisted theories.")
    sub = p.add_subparsers(dest="command", required=True)

    def leaf(parent, name, func, help_text):
        sp = parent.add_parser(name, parents=[common], help=help_text)
        sp.set_defaults(func=func)
        return sp

    def box(sp, q=4, z=4, u=2):
        sp.add_argument("--q-max", type=int, default=q)
        sp.add_argument("--z-max", type=int, default=z)
        sp.add_argument("--u-max", type=int, default=u)

    char = sub.add_parser("char", help="characters").add_subparsers(dest="which", required=True)
    sp = leaf(char, "free", cmd_char_free, "free beta-gamma character in (q1, q2, z, u)")
    sp.add_argument("--dim-v", type=int, default=1)
    sp.add_argument("--method", choices=("lattice", "pe"), default="lattice")
    box(sp)
    sp = leaf(char, "su2", cmd_char_su2, "free character in (p, q, z, u)")
    sp.add_argument("--dim-v", type=int, default=1)
    box(sp)
    sp = leaf(char, "potential", cmd_char_potential, "character with W = x^(N+1)/(N+1)")
    sp.add_argument("--degree", type=int, default=2, help="N")
    sp.add_argument("--q-max", type=int, default=3)
    sp.add_argument("--z-max", type=int, default=8)
    sp = leaf(char, "gamma", cmd_char_gamma, "numeric elliptic gamma function")
    sp.add_argument("--q1", type=_complex, default=0.2 + 0.1j)
    sp.add_argument("--q2", type=_complex, default=0.15 - 0.05j)
    sp.add_argument("--z", type=_complex, default=0.5 + 0.2j)

    sp = leaf(sub, "jacobi", cmd_jacobi, "cohomology of the interaction differential")
    sp.add_argument("--potential", required=True)
    sp.add_argument("--weights", default=None, help="comma-separated variable weights")
    sp.add_argument("--max-weight", type=int, default=3)
    sp.add_argument("--z-max", type=int, default=6)
    sp.add_argument("--all", action="store_true", help="include zero-dimensional entries")

    opp = sub.add_parser("operators", help="local operators").add_subparsers(dest="which", required=True)
    sp = leaf(opp, "enumerate", cmd_operators_enumerate, "list monomials of one weight")
    sp.add_argument("--weight", type=_pair, required=True)
    sp.add_argument("--z-min", type=int, default=-4)
    sp.add_argument("--z-max", type=int, default=4)
    sp.add_argument("--u-min", type=int, default=0)
    sp.add_argument("--u-max", type=int, default=2)
    sp.add_argument("--dim-v", type=int, default=1)

    cur = sub.add_parser("current", help="current algebra").add_subparsers(dest="which", required=True)
    sp = leaf(cur, "bracket", cmd_current_bracket, "bracket of two currents")
    sp.add_argument("--algebra", choices=("gl1", "gl2", "gl3"), default="gl2")
    sp.add_argument("--X", required=True)
    sp.add_argument("--Y", required=True)
    sp.add_argument("--m", type=_pair, default=(0, 0))
    sp.add_argument("--n", type=_pair, default=(0, 0))
    sp = leaf(cur, "ell3", cmd_current_ell3, "ternary bracket")
    sp.add_argument("--algebra", choices=("gl1", "gl2", "gl3"), default="gl2")
    for name, default in (("--a", "omega"), ("--b", "z1"), ("--c", "z2")):
        sp.add_argument(name, default=default)
    for name in ("--X", "--Y", "--Z"):
        sp.add_argument(name, default="I")
    sp = leaf(cur, "cohomology", cmd_current_cohomology, "H^0 and H^1 of A2 by torus weight")
    sp.add_argument("--max-weight", type=int, default=2)

    red = sub.add_parser("reduce", help="dimensional reduction").add_subparsers(dest="which", required=True)
    sp = leaf(red, "t2", cmd_reduce_t2, "reduction on an elliptic curve")
    sp.add_argument("--dim-v", type=int, default=1)
    box(sp, 6, 6, 3)
    sp = leaf(red, "p1", cmd_reduce_p1, "reduction on P^1 with O(n)")
    sp.add_argument("--bundle-degree", type=int, required=True)
    sp.add_argument("--dim-v", type=int, default=1)
    box(sp, 6, 6, 3)
    sp = leaf(red, "surface", cmd_reduce_surface, "line bundle cohomology on a curve")
    sp.add_argument("--genus", type=int, required=True)
    sp.add_argument("--degree", type=int, required=True)
    sp.add_argument("--h0", type=int, default=None)
    sp.add_argument("--h1", type=int, default=None)
    sp = leaf(red, "plane", cmd_reduce_plane, "deformed Dolbeault complex of the plane")
    sp.add_argument("--eps-plus", type=_rational, default=Fraction(1))
    sp.add_argument("--eps-minus", type=_rational, default=Fraction(1))
    sp.add_argument("--jets", type=int, default=3)
    sp.add_argument("--sign", choices=("+", "-"), default="+")

    sp = leaf(sub, "partition3d", cmd_partition3d, "raw truncated winding-mode product")
    sp.add_argument("--tau1", type=_complex, default=0.3 + 1j)
    sp.add_argument("--tau2", type=_complex, default=0.1 + 1.2j)
    sp.add_argument("--a-f", type=_complex, default=0.2 + 0.1j)
    sp.add_argument("--n-cutoff", type=int, default=4)
    sp.add_argument("--mode-cutoff", type=int, default=2)
    return p


def main(argv: list[str] | None = None, stdout=None) -> int:
    out = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return EXIT_INPUT
    buf = io.StringIO()
    try:
        cache = Cache(args.cache_dir)
        args.func(args, cache, buf)
    except VerifyError as exc:
        out.write(buf.getvalue())
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (InputError, SeriesError, ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out.write(buf.getvalue())
    return 0


if __name__ == "__main__":
    sys.exit(main())
