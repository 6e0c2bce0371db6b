"""Derived functions on punctured C^2, the residue pairing, the cubic
central extension, and the mode Weyl algebra of the beta-gamma system.

A_2* is generated by z1, z2, w1, w2 (with w_i = conj(z_i)/|z|^2) subject to
z1 w1 + z2 w2 = 1, and an odd class omega with omega^2 = 0.  Elements are
stored as two maps from exponent tuples (a, b, c, d) of z1^a z2^b w1^c w2^d
to rationals: the degree-0 part and the coefficient of omega.

Normal form: no stored monomial has both a > 0 and c > 0; z1 w1 is rewritten
as 1 - z2 w2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .koszul import SparseMatrixQ, exact_rank
from .series import as_rational

Mono = tuple  # (a, b, c, d)


def _reduce(mono: Mono) -> dict:
    """Normal form of z1^a z2^b w1^c w2^d as {mono: coeff}."""
    a, b, c, d = mono
    m = min(a, c)
    if m == 0:
        return {mono: 1}
    # (z1 w1)^m = (1 - z2 w2)^m
    return {(a - m, b + j, c - m, d + j): (-1) ** j * math.comb(m, j) for j in range(m + 1)}


def _accumulate(target: dict, mono: Mono, coeff) -> None:
    if not coeff:
        return
    for m, c in _reduce(mono).items():
        v = target.get(m, 0) + coeff * c
        if v:
            target[m] = as_rational(v)
        else:
            target.pop(m, None)


class AElement:
    __slots__ = ("even", "odd")

    def __init__(self, even: Mapping | None = None, odd: Mapping | None = None):
        self.even: dict = {}
        self.odd: dict = {}
        for m, c in (even or {}).items():
            _accumulate(self.even, tuple(m), as_rational(c))
        for m, c in (odd or {}).items():
            _accumulate(self.odd, tuple(m), as_rational(c))

    # constructors -------------------------------------------------------
    @classmethod
    def monomial(cls, a=0, b=0, c=0, d=0, omega=False, coeff=1) -> "AElement":
        part = {(a, b, c, d): coeff}
        return cls(odd=part) if omega else cls(even=part)

    @classmethod
    def const(cls, c=1) -> "AElement":
        return cls.monomial(coeff=c)

    @classmethod
    def z(cls, i: int) -> "AElement":
        return cls.monomial(*((1, 0) if i == 1 else (0, 1)), 0, 0)

    @classmethod
    def w(cls, i: int) -> "AElement":
        return cls.monomial(0, 0, *((1, 0) if i == 1 else (0, 1)))

    @classmethod
    def omega(cls) -> "AElement":
        return cls.monomial(omega=True)

    # structure ----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.even and not self.odd

    def degree(self) -> int | None:
        """0 or 1 for homogeneous elements, None for zero or mixed ones."""
        if self.even and not self.odd:
            return 0
        if self.odd and not self.even:
            return 1
        return None

    def components(self) -> list[tuple[int, "AElement"]]:
        out = []
        if self.even:
            out.append((0, AElement(even=self.even)))
        if self.odd:
            out.append((1, AElement(odd=self.odd)))
        return out

    def __eq__(self, other):
        return isinstance(other, AElement) and self.even == other.even and self.odd == other.odd

    def __hash__(self):
        return hash((frozenset(self.even.items()), frozenset(self.odd.items())))

    def __add__(self, other):
        out = AElement(self.even, self.odd)
        for m, c in other.even.items():
            _accumulate(out.even, m, c)
        for m, c in other.odd.items():
            _accumulate(out.odd, m, c)
        return out

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k) -> "AElement":
        k = as_rational(k)
        return AElement({m: k * c for m, c in self.even.items()}, {m: k * c for m, c in self.odd.items()})

    def __mul__(self, other):
        if not isinstance(other, AElement):
            return self.scale(other)
        return a2_multiply(self, other)

    __rmul__ = scale

    def __repr__(self):
        def fmt(part, suffix):
            return [f"{c}*z1^{m[0]}z2^{m[1]}w1^{m[2]}w2^{m[3]}{suffix}" for m, c in sorted(part.items())]
        terms = fmt(self.even, "") + fmt(self.odd, "*omega")
        return "AElement(" + (" + ".join(terms) or "0") + ")"


def _mono_mul(x: Mono, y: Mono) -> Mono:
    return tuple(i + j for i, j in zip(x, y))


def a2_multiply(x: AElement, y: AElement) -> AElement:
    """Graded-commutative product; omega . omega = 0."""
    even: dict = {}
    odd: dict = {}
    for mx, cx in x.even.items():
        for my, cy in y.even.items():
            _accumulate(even, _mono_mul(mx, my), cx * cy)
        for my, cy in y.odd.items():
            _accumulate(odd, _mono_mul(mx, my), cx * cy)
    for mx, cx in x.odd.items():
        for my, cy in y.even.items():
            _accumulate(odd, _mono_mul(mx, my), cx * cy)
    out = AElement()
    out.even, out.odd = even, odd
    return out


def a2_differential(x: AElement) -> AElement:
    """dbar z_i = 0, dbar w1 = z2 omega, dbar w2 = -z1 omega, dbar omega = 0."""
    odd: dict = {}
    for (a, b, c, d), k in x.even.items():
        if c:
            _accumulate(odd, (a, b + 1, c - 1, d), k * c)
        if d:
            _accumulate(odd, (a + 1, b, c, d - 1), -k * d)
    out = AElement()
    out.odd = odd
    return out


OMEGA_LIE_COEFF = -2  # L_{d/dz_i} omega = -2 w_i omega, from omega ~ |z|^-4


def lie_derivative(x: AElement, i: int) -> AElement:
    """Holomorphic derivative d/dz_i: z_j -> delta_ij, w_j -> -w_i w_j,
    omega -> -2 w_i omega."""
    if i not in (1, 2):
        raise ValueError("i must be 1 or 2")
    wi = (0, 0, 1, 0) if i == 1 else (0, 0, 0, 1)
    even: dict = {}
    odd: dict = {}

    def deriv(part, target, extra):
        for mono, k in part.items():
            a = mono[i - 1]
            if a:
                lowered = list(mono)
                lowered[i - 1] -= 1
                _accumulate(target, tuple(lowered), k * a)
            wcoef = extra - (mono[2] + mono[3])
            if wcoef:
                _accumulate(target, _mono_mul(mono, wi), k * wcoef)

    deriv(x.even, even, 0)
    deriv(x.odd, odd, OMEGA_LIE_COEFF)
    out = AElement()
    out.even, out.odd = even, odd
    return out


def torus_weight(mono: Mono, omega: bool = False) -> tuple[int, int]:
    a, b, c, d = mono
    s = 1 if omega else 0
    return (a - c - s, b - d - s)


# ---------------------------------------------------------------------------
# residue


def diagonal_residue(b: int) -> Fraction:
    """residue((z2 w2)^b omega), from the dbar-exactness recursion
    (b + 2) c_{b+1} = (b + 1) c_b with c_0 = 1."""
    c = Fraction(1)
    for j in range(b):
        c = c * (j + 1) / (j + 2)
    return c


def residue(x: AElement) -> int | Fraction:
    """Residue pairing on the omega part, normalized so residue(omega) = 1.

    Only torus weight (-1, -1) contributes; in normal form such monomials are
    (z2 w2)^b omega.
    """
    if x.even:
        raise ValueError("residue is defined on degree-1 elements")
    total = Fraction(0)
    for (a, b, c, d), k in x.odd.items():
        if a == c == 0 and b == d:
            total += k * diagonal_residue(b)
    return as_rational(total)


def symmetric_residue(a: int, b: int) -> Fraction:
    """a! b! / (a + b + 1)!, the value of residue(z1^a z2^b w1^a w2^b omega)."""
    return Fraction(math.factorial(a) * math.factorial(b), math.factorial(a + b + 1))


# ---------------------------------------------------------------------------
# cohomology


def _basis(weight: tuple[int, int], z_cut: int) -> list[Mono]:
    p1, p2 = weight
    a, c = max(p1, 0), max(-p1, 0)
    out = []
    for b in range(max(p2, 0), z_cut - a + 1):
        d = b - p2
        if d >= 0:
            out.append((a, b, c, d))
    return out


def _dbar_matrix(weight, p_cut: int, r_cut: int):
    src = _basis(weight, p_cut)
    coeff_weight = (weight[0] + 1, weight[1] + 1)
    tgt = _basis(coeff_weight, r_cut)
    index = {m: i for i, m in enumerate(tgt)}
    inside, outside = {}, {}
    out_index: dict = {}
    for j, m in enumerate(src):
        img = a2_differential(AElement.monomial(*m))
        for mono, k in img.odd.items():
            if mono in index:
                inside[(index[mono], j)] = k
            else:
                r = out_index.setdefault(mono, len(out_index))
                outside[(r, j)] = k
    full = dict(inside)
    for (r, j), k in outside.items():
        full[(len(tgt) + r, j)] = k
    return src, tgt, SparseMatrixQ(len(tgt) + len(out_index), len(src), full), \
        SparseMatrixQ(max(len(out_index), 1), len(src), outside)


def a2_cohomology(max_weight: int = 2, z_cut: int | None = None) -> dict:
    """{torus weight: (dim H^0, dim H^1)} for |p1|, |p2| <= max_weight.

    H^0 is computed on degree-0 elements of z-degree <= z_cut.  H^1 counts
    omega-classes with coefficient z-degree <= z_cut + 1 modulo the image of
    all degree-0 elements up to z-degree z_cut + 2.
    """
    p = z_cut if z_cut is not None else 2 * max_weight + 2
    out = {}
    for p1 in range(-max_weight, max_weight + 1):
        for p2 in range(-max_weight, max_weight + 1):
            w = (p1, p2)
            src, _, full, _ = _dbar_matrix(w, p, p + 1)
            h0 = len(src) - exact_rank(full) if src else 0
            src2, tgt2, full2, outside2 = _dbar_matrix(w, p + 2, p + 1)
            img_in = exact_rank(full2) - exact_rank(outside2) if src2 else 0
            h1 = len(tgt2) - img_in
            out[w] = (h0, h1)
    return out


# ---------------------------------------------------------------------------
# cubic invariants and the ternary bracket

Matrix = Sequence[Sequence]


def mat_mul(x: Matrix, y: Matrix) -> list[list]:
    n = len(x)
    return [[as_rational(sum(x[i][k] * y[k][j] for k in range(n))) for j in range(n)] for i in range(n)]


def mat_add(x: Matrix, y: Matrix, scale=1) -> list[list]:
    return [[as_rational(a + scale * b) for a, b in zip(r, s)] for r, s in zip(x, y)]


def mat_bracket(x: Matrix, y: Matrix) -> list[list]:
    return mat_add(mat_mul(x, y), mat_mul(y, x), -1)


def trace(x: Matrix):
    return as_rational(sum(x[i][i] for i in range(len(x))))


def mat_is_zero(x: Matrix) -> bool:
    return all(v == 0 for row in x for v in row)


def _unit(n, i, j):
    return [[1 if (r, c) == (i, j) else 0 for c in range(n)] for r in range(n)]


def gl_basis(n: int) -> dict[str, list[list]]:
    """Named matrices; for n = 2 also E, F, H and I."""
    out = {f"E{i + 1}{j + 1}": _unit(n, i, j) for i in range(n) for j in range(n)}
    if n == 2:
        out.update(E=_unit(2, 0, 1), F=_unit(2, 1, 0), H=[[1, 0], [0, -1]], I=[[1, 0], [0, 1]])
    return out


@dataclass(frozen=True)
class CubicInvariant:
    """A symmetric trilinear form on matrices."""

    form: Callable[[Matrix, Matrix, Matrix], object]

    def __call__(self, x, y, z):
        return as_rational(self.form(x, y, z))

    @classmethod
    def trace_form(cls) -> "CubicInvariant":
        """Symmetrized Tr_V(XYZ) = (Tr XYZ + Tr XZY) / 2."""
        return cls(lambda x, y, z: Fraction(trace(mat_mul(mat_mul(x, y), z)) + trace(mat_mul(mat_mul(x, z), y)), 2))

    @classmethod
    def zero(cls) -> "CubicInvariant":
        return cls(lambda x, y, z: 0)

    def on_basis(self, basis: Mapping[str, Matrix]) -> dict:
        names = list(basis)
        return {(a, b, c): self(basis[a], basis[b], basis[c]) for a in names for b in names for c in names}


def _wedge_residue(a: AElement, b: AElement, c: AElement) -> Fraction:
    """residue of a . db . dc with d = dz1 d/dz1 + dz2 d/dz2 for homogeneous inputs."""
    degs = [a.degree(), b.degree(), c.degree()]
    if None in degs or sum(degs) != 1:
        return Fraction(0)
    bc = lie_derivative(b, 1) * lie_derivative(c, 2) - lie_derivative(b, 2) * lie_derivative(c, 1)
    sign = -1 if degs[2] == 1 else 1  # dz_i from db passes an odd c
    return Fraction(residue(a * bc)) * sign


def ell3(a: AElement, b: AElement, c: AElement, x: Matrix, y: Matrix, z: Matrix,
         theta: CubicInvariant) -> int | Fraction:
    """theta(X, Y, Z) times the residue of a db dc (zero unless exactly one
    argument carries omega)."""
    t = theta(x, y, z)
    if not t:
        return 0
    total = Fraction(0)
    for _, pa in a.components():
        for _, pb in b.components():
            for _, pc in c.components():
                total += _wedge_residue(pa, pb, pc)
    return as_rational(t * total)


# ---------------------------------------------------------------------------
# Weyl algebra of sphere modes

BETA_KIND, GAMMA_KIND = 0, 1


def _word(factors: Mapping[tuple, int]) -> tuple:
    return tuple(sorted((k, e) for k, e in factors.items() if e))


class WeylElement:
    """Sum of normal-ordered words (all betas left of all gammas) times hbar^h.

    Generators are keys (kind, mode, flavor) with [beta_m^j, gamma_{n;i}] =
    hbar delta_mn delta_ij.  Terms map (word, h) -> coefficient.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping | None = None):
        self.terms: dict = {}
        for key, c in (terms or {}).items():
            c = as_rational(c)
            if c:
                self.terms[key] = self.terms.get(key, 0) + c
        self.terms = {k: v for k, v in self.terms.items() if v}

    @classmethod
    def generator(cls, kind: str, mode: tuple[int, int], flavor: int = 1) -> "WeylElement":
        if min(mode) < 0:
            raise ValueError("modes must be non-negative")
        k = BETA_KIND if kind == "beta" else GAMMA_KIND
        return cls({((((k, tuple(mode), flavor), 1),), 0): 1})

    @classmethod
    def scalar(cls, c, h: int = 0) -> "WeylElement":
        return cls({((), h): c})

    def __add__(self, other):
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return WeylElement(out)

    def scale(self, c) -> "WeylElement":
        return WeylElement({k: c * v for k, v in self.terms.items()})

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, WeylElement):
            return self.scale(other)
        out: dict = {}
        for (w1, h1), c1 in self.terms.items():
            for (w2, h2), c2 in other.terms.items():
                for (w, h), c in _word_product(w1, w2).items():
                    key = (w, h1 + h2 + h)
                    out[key] = out.get(key, 0) + c1 * c2 * c
        return WeylElement(out)

    def __eq__(self, other):
        return isinstance(other, WeylElement) and self.terms == other.terms

    def is_zero(self) -> bool:
        return not self.terms

    def hbar_part(self, h: int) -> "WeylElement":
        return WeylElement({k: v for k, v in self.terms.items() if k[1] == h})

    def hbar_degree(self) -> int:
        return max((k[1] for k in self.terms), default=-1)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for (w, h), c in sorted(self.terms.items()):
            gens = "*".join(
                f"{'b' if kd == BETA_KIND else 'g'}[{m[0]},{m[1]};{f}]" + (f"^{e}" if e > 1 else "")
                for (kd, m, f), e in w)
            parts.append(f"{c}" + (f"*hbar^{h}" if h else "") + (f"*{gens}" if gens else ""))
        return " + ".join(parts)


def _word_product(w1: tuple, w2: tuple) -> dict:
    """(B1 G1)(B2 G2) normal-ordered: G1 B2 = sum_r (-hbar)^|r|/r! (d_beta^r B2)(d_gamma^r G1)."""
    d1 = dict(w1)
    d2 = dict(w2)
    g1 = {k[1:]: e for k, e in d1.items() if k[0] == GAMMA_KIND}
    b2 = {k[1:]: e for k, e in d2.items() if k[0] == BETA_KIND}
    shared = sorted(set(g1) & set(b2))
    # each pattern: (contractions per shared key, hbar power, coefficient)
    patterns = [({}, 0, Fraction(1))]
    for key in shared:
        nxt = []
        for removed, h, c in patterns:
            eg, eb = g1[key], b2[key]
            for r in range(min(eg, eb) + 1):
                coef = Fraction((-1) ** r * math.perm(eg, r) * math.perm(eb, r), math.factorial(r))
                rem = dict(removed)
                rem[key] = r
                nxt.append((rem, h + r, c * coef))
        patterns = nxt
    out: dict = {}
    for removed, h, c in patterns:
        total: dict = {}
        for k, e in d1.items():
            total[k] = total.get(k, 0) + e
        for k, e in d2.items():
            total[k] = total.get(k, 0) + e
        for key, r in removed.items():
            total[(GAMMA_KIND,) + key] -= r
            total[(BETA_KIND,) + key] -= r
        w = _word(total)
        out[(w, h)] = out.get((w, h), 0) + c
    return out


def weyl_commutator(x: WeylElement, y: WeylElement) -> WeylElement:
    return x * y - y * x


def current(x: Matrix, n: tuple[int, int]) -> WeylElement:
    """J_X(n) = sum_{0 <= k <= n} sum_ij X_ij beta^j_k gamma_{n-k; i}."""
    if min(n) < 0:
        raise ValueError("mode components must be non-negative")
    dim = len(x)
    out = WeylElement()
    for k1 in range(n[0] + 1):
        for k2 in range(n[1] + 1):
            for i in range(dim):
                for j in range(dim):
                    if x[i][j]:
                        term = WeylElement.generator("beta", (k1, k2), j + 1) * \
                            WeylElement.generator("gamma", (n[0] - k1, n[1] - k2), i + 1)
                        out = out + term.scale(x[i][j])
    return out


def bilinear_part(e: WeylElement, dim: int) -> dict:
    """{(beta mode, gamma mode): M} for terms M_ij beta^j gamma_i; raises on
    anything that is not a single beta times a single gamma."""
    out: dict = {}
    for (w, _), c in e.terms.items():
        if len(w) != 2 or w[0][1] != 1 or w[1][1] != 1 or w[0][0][0] != BETA_KIND or w[1][0][0] != GAMMA_KIND:
            raise ValueError(f"not a beta-gamma bilinear: {w}")
        (_, bm, j), (_, gm, i) = w[0][0], w[1][0]
        mat = out.setdefault((bm, gm), [[0] * dim for _ in range(dim)])
        mat[i - 1][j - 1] = as_rational(mat[i - 1][j - 1] + c)
    return out


def _mode_sub(m, n):
    return (m[0] - n[0], m[1] - n[1])


def predicted_linear_part(x: Matrix, y: Matrix, m, n) -> dict:
    """Single-contraction prediction for the hbar^1 part of [J_X(m), J_Y(n)]."""
    xy, yx = mat_mul(x, y), mat_mul(y, x)
    dim = len(x)
    out: dict = {}

    def add(key, mat, sign):
        cur = out.setdefault(key, [[0] * dim for _ in range(dim)])
        out[key] = mat_add(cur, mat, sign)

    for k1 in range(m[0] + 1):
        for k2 in range(m[1] + 1):
            l = _mode_sub(m, (k1, k2))
            g = _mode_sub(n, l)
            if min(g) >= 0:
                add(((k1, k2), g), yx, -1)
    for k1 in range(n[0] + 1):
        for k2 in range(n[1] + 1):
            l = _mode_sub(n, (k1, k2))
            g = _mode_sub(m, l)
            if min(g) >= 0:
                add(((k1, k2), g), xy, 1)
    return {k: v for k, v in out.items() if not mat_is_zero(v)}


def _as_current(linear: dict, dim: int):
    """(Z, p) if ``linear`` equals the bilinear of J_Z(p), else None."""
    if not linear:
        return ([[0] * dim for _ in range(dim)], None)
    sums = {(b[0] + g[0], b[1] + g[1]) for b, g in linear}
    if len(sums) != 1:
        return None
    p = sums.pop()
    mats = list(linear.values())
    z = mats[0]
    if any(mt != z for mt in mats):
        return None
    keys = {((k1, k2), (p[0] - k1, p[1] - k2)) for k1 in range(p[0] + 1) for k2 in range(p[1] + 1)}
    return (z, p) if set(linear) == keys else None


def current_bracket_report(x: Matrix, y: Matrix, m, n) -> dict:
    """Decompose [J_X(m), J_Y(n)] into hbar^1 bilinears and an hbar^2 scalar."""
    m, n = tuple(m), tuple(n)
    dim = len(x)
    br = weyl_commutator(current(x, m), current(y, n))
    if br.hbar_degree() > 2:
        raise AssertionError("bracket of bilinears has more than two contractions")
    linear = bilinear_part(br.hbar_part(1), dim)
    linear = {k: v for k, v in linear.items() if not mat_is_zero(v)}
    central_part = br.hbar_part(2)
    central = as_rational(sum(v for (w, _), v in central_part.terms.items() if not w))
    if any(w for (w, _) in central_part.terms):
        raise AssertionError("hbar^2 part is not a scalar")
    if not br.hbar_part(0).is_zero():
        raise AssertionError("classical part of a commutator must vanish")
    as_cur = _as_current(linear, dim)
    comm = mat_bracket(x, y)
    closes = as_cur is not None and (mat_is_zero(as_cur[0]) and mat_is_zero(comm) or
                                     as_cur[0] == comm)
    return {
        "linear": linear,
        "central": central,
        "predicted_linear": predicted_linear_part(x, y, m, n),
        "closes": closes,
        "closing_mode": as_cur[1] if closes and as_cur else None,
        "trace_xy": trace(mat_mul(x, y)),
    }


def sample_mode_pairs(max_component: int = 2) -> list[tuple]:
    modes = [(a, b) for a in range(max_component + 1) for b in range(max_component + 1)]
    return [(m, n) for m in modes for n in modes]


def _iter_monomials(max_degree: int) -> Iterable[Mono]:
    for a in range(max_degree + 1):
        for b in range(max_degree + 1 - a):
            for c in range(max_degree + 1 - a - b):
                for d in range(max_degree + 1 - a - b - c):
                    if a == 0 or c == 0:
                        yield (a, b, c, d)


def a2_monomials(max_degree: int, omega: bool | None = None) -> list[AElement]:
    """Normal-form basis monomials of joint degree <= max_degree."""
    flags = (False, True) if omega is None else (omega,)
    return [AElement.monomial(*m, omega=f) for f in flags for m in _iter_monomials(max_degree)]
