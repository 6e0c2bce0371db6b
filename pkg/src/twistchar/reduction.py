"""Reduction of the beta-gamma system along a curve, and the deformed
Dolbeault/de Rham complex of the plane.

Compactifying on a curve leaves a one-dimensional beta-gamma system valued in
the sheaf cohomology of the bundle.  Each target class of flavor weight a and
degree j gives a gamma tower (-1)^j s^j z^a / (1 - q) and a beta tower
(-1)^(j+1) s^j u z^-a q / (1 - q), with s the fugacity ``sigma`` of odd
target degree.  The character is the plethystic exponential of their sum.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .characters import FlavorWeights
from .koszul import SparseMatrixQ, exact_rank
from .series import FugacitySpec, TruncatedSeries, as_rational, divide, plethystic_exp


def surface_cohomology(genus: int, degree: int, override: tuple[int, int] | None = None) -> tuple[int, int]:
    """(h^0, h^1) of a degree ``degree`` line bundle on a genus ``genus`` curve."""
    if genus < 0:
        raise ValueError("genus must be non-negative")
    chi = degree - genus + 1
    if override is not None:
        h0, h1 = (int(x) for x in override)
        if h0 < 0 or h1 < 0 or h0 - h1 != chi:
            raise ValueError("inconsistent override")
        return h0, h1
    if genus == 0:
        return max(degree + 1, 0), max(-degree - 1, 0)
    if degree < 0:
        return 0, genus - 1 - degree
    if degree > 2 * genus - 2:
        return chi, 0
    raise ValueError("cohomology not determined by (g,d)")


@dataclass
class TargetSpectrum:
    """Graded target space: entries (flavor weight vector, degree, multiplicity)."""

    entries: list = field(default_factory=list)

    def __post_init__(self):
        clean = []
        for weight, degree, mult in self.entries:
            if mult < 0:
                raise ValueError("multiplicities must be non-negative")
            if degree not in (0, 1):
                raise ValueError("target degrees must be 0 or 1")
            if mult:
                clean.append((tuple(int(x) for x in weight), int(degree), int(mult)))
        self.entries = clean

    @property
    def rank(self) -> int:
        return len(self.entries[0][0]) if self.entries else 1

    @classmethod
    def from_cohomology(cls, h0: int, h1: int, flavors: FlavorWeights) -> "TargetSpectrum":
        entries = []
        for a in range(1, flavors.dim_v + 1):
            w = flavors.charge(a)
            entries.append((w, 0, h0))
            entries.append((w, 1, h1))
        return cls(entries)

    @classmethod
    def surface(cls, genus: int, degree: int, dim_v: int = 1,
                override: tuple[int, int] | None = None) -> "TargetSpectrum":
        h0, h1 = surface_cohomology(genus, degree, override)
        return cls.from_cohomology(h0, h1, FlavorWeights.uniform(dim_v))

    @classmethod
    def torus(cls, dim_v: int = 1) -> "TargetSpectrum":
        """Trivial bundle on an elliptic curve: one class in each degree."""
        return cls.surface(1, 0, dim_v, override=(1, 1))

    @classmethod
    def projective_line(cls, bundle_degree: int, dim_v: int = 1) -> "TargetSpectrum":
        return cls.surface(0, bundle_degree, dim_v)

    def flavor_names(self) -> tuple[str, ...]:
        return ("z",) if self.rank == 1 else tuple(f"z{i + 1}" for i in range(self.rank))


def _max_weight(target: TargetSpectrum) -> int:
    return max((max(w) for w, _, _ in target.entries), default=0)


def reduced_character(target: TargetSpectrum, spec: FugacitySpec) -> TruncatedSeries:
    """Character of the reduced one-dimensional system in (q, z..., u, sigma).

    Missing ``u`` or ``sigma`` variables are set to 1.
    """
    names = target.flavor_names()
    spec.require("q", *names)
    has_u, has_s = spec.has("u"), spec.has("sigma")
    qcap = int(spec.var("q").hi)
    if spec.mode_bound is not None:
        qcap = min(qcap, int(spec.mode_bound))
    n_beta = min(qcap, int(spec.var("u").hi)) if has_u else qcap
    wmax = _max_weight(target)
    ranges = {}
    for n in names:
        v = spec.var(n)
        ranges[n] = (min(v.lo, -n_beta * wmax), v.hi + n_beta * wmax)
    work = spec.with_ranges(**ranges)
    letters = TruncatedSeries.zero(work)
    for weight, j, mult in target.entries:
        zexp = dict(zip(names, weight))
        sig = {"sigma": j} if has_s and j else {}
        if not has_s or j == 0 or int(spec.var("sigma").hi) >= j:
            g = TruncatedSeries.monomial(work, {**zexp, **sig}, (-1) ** j * mult)
            b = TruncatedSeries.monomial(
                work, {**{k: -v for k, v in zexp.items()}, **sig, **({"u": 1} if has_u else {}), "q": 1},
                (-1) ** (j + 1) * mult)
            letters = letters + g + b
    letters = divide(letters, TruncatedSeries.one(work) - TruncatedSeries.monomial(work, {"q": 1}))
    if not letters:
        return TruncatedSeries.one(spec)
    return plethystic_exp(letters).restrict(spec)


def one_dimensional_character(n_copies: int, spec: FugacitySpec) -> TruncatedSeries:
    """prod_{n>=0} ((1 - u z^-1 q^(n+1)) / (1 - z q^n))^n_copies by direct
    factor-by-factor division, for cross-checks."""
    spec.require("q", "z")
    has_u = spec.has("u")
    qcap = int(spec.var("q").hi)
    n_beta = min(qcap, int(spec.var("u").hi)) if has_u else qcap
    v = spec.var("z")
    work = spec.with_ranges(z=(min(v.lo, -n_beta), v.hi + n_beta))
    out = TruncatedSeries.one(work)
    uexp = {"u": 1} if has_u else {}
    for _ in range(n_copies):
        for n in range(qcap + 1):
            out = out.mul_binomial(work.scale({"z": -1, "q": n + 1, **uexp}), -1)
            out = out.div_binomial(work.scale({"z": 1, "q": n}), -1)
    return out.restrict(spec)


# ---------------------------------------------------------------------------
# Hodge to de Rham


@dataclass(frozen=True)
class DeformedComplexParams:
    eps_plus: Fraction
    eps_minus: Fraction
    jets: int
    sign: str = "+"

    def __post_init__(self):
        if self.jets < 0:
            raise ValueError("jet cutoff must be non-negative")
        if self.sign not in ("+", "-"):
            raise ValueError("sign must be '+' or '-'")
        object.__setattr__(self, "eps_plus", as_rational(self.eps_plus))
        object.__setattr__(self, "eps_minus", as_rational(self.eps_minus))


def _forms(k: int) -> list[tuple[int, int, int, int]]:
    """z^a zbar^b dz^e1 dzbar^e2 with total weight a + b + e1 + e2 <= k."""
    out = []
    for e1 in (0, 1):
        for e2 in (0, 1):
            for a in range(k + 1):
                for b in range(k + 1 - a - e1 - e2):
                    out.append((a, b, e1, e2))
    return out


def _apply(form, eps_plus, eps_minus):
    """Image of one basis form under eps_plus dbar + eps_minus d, as {form: coeff}."""
    a, b, e1, e2 = form
    out = {}
    # dbar puts dzbar in front; dzbar dz = -dz dzbar
    if eps_plus and b and not e2:
        out[(a, b - 1, e1, 1)] = out.get((a, b - 1, e1, 1), 0) + eps_plus * b * (-1 if e1 else 1)
    # d contributes a z^(a-1) zbar^b dz in front
    if eps_minus and a and not e1:
        out[(a - 1, b, 1, e2)] = out.get((a - 1, b, 1, e2), 0) + eps_minus * a
    return out


def hodge_derham_dims(params: DeformedComplexParams) -> dict:
    """Cohomology of eps_plus dbar +/- eps_minus d on weight-truncated
    polynomial forms of the plane.

    Returns {"by_degree": {form degree: dim}, "by_bidegree": {(p, q): dim} or
    None when the differential mixes bidegrees, "total": int}.
    """
    em = params.eps_minus if params.sign == "+" else -params.eps_minus
    ep = params.eps_plus
    basis = _forms(params.jets)
    by_deg: dict[int, list] = {0: [], 1: [], 2: []}
    for f in basis:
        by_deg[f[2] + f[3]].append(f)
    index = {d: {f: i for i, f in enumerate(fs)} for d, fs in by_deg.items()}
    ranks = {}
    for d in (0, 1):
        entries = {}
        for j, f in enumerate(by_deg[d]):
            for g, c in _apply(f, ep, em).items():
                entries[(index[d + 1][g], j)] = c
        ranks[d] = exact_rank(SparseMatrixQ(len(by_deg[d + 1]), len(by_deg[d]), entries))
    dims = {
        0: len(by_deg[0]) - ranks[0],
        1: len(by_deg[1]) - ranks[1] - ranks[0],
        2: len(by_deg[2]) - ranks[1],
    }
    bigraded = ep == 0 or em == 0
    by_bideg = None
    if bigraded:
        by_bideg = _bigraded_dims(basis, ep, em)
    return {"by_degree": dims, "by_bidegree": by_bideg, "total": sum(dims.values())}


def _bigraded_dims(basis, ep, em) -> dict:
    groups: dict = {}
    for f in basis:
        groups.setdefault((f[2], f[3]), []).append(f)
    index = {k: {f: i for i, f in enumerate(v)} for k, v in groups.items()}
    rank_out = {}
    for key, fs in groups.items():
        entries: dict = {}
        targets: dict = {}
        for j, f in enumerate(fs):
            for g, c in _apply(f, ep, em).items():
                tk = (g[2], g[3])
                targets[tk] = True
                entries[(index[tk][g], j)] = c
        if targets:
            (tk,) = targets
            rank_out[key] = (tk, exact_rank(SparseMatrixQ(len(groups[tk]), len(fs), entries)))
        else:
            rank_out[key] = (None, 0)
    incoming = {k: 0 for k in groups}
    for key, (tk, r) in rank_out.items():
        if tk is not None:
            incoming[tk] += r
    return {k: len(groups[k]) - rank_out[k][1] - incoming[k] for k in sorted(groups)}
