"""Closed-form characters of the twisted chiral multiplet and numeric
special-function evaluation.

Every character here is a supertrace: odd operators enter with sign -1, so
the numerator factors read (1 - ...).  Replacing u -> -u recovers the
unsigned count.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .series import (
    FugacitySpec,
    SeriesError,
    TruncatedSeries,
    divide,
    lattice_product,
    plethystic_exp,
    substitute,
)

POLE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class FlavorWeights:
    """Integer flavor-charge vectors, one per basis vector of V."""

    vectors: tuple[tuple[int, ...], ...]

    def __init__(self, vectors: Sequence[Sequence[int]]):
        vecs = tuple(tuple(int(x) for x in v) for v in vectors)
        if vecs:
            r = len(vecs[0])
            if r == 0 or any(len(v) != r for v in vecs):
                raise ValueError("flavor vectors must share a positive length")
            for v in vecs:
                if any(x < 0 for x in v) or not any(v):
                    raise ValueError("flavor charges must be non-negative and not all zero")
        object.__setattr__(self, "vectors", vecs)

    @classmethod
    def uniform(cls, dim_v: int) -> "FlavorWeights":
        """dim V copies of charge +1 under a single U(1)_z."""
        if dim_v < 0:
            raise ValueError("dim V must be non-negative")
        return cls([(1,)] * dim_v)

    @classmethod
    def diagonal(cls, dim_v: int) -> "FlavorWeights":
        """One fugacity z_i per flavor (the Cartan of U(dim V))."""
        return cls([tuple(int(i == j) for j in range(dim_v)) for i in range(dim_v)])

    @property
    def dim_v(self) -> int:
        return len(self.vectors)

    @property
    def rank(self) -> int:
        return len(self.vectors[0]) if self.vectors else 1

    @property
    def names(self) -> tuple[str, ...]:
        if self.rank == 1:
            return ("z",)
        return tuple(f"z{i + 1}" for i in range(self.rank))

    def charge(self, flavor: int) -> tuple[int, ...]:
        """Charge vector of the gamma generator of a 1-based flavor index."""
        return self.vectors[flavor - 1]


@dataclass(frozen=True)
class ComplexParams:
    q1: complex
    q2: complex
    z: complex
    tolerance: float = 1e-17
    cutoff: int = 100000

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.cutoff < 1:
            raise ValueError("cutoff must be a positive integer")


# ---------------------------------------------------------------------------
# working boxes


def _mode_cap(spec: FugacitySpec, mode_names: Sequence[str]) -> int:
    caps = []
    if spec.mode_bound is not None:
        caps.append(int(spec.mode_bound))
    if len(mode_names) == 1:
        caps.append(int(spec.var(mode_names[0]).hi))
    else:
        caps.append(sum(int(spec.var(n).hi) for n in mode_names))
    return min(caps)


def _working_spec(spec: FugacitySpec, flavors: FlavorWeights, n_odd: int, extra: dict | None = None) -> FugacitySpec:
    """Widen the flavor ranges so that no term that can re-enter the requested
    box through a later z^-1 factor is discarded early.  ``n_odd`` bounds the
    number of beta generators in the box."""
    ranges = dict(extra or {})
    for j, name in enumerate(flavors.names):
        v = spec.var(name)
        w = max((vec[j] for vec in flavors.vectors), default=0)
        ranges[name] = (min(v.lo, -n_odd * w), v.hi + n_odd * w)
    return spec.with_ranges(**ranges)


def _n_odd(spec: FugacitySpec, mode_cap: int, per_beta: int) -> int:
    k = mode_cap // per_beta
    if spec.has("u"):
        k = min(k, int(spec.var("u").hi))
    return max(k, 0)


def _mono(spec: FugacitySpec, exps: dict) -> tuple:
    return spec.scale({k: v for k, v in exps.items() if v})


def _zexps(flavors: FlavorWeights, flavor: int, sign: int) -> dict:
    return {n: sign * c for n, c in zip(flavors.names, flavors.charge(flavor))}


# ---------------------------------------------------------------------------
# formal characters


def free_character(flavors: FlavorWeights, spec: FugacitySpec, method: str = "lattice") -> TruncatedSeries:
    """Local supercharacter of the free beta-gamma system on C^2 in (q1, q2, z, u).

    ``method="lattice"`` multiplies the double-product factors one by one;
    ``method="pe"`` takes the plethystic exponential of the single-letter
    index.  When the spec has no ``u`` the result is the u = 1 specialisation.
    """
    spec.require("q1", "q2", *flavors.names)
    has_u = spec.has("u")
    cap = _mode_cap(spec, ("q1", "q2"))
    work = _working_spec(spec, flavors, _n_odd(spec, cap, 2))
    uexp = {"u": 1} if has_u else {}
    if method == "lattice":
        def factor(n1, n2, a):
            num = TruncatedSeries.one(work).mul_binomial(
                _mono(work, {**_zexps(flavors, a, -1), **uexp, "q1": n1 + 1, "q2": n2 + 1}), -1)
            den = TruncatedSeries.one(work).mul_binomial(
                _mono(work, {**_zexps(flavors, a, 1), "q1": n1, "q2": n2}), -1)
            return num, den

        idx = [(n1, s - n1, a) for s in range(cap + 1) for n1 in range(s + 1)
               for a in range(1, flavors.dim_v + 1)]
        result = lattice_product(factor, work, indices=idx)
    elif method == "pe":
        letters = TruncatedSeries.zero(work)
        for a in range(1, flavors.dim_v + 1):
            letters = letters + TruncatedSeries.monomial(work, _zexps(flavors, a, 1))
            letters = letters - TruncatedSeries.monomial(
                work, {**_zexps(flavors, a, -1), **uexp, "q1": 1, "q2": 1})
        one = TruncatedSeries.one(work)
        for q in ("q1", "q2"):
            letters = divide(letters, one - TruncatedSeries.monomial(work, {q: 1}))
        result = plethystic_exp(letters)
    else:
        raise ValueError(f"unknown method {method!r}")
    return result.restrict(spec)


def _su2_indices(cap: int):
    return [(m, l) for m in range(cap + 1) for l in range(m + 1)]


def _p_working(spec: FugacitySpec, cap: int) -> dict:
    p = spec.var("p")
    return {"p": (min(p.lo, -cap), max(p.hi, cap))}


def su2_character(dim_v: int, spec: FugacitySpec) -> TruncatedSeries:
    """Free supercharacter in the SU(2)_p x U(1)_q fugacities (p, q, z, u)."""
    flavors = FlavorWeights.uniform(dim_v)
    spec.require("p", "q", "z")
    cap = _mode_cap(spec, ("q",))
    work = _working_spec(spec, flavors, _n_odd(spec, cap, 2), _p_working(spec, cap))
    uexp = {"u": 1} if spec.has("u") else {}
    one = TruncatedSeries.one(work)

    def factor(m, l):
        num = one.mul_binomial(_mono(work, {"z": -1, **uexp, "q": m + 2, "p": 2 * l - m}), -1)
        den = one.mul_binomial(_mono(work, {"z": 1, "q": m, "p": 2 * l - m}), -1)
        return num, den

    result = TruncatedSeries.one(work)
    for _ in range(dim_v):
        result = result * lattice_product(factor, work, indices=_su2_indices(cap))
    return result.restrict(spec)


def potential_character(n: int, spec: FugacitySpec) -> TruncatedSeries:
    """Character of the theory with a degree n+1 homogeneous potential on V = C."""
    if n < 1:
        raise ValueError("N must be at least 1")
    spec.require("p", "q", "z")
    cap = _mode_cap(spec, ("q",))
    work = spec.with_ranges(**_p_working(spec, cap))
    one = TruncatedSeries.one(work)

    def factor(m, l):
        pe = 2 * l - m
        num = one.mul_binomial(_mono(work, {"z": n, "q": m, "p": pe}), -1)
        den = one.mul_binomial(_mono(work, {"z": 1, "q": m, "p": pe}), -1)
        return num, den

    return lattice_product(factor, work, indices=_su2_indices(cap)).restrict(spec)


CONVENTIONS = ("z-form", "p-form")


def _u_image(n: int, convention: str) -> dict:
    if convention == "z-form":
        return {"z": n + 1, "q": -2}
    if convention == "p-form":
        return {"p": n + 1, "q": -2}
    raise ValueError(f"unknown convention {convention!r}; expected one of {CONVENTIONS}")


def specialization_source_spec(target: FugacitySpec, n: int, convention: str) -> FugacitySpec:
    """A (p, q, z, u) box large enough that substituting u makes every
    coefficient of ``target`` exact."""
    target.require("p", "q", "z")
    qt = _mode_cap(target, ("q",))
    zt = int(target.var("z").hi)
    if convention == "z-form":
        # a beta adds N to the interacting z-charge
        kmax = max(zt // n, 0)
        zlo = min(int(target.var("z").lo), -kmax)
        zhi = zt
    elif convention == "p-form":
        if n == 1:
            raise SeriesError("p-form substitution is not summable for N = 1")
        pt = max(abs(int(target.var("p").lo)), abs(int(target.var("p").hi)), qt)
        kmax = (pt + qt) // (n - 1)
        zlo, zhi = int(target.var("z").lo), zt
    else:
        raise ValueError(f"unknown convention {convention!r}")
    qs = qt + 2 * kmax
    return FugacitySpec.build(
        {"p": (-qs, qs), "q": (0, qs), "z": (zlo, zhi), "u": (0, kmax)},
        mode_vars=("q",), mode_bound=qs,
    )


def specialize_to_potential(
    free: TruncatedSeries, n: int, convention: str, target: FugacitySpec | None = None
) -> TruncatedSeries:
    """Substitute u in a (p, q, z, u) free character to obtain an interacting one.

    The z-form sends u -> z^(N+1) q^-2, the p-form u -> p^(N+1) q^-2.
    """
    if n < 1:
        raise ValueError("N must be at least 1")
    image = _u_image(n, convention)
    if target is None:
        s = free.spec
        target = s.without("u")
    needed = specialization_source_spec(target, n, convention)
    have = free.spec
    for v in needed.variables:
        hv = have.var(v.name)
        if hv.lo > v.lo or hv.hi < v.hi:
            raise SeriesError(
                f"source box too small for an exact substitution: {v.name} needs [{v.lo},{v.hi}]")
    return substitute(free, {"u": (1, image)}, target)


def change_to_u2(su2: TruncatedSeries, target: FugacitySpec) -> TruncatedSeries:
    """q -> (q1 q2)^(1/2), p -> (q1/q2)^(1/2)."""
    half = Fraction(1, 2)
    rules = {"q": (1, {"q1": half, "q2": half}), "p": (1, {"q1": half, "q2": -half})}
    return substitute(su2, rules, target)


# ---------------------------------------------------------------------------
# numerics


def _check_nome(q: complex, label: str):
    if abs(q) >= 1:
        raise ValueError(f"non-convergent product: |{label}| >= 1")


def elliptic_gamma_numeric(params: ComplexParams) -> complex:
    """Gamma(q1, q2; z) = prod (1 - z^-1 q1^(n1+1) q2^(n2+1)) / (1 - z q1^n1 q2^n2).

    Shells n1 + n2 = s are multiplied until every factor in a shell is within
    ``tolerance`` of 1.
    """
    q1, q2, z = complex(params.q1), complex(params.q2), complex(params.z)
    _check_nome(q1, "q1")
    _check_nome(q2, "q2")
    if z == 0:
        raise ValueError("z must be nonzero")
    zi = 1 / z
    total = 1 + 0j
    for s in range(params.cutoff):
        dev = 0.0
        for n1 in range(s + 1):
            n2 = s - n1
            m = q1 ** n1 * q2 ** n2
            den = 1 - z * m
            if abs(den) < POLE_TOLERANCE:
                raise ValueError("pole within tolerance")
            num = 1 - zi * m * q1 * q2
            total *= num / den
            dev = max(dev, abs(num / den - 1))
        if dev < params.tolerance:
            return total
    raise ValueError("product did not converge within the factor cutoff")


def theta0(z: complex, q: complex, tolerance: float = 1e-17, cutoff: int = 100000) -> complex:
    """theta_0(z; q) = prod_j (1 - z q^j)(1 - z^-1 q^(j+1))."""
    q, z = complex(q), complex(z)
    _check_nome(q, "q")
    total = 1 + 0j
    for j in range(cutoff):
        a = 1 - z * q ** j
        b = 1 - q ** (j + 1) / z
        total *= a * b
        if abs(a - 1) < tolerance and abs(b - 1) < tolerance:
            return total
    raise ValueError("product did not converge within the factor cutoff")


def partition3d_factor(tau1: complex, tau2: complex, a_f: complex, n1: int, n2: int, n: int = 0,
                       tolerance: float = POLE_TOLERANCE) -> complex:
    base = n1 * tau1 + n2 * tau2 + n
    num = base - 1j * (tau1 + tau2) + 1j * a_f
    den = base - 1j * a_f
    if abs(den) < tolerance:
        raise ValueError("pole in partial product")
    return num / den


def partition3d_truncated(tau1: complex, tau2: complex, a_f: complex, n_cutoff: int, mode_cutoff: int = 0,
                          tolerance: float = POLE_TOLERANCE) -> complex:
    """Raw partial product over 0 <= n1, n2 <= n_cutoff and |n| <= mode_cutoff.

    No regularisation is applied; the full winding product diverges and its
    regularised value is not computed here.
    """
    if n_cutoff < 0 or mode_cutoff < 0:
        raise ValueError("cutoffs must be non-negative")
    total = 1 + 0j
    for n in range(-mode_cutoff, mode_cutoff + 1):
        for n1 in range(n_cutoff + 1):
            for n2 in range(n_cutoff + 1):
                total *= partition3d_factor(tau1, tau2, a_f, n1, n2, n, tolerance)
    return total


def nome(tau: complex) -> complex:
    return cmath.exp(2j * cmath.pi * tau)
