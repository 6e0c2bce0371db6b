"""Holomorphic local operators of the free beta-gamma system on C^2.

Linear generators are gamma_{n1,n2;i} (even, ghost number 0) and
beta^i_{n1+1,n2+1} (odd, ghost number 1).  Beta modes are stored shifted by
(-1, -1), so every stored mode ranges over N^2; text output uses the unshifted
subscripts.

The brute-force supercharacter enumerates every monomial in a box and is
deliberately independent of the product formulas in
:mod:`twistchar.characters`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .characters import FlavorWeights
from .series import FugacitySpec, TruncatedSeries

GAMMA = "gamma"
BETA = "beta"


@dataclass(frozen=True)
class GeneratorLabel:
    kind: str
    mode: tuple[int, int]
    flavor: int = 1

    def __post_init__(self):
        if self.kind not in (GAMMA, BETA):
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if len(self.mode) != 2 or min(self.mode) < 0:
            raise ValueError(f"mode must be a pair of non-negative integers, got {self.mode}")
        if self.flavor < 1:
            raise ValueError("flavor index is 1-based")
        object.__setattr__(self, "mode", tuple(self.mode))

    @property
    def q_weights(self) -> tuple[int, int]:
        if self.kind == GAMMA:
            return self.mode
        return (self.mode[0] + 1, self.mode[1] + 1)

    @property
    def u_charge(self) -> int:
        return 0 if self.kind == GAMMA else 1

    @property
    def parity(self) -> int:
        return self.u_charge

    def z_charge(self, flavors: FlavorWeights | None = None) -> tuple[int, ...]:
        w = (1,) if flavors is None else flavors.charge(self.flavor)
        return w if self.kind == GAMMA else tuple(-x for x in w)

    def sort_key(self):
        # betas first; within a kind, higher modes first, then flavor
        return (0 if self.kind == BETA else 1, -self.mode[0], -self.mode[1], self.flavor)

    def __str__(self):
        a, b = self.q_weights
        return f"{'g' if self.kind == GAMMA else 'b'}[{a},{b};{self.flavor}]"


def gamma(n1: int, n2: int, flavor: int = 1) -> GeneratorLabel:
    return GeneratorLabel(GAMMA, (n1, n2), flavor)


def beta(m1: int, m2: int, flavor: int = 1) -> GeneratorLabel:
    """Beta with *stored* mode (m1, m2), i.e. the operator beta_{m1+1, m2+1}."""
    return GeneratorLabel(BETA, (m1, m2), flavor)


class OperatorMonomial:
    """Normal-ordered monomial: labels in canonical order with exponents.
    Betas carry exponent at most 1."""

    __slots__ = ("factors",)

    def __init__(self, factors: Iterable[tuple[GeneratorLabel, int]] = ()):
        merged: dict[GeneratorLabel, int] = {}
        for lab, k in factors:
            if k < 0:
                raise ValueError("negative exponent")
            if k:
                merged[lab] = merged.get(lab, 0) + k
        for lab, k in merged.items():
            if lab.kind == BETA and k > 1:
                raise ValueError("odd generators square to zero")
        self.factors = tuple(sorted(merged.items(), key=lambda t: t[0].sort_key()))

    @classmethod
    def from_product(cls, labels: Sequence[GeneratorLabel]) -> tuple[int, "OperatorMonomial | None"]:
        """Normal-order a product of generators; returns (sign, monomial) with
        the Koszul sign of sorting the odd factors, or (0, None) if it vanishes."""
        odd = [lab for lab in labels if lab.kind == BETA]
        if len(set(odd)) != len(odd):
            return 0, None
        keys = [lab.sort_key() for lab in odd]
        inversions = sum(1 for i in range(len(keys)) for j in range(i + 1, len(keys)) if keys[i] > keys[j])
        counts: dict[GeneratorLabel, int] = {}
        for lab in labels:
            counts[lab] = counts.get(lab, 0) + 1
        return (-1) ** inversions, cls(counts.items())

    @property
    def betas(self) -> tuple[GeneratorLabel, ...]:
        return tuple(lab for lab, _ in self.factors if lab.kind == BETA)

    @property
    def gammas(self) -> tuple[tuple[GeneratorLabel, int], ...]:
        return tuple((lab, k) for lab, k in self.factors if lab.kind == GAMMA)

    def q_weights(self) -> tuple[int, int]:
        a = b = 0
        for lab, k in self.factors:
            x, y = lab.q_weights
            a += k * x
            b += k * y
        return a, b

    def u_charge(self) -> int:
        return sum(k for lab, k in self.factors if lab.kind == BETA)

    def parity(self) -> int:
        return self.u_charge() % 2

    def z_charge(self, flavors: FlavorWeights | None = None) -> tuple[int, ...]:
        r = 1 if flavors is None else flavors.rank
        tot = [0] * r
        for lab, k in self.factors:
            for i, c in enumerate(lab.z_charge(flavors)):
                tot[i] += k * c
        return tuple(tot)

    def __mul__(self, other: "OperatorMonomial") -> tuple[int, "OperatorMonomial | None"]:
        labels = []
        for lab, k in self.factors + other.factors:
            labels.extend([lab] * k)
        return OperatorMonomial.from_product(labels)

    def __eq__(self, other):
        return isinstance(other, OperatorMonomial) and self.factors == other.factors

    def __hash__(self):
        return hash(self.factors)

    def sort_key(self):
        return tuple((lab.sort_key(), -k) for lab, k in self.factors)

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __str__(self):
        if not self.factors:
            return "1"
        return "*".join(str(lab) + (f"^{k}" if k > 1 else "") for lab, k in self.factors)

    __repr__ = __str__


# ---------------------------------------------------------------------------
# enumeration


def _generators(max_weight: tuple[int, int] | None, max_total: int | None, dim_v: int) -> list[GeneratorLabel]:
    gens = []
    for kind in (BETA, GAMMA):
        shift = 1 if kind == BETA else 0
        top = max_total if max_total is not None else max_weight[0] + max_weight[1]
        for s in range(top + 1):
            for n1 in range(s + 1):
                mode = (n1, s - n1)
                w = (mode[0] + shift, mode[1] + shift)
                if max_weight is not None and (w[0] > max_weight[0] or w[1] > max_weight[1]):
                    continue
                if max_total is not None and w[0] + w[1] > max_total:
                    continue
                for f in range(1, dim_v + 1):
                    gens.append(GeneratorLabel(kind, mode, f))
    gens.sort(key=GeneratorLabel.sort_key)
    return gens


def _search(gens, flavors, exact_weight, max_total, u_max, charge_budget) -> Iterator[list]:
    """Depth-first search over exponent assignments to ``gens``."""
    n = len(gens)
    weights = [g.q_weights for g in gens]
    charges = [sum(g.z_charge(flavors)) if g.kind == GAMMA else 0 for g in gens]
    chosen: list = []

    def rec(i, a, b, u, ch):
        if i == n:
            if exact_weight is None or (a, b) == exact_weight:
                yield list(chosen)
            return
        g = gens[i]
        wa, wb = weights[i]
        kmax = 1 if g.kind == BETA else None
        k = 0
        while True:
            na, nb = a + k * wa, b + k * wb
            if exact_weight is not None and (na > exact_weight[0] or nb > exact_weight[1]):
                break
            if max_total is not None and na + nb > max_total:
                break
            nu = u + (k if g.kind == BETA else 0)
            if nu > u_max:
                break
            nch = ch + k * charges[i]
            if nch > charge_budget:
                break
            if k:
                chosen.append((g, k))
            yield from rec(i + 1, na, nb, nu, nch)
            if k:
                chosen.pop()
            k += 1
            if kmax is not None and k > kmax:
                break
            if g.kind == GAMMA and wa == wb == 0 and charges[i] == 0:
                break

    yield from rec(0, 0, 0, 0, 0)


def _gamma_charge_budget(flavors: FlavorWeights, z_hi: Sequence[int], u_max: int) -> int:
    total = 0
    for j, hi in enumerate(z_hi):
        wmax = max((v[j] for v in flavors.vectors), default=0)
        total += hi + u_max * wmax
    return total


def enumerate_weight_space(
    weight: tuple[int, int],
    z_range: tuple[int, int],
    u_range: tuple[int, int] = (0, 0),
    dim_v: int = 1,
    flavors: FlavorWeights | None = None,
    *,
    traversal: str = "canonical",
) -> list[OperatorMonomial]:
    """All monomials with q-weight exactly ``weight``, every z-charge component
    in ``z_range`` and ghost number in ``u_range``, in canonical order.

    ``traversal="reversed"`` walks the generators in the opposite order; the
    returned list is the same.
    """
    a, b = weight
    if a < 0 or b < 0:
        raise ValueError("q-weights must be non-negative")
    flavors = flavors or FlavorWeights.uniform(dim_v)
    zlo, zhi = z_range
    ulo, uhi = u_range
    gens = _generators((a, b), None, flavors.dim_v)
    if traversal == "reversed":
        gens = gens[::-1]
    elif traversal != "canonical":
        raise ValueError(f"unknown traversal {traversal!r}")
    budget = _gamma_charge_budget(flavors, [zhi] * flavors.rank, uhi)
    out = []
    for chosen in _search(gens, flavors, (a, b), None, uhi, budget):
        m = OperatorMonomial(chosen)
        if m.u_charge() < ulo:
            continue
        if all(zlo <= c <= zhi for c in m.z_charge(flavors)):
            out.append(m)
    out.sort()
    return out


def brute_supercharacter(spec: FugacitySpec, flavors: FlavorWeights) -> TruncatedSeries:
    """Sum over every monomial in the box of (-1)^parity times its fugacity."""
    names = flavors.names
    spec.require("q1", "q2", *names)
    caps = [int(spec.var("q1").hi) + int(spec.var("q2").hi)]
    if spec.mode_bound is not None:
        caps.append(int(spec.mode_bound))
    max_total = min(caps)
    u_max = int(spec.var("u").hi) if spec.has("u") else max_total // 2
    z_hi = [int(spec.var(n).hi) for n in names]
    gens = _generators(None, max_total, flavors.dim_v)
    budget = _gamma_charge_budget(flavors, z_hi, u_max)
    iz = [spec.index(n) for n in names]
    i1, i2 = spec.index("q1"), spec.index("q2")
    iu = spec.index("u") if spec.has("u") else None
    terms: dict = {}
    nvar = len(spec.variables)
    for chosen in _search(gens, flavors, None, max_total, u_max, budget):
        m = OperatorMonomial(chosen)
        e = [0] * nvar
        e[i1], e[i2] = m.q_weights()
        for i, c in zip(iz, m.z_charge(flavors)):
            e[i] = c
        if iu is not None:
            e[iu] = m.u_charge()
        e = tuple(e)
        if spec.in_box(e):
            terms[e] = terms.get(e, 0) + (-1) ** m.parity()
    return TruncatedSeries(spec, terms)


def format_monomials(monomials: Iterable[OperatorMonomial]) -> str:
    return "\n".join(str(m) for m in monomials)
