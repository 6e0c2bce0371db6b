"""Koszul-type complexes for the beta-gamma system with a superpotential.

The interaction differential sends beta^i_{n1+1,n2+1} to the (n1, n2) Taylor
coefficient of dW/dx_i evaluated on the gamma jet, and kills gammas.  Gammas
are stored in the Taylor basis t_{a,b;i}, so a jet is gamma(z) = sum t_{a,b}
z1^a z2^b; ``GeneratorLabel(GAMMA, (a, b), i)`` stands for t_{a,b;i}.

The differential preserves the combination

    A = a - k,  B = b - k,  C = z + D k

for a monomial with q-weight (a, b), z-charge z and k betas, where D is the
weighted degree of W.  Each (A, B, C) sector is a finite complex and is
handled on its own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import sympy

from .characters import FlavorWeights
from .operators import BETA, GAMMA, GeneratorLabel, OperatorMonomial
from .series import FugacitySpec, TruncatedSeries, as_rational

Chain = dict  # OperatorMonomial -> int | Fraction


# ---------------------------------------------------------------------------
# superpotentials


class Superpotential:
    """Polynomial W on V = C^n with rational coefficients.

    ``weights`` are positive integer weights w_i with W quasi-homogeneous of
    weighted degree ``degree``; for homogeneous W they default to 1.
    """

    def __init__(self, terms: Mapping[tuple[int, ...], object], n_vars: int | None = None,
                 weights: Sequence[int] | None = None):
        clean = {}
        for e, c in terms.items():
            c = as_rational(c)
            if c:
                clean[tuple(int(x) for x in e)] = c
        if not clean:
            raise ValueError("superpotential is zero")
        n = n_vars if n_vars is not None else len(next(iter(clean)))
        if any(len(e) != n for e in clean):
            raise ValueError("inconsistent number of variables")
        if min(sum(e) for e in clean) < 2:
            raise ValueError("superpotential must be at least quadratic")
        self.terms = dict(sorted(clean.items()))
        self.n_vars = n
        if weights is None:
            degs = {sum(e) for e in clean}
            if len(degs) != 1:
                raise ValueError("inhomogeneous superpotential needs explicit weights")
            weights = (1,) * n
        self.weights = tuple(int(w) for w in weights)
        if len(self.weights) != n or min(self.weights) < 1:
            raise ValueError("weights must be positive, one per variable")
        wdeg = {sum(w * x for w, x in zip(self.weights, e)) for e in clean}
        if len(wdeg) != 1:
            raise ValueError("superpotential is not quasi-homogeneous for the given weights")
        self.degree = wdeg.pop()
        if self.degree <= max(self.weights):
            raise ValueError("weighted degree must exceed every variable weight")

    @classmethod
    def parse(cls, text: str, n_vars: int | None = None, weights: Sequence[int] | None = None) -> "Superpotential":
        """Parse an infix polynomial in x1..xn (or a bare x when n = 1)."""
        try:
            expr = sympy.sympify(text.replace("^", "**"), rational=True)
        except (sympy.SympifyError, SyntaxError, TypeError) as exc:
            raise ValueError(f"cannot parse superpotential {text!r}") from exc
        names = sorted((str(s) for s in expr.free_symbols), key=_var_index)
        for nm in names:
            _var_index(nm)
        if "x" in names and len(names) > 1:
            raise ValueError("mix of 'x' and indexed variables")
        n = n_vars or max((_var_index(nm) for nm in names), default=1)
        symbols = [sympy.Symbol("x")] if names == ["x"] else [sympy.Symbol(f"x{i}") for i in range(1, n + 1)]
        if names == ["x"] and n != 1:
            raise ValueError("bare 'x' only allowed for one variable")
        poly = sympy.Poly(expr, *symbols, domain="QQ")
        terms = {e: Fraction(int(c.p), int(c.q)) for e, c in poly.terms()}
        return cls(terms, n, weights)

    def partial(self, i: int) -> dict:
        """dW/dx_i as {exponent: coefficient}; ``i`` is 1-based."""
        out = {}
        for e, c in self.terms.items():
            if e[i - 1]:
                f = list(e)
                f[i - 1] -= 1
                out[tuple(f)] = as_rational(c * e[i - 1])
        return out

    def flavors(self) -> FlavorWeights:
        return FlavorWeights([[w] for w in self.weights])

    def __str__(self):
        parts = []
        for e, c in self.terms.items():
            mono = "*".join(
                (f"x{i + 1}" if self.n_vars > 1 else "x") + (f"^{k}" if k > 1 else "")
                for i, k in enumerate(e) if k)
            parts.append(f"({c})*{mono}")
        return " + ".join(parts)


def _var_index(name: str) -> int:
    if name == "x":
        return 1
    if name.startswith("x") and name[1:].isdigit() and int(name[1:]) >= 1:
        return int(name[1:])
    raise ValueError(f"unknown variable {name!r}; use x1..xn")


# ---------------------------------------------------------------------------
# chains


def _add(target: Chain, mono: OperatorMonomial, c) -> None:
    v = target.get(mono, 0) + c
    if v:
        target[mono] = as_rational(v)
    else:
        target.pop(mono, None)


def chain_add(a: Chain, b: Chain, scale=1) -> Chain:
    out = dict(a)
    for m, c in b.items():
        _add(out, m, scale * c)
    return out


def chain_mul(a: Chain, b: Chain) -> Chain:
    out: Chain = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            sign, m = ma * mb
            if sign:
                _add(out, m, sign * ca * cb)
    return out


def chain_parity(a: Chain) -> int:
    pars = {m.parity() for m in a}
    if len(pars) > 1:
        raise ValueError("chain is not homogeneous in parity")
    return pars.pop() if pars else 0


# ---------------------------------------------------------------------------
# extended observables


def extended_observable(poly: Mapping[tuple[int, ...], object], n1: int, n2: int) -> Chain:
    """Coefficient of z1^n1 z2^n2 in F(sum_ab t_ab z1^a z2^b), Taylor basis."""
    if n1 < 0 or n2 < 0:
        raise ValueError("mode indices must be non-negative")
    out: Chain = {}
    for e, c in poly.items():
        # truncated jet polynomial: (a, b) -> chain
        acc = {(0, 0): {OperatorMonomial(): as_rational(c)}}
        for i, k in enumerate(e, start=1):
            for _ in range(k):
                nxt: dict = {}
                for (a, b), ch in acc.items():
                    for da in range(n1 - a + 1):
                        for db in range(n2 - b + 1):
                            t = {OperatorMonomial([(GeneratorLabel(GAMMA, (da, db), i), 1)]): 1}
                            key = (a + da, b + db)
                            nxt[key] = chain_add(nxt.get(key, {}), chain_mul(ch, t))
                acc = nxt
        for m, v in acc.get((n1, n2), {}).items():
            _add(out, m, v)
    return out


def _gamma_factor(mono: OperatorMonomial) -> int:
    f = 1
    for lab, k in mono.factors:
        if lab.kind == GAMMA:
            f *= (math.factorial(lab.mode[0]) * math.factorial(lab.mode[1])) ** k
    return f


def taylor_to_derivative(chain: Chain) -> Chain:
    """Rewrite t_{a,b} = gamma_{a,b} / (a! b!)."""
    return {m: as_rational(Fraction(c) / _gamma_factor(m)) for m, c in chain.items()}


def derivative_to_taylor(chain: Chain) -> Chain:
    """Rewrite gamma_{a,b} = a! b! t_{a,b}."""
    return {m: as_rational(c * _gamma_factor(m)) for m, c in chain.items()}


# ---------------------------------------------------------------------------
# the differential


class _DiffCache:
    def __init__(self, w: Superpotential):
        self.w = w
        self.partials = {i: w.partial(i) for i in range(1, w.n_vars + 1)}
        self.images: dict = {}

    def beta_image(self, lab: GeneratorLabel) -> Chain:
        if lab not in self.images:
            self.images[lab] = extended_observable(self.partials[lab.flavor], *lab.mode)
        return self.images[lab]


_CACHES: dict = {}


def _cache(w: Superpotential) -> _DiffCache:
    key = (tuple(w.terms.items()), w.n_vars, w.weights)
    if key not in _CACHES:
        _CACHES[key] = _DiffCache(w)
    return _CACHES[key]


def interaction_differential(w: Superpotential, monomial: OperatorMonomial) -> Chain:
    """Apply the odd derivation beta^i_{n+1} -> (dW/dx_i)~_n, gamma -> 0."""
    cache = _cache(w)
    for lab in monomial.betas:
        if lab.flavor > w.n_vars:
            raise ValueError(f"flavor {lab.flavor} exceeds the number of variables")
    betas = monomial.betas
    gammas = OperatorMonomial(monomial.gammas)
    out: Chain = {}
    for j, lab in enumerate(betas):
        rest = OperatorMonomial([(b, 1) for b in betas if b != lab])
        image = cache.beta_image(lab)
        for g, c in image.items():
            sign, m = rest * g
            sign2, m = m * gammas
            _add(out, m, (-1) ** j * sign * sign2 * c)
    return out


def apply_differential(w: Superpotential, chain: Chain) -> Chain:
    out: Chain = {}
    for m, c in chain.items():
        for m2, c2 in interaction_differential(w, m).items():
            _add(out, m2, c * c2)
    return out


# ---------------------------------------------------------------------------
# exact sparse linear algebra


@dataclass
class SparseMatrixQ:
    n_rows: int
    n_cols: int
    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (r, c), v in self.entries.items():
            if not (0 <= r < self.n_rows and 0 <= c < self.n_cols):
                raise IndexError(f"entry ({r}, {c}) outside a {self.n_rows}x{self.n_cols} matrix")
            v = as_rational(v)
            if v:
                clean[(r, c)] = v
        self.entries = clean

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence]) -> "SparseMatrixQ":
        n_cols = len(rows[0]) if rows else 0
        return cls(len(rows), n_cols, {(i, j): v for i, row in enumerate(rows) for j, v in enumerate(row)})

    def rows(self) -> list[dict]:
        out = [dict() for _ in range(self.n_rows)]
        for (r, c), v in self.entries.items():
            out[r][c] = v
        return out


def _integer_row(row: dict) -> dict:
    den = 1
    for v in row.values():
        if isinstance(v, Fraction):
            den = den * v.denominator // math.gcd(den, v.denominator)
    row = {c: int(v * den) for c, v in row.items()}
    g = 0
    for v in row.values():
        g = math.gcd(g, v)
    return {c: v // g for c, v in row.items()} if g > 1 else row


def exact_rank(m: SparseMatrixQ) -> int:
    """Rank over Q by fraction-free sparse elimination with content removal."""
    rows = [_integer_row(r) for r in m.rows() if r]
    pivots: dict[int, dict] = {}
    for row in rows:
        while row:
            col = min(row)
            piv = pivots.get(col)
            if piv is None:
                pivots[col] = row
                break
            a, b = piv[col], row[col]
            new = {}
            for c in set(row) | set(piv):
                v = a * row.get(c, 0) - b * piv.get(c, 0)
                if v:
                    new[c] = v
            row = _integer_row(new) if new else new
    return len(pivots)


# ---------------------------------------------------------------------------
# sector complexes


def _gamma_fill(labels: list, weight: tuple[int, int], charge: int, charges: list) -> Iterable[list]:
    """All multisets of gamma labels with exactly the given weight and charge."""
    def rec(i, a, b, ch, acc):
        if a == 0 and b == 0 and ch == 0:
            yield list(acc)
        if i == len(labels) or ch <= 0:
            return
        lab = labels[i]
        wa, wb = lab.mode
        c = charges[i]
        k = 1
        while k * wa <= a and k * wb <= b and k * c <= ch:
            acc.append((lab, k))
            yield from rec(i + 1, a - k * wa, b - k * wb, ch - k * c, acc)
            acc.pop()
            k += 1
        yield from rec(i + 1, a, b, ch, acc)

    yield from rec(0, weight[0], weight[1], charge, [])


def sector_basis(w: Superpotential, sector: tuple[int, int, int], degree: int) -> list[OperatorMonomial]:
    """Chain monomials with ``degree`` betas in the (A, B, C) sector."""
    A, B, C = sector
    n = w.n_vars
    wts = w.weights
    betas = [GeneratorLabel(BETA, (m1, m2), i) for m1 in range(A + 1) for m2 in range(B + 1)
             for i in range(1, n + 1) if C >= w.degree - wts[i - 1]]
    gammas = [GeneratorLabel(GAMMA, (a, b), i) for a in range(A + 1) for b in range(B + 1)
              for i in range(1, n + 1)]
    gcharges = [wts[g.flavor - 1] for g in gammas]
    out = []
    for combo in combinations(betas, degree):
        ma = sum(b.mode[0] for b in combo)
        mb = sum(b.mode[1] for b in combo)
        used = sum(w.degree - wts[b.flavor - 1] for b in combo)
        if ma > A or mb > B or used > C:
            continue
        for fill in _gamma_fill(gammas, (A - ma, B - mb), C - used, gcharges):
            out.append(OperatorMonomial([(b, 1) for b in combo] + fill))
    out.sort()
    return out


def differential_matrix(w: Superpotential, source: list, target: list) -> SparseMatrixQ:
    index = {m: i for i, m in enumerate(target)}
    entries = {}
    for j, m in enumerate(source):
        for m2, c in interaction_differential(w, m).items():
            if m2 not in index:
                raise AssertionError(f"differential left the sector: {m} -> {m2}")
            entries[(index[m2], j)] = c
    return SparseMatrixQ(len(target), len(source), entries)


def sector_cohomology(w: Superpotential, sector: tuple[int, int, int]) -> dict[int, tuple[int, int]]:
    """{degree: (chain dimension, cohomology dimension)} for one sector."""
    A, B, C = sector
    kmax = C // (w.degree - max(w.weights))
    bases = {k: sector_basis(w, sector, k) for k in range(kmax + 2)}
    ranks = {0: 0}
    for k in range(1, kmax + 2):
        ranks[k] = exact_rank(differential_matrix(w, bases[k], bases[k - 1])) if bases[k] and bases[k - 1] else 0
    out = {}
    for k in range(kmax + 1):
        dim = len(bases[k])
        if dim:
            out[k] = (dim, dim - ranks[k] - ranks[k + 1])
    return out


@dataclass
class CohomologyTable:
    """Cohomology dimensions keyed by (A, B, C, degree).

    (A, B) is the q-weight and C the z-charge of the degree-0 representative
    of the sector; a degree-k chain in it has q-weight (A+k, B+k) and z-charge
    C - D k.
    """

    potential: Superpotential
    max_weight: int
    z_max: int
    chains: dict = field(default_factory=dict)
    cohomology: dict = field(default_factory=dict)

    def sectors(self) -> list[tuple[int, int, int]]:
        return sorted({k[:3] for k in self.chains})

    def euler(self, sector) -> int:
        return sum((-1) ** k[3] * d for k, d in self.cohomology.items() if k[:3] == tuple(sector))

    def chain_euler(self, sector) -> int:
        return sum((-1) ** k[3] * d for k, d in self.chains.items() if k[:3] == tuple(sector))

    def parity_collapse(self) -> dict:
        """Z/2 collapse: (A, B, C) -> (even dimension, odd dimension)."""
        out: dict = {}
        for (a, b, c, k), d in self.cohomology.items():
            ev, od = out.get((a, b, c), (0, 0))
            out[(a, b, c)] = (ev + d, od) if k % 2 == 0 else (ev, od + d)
        return out

    def actual_charges(self, key) -> tuple[int, int, int]:
        a, b, c, k = key
        return a + k, b + k, c - self.potential.degree * k

    def euler_series(self, spec: FugacitySpec) -> TruncatedSeries:
        """Euler characteristics as a series in q^(A+B) p^(A-B) z^C."""
        terms = []
        for s in self.sectors():
            e = self.euler(s)
            if e:
                terms.append(({"q": s[0] + s[1], "p": s[0] - s[1], "z": s[2]}, e))
        out = {}
        for exps, c in terms:
            key = spec.scale(exps)
            if spec.in_box(key):
                out[key] = c
        return TruncatedSeries(spec, out)

    def rows(self) -> list[dict]:
        out = []
        for key in sorted(self.chains):
            qa, qb, z = self.actual_charges(key)
            out.append({
                "A": key[0], "B": key[1], "C": key[2], "degree": key[3],
                "q1": qa, "q2": qb, "z": z,
                "chain_dim": self.chains[key], "cohomology_dim": self.cohomology[key],
            })
        return out


def _sector_job(args):
    w, sector = args
    return sector, sector_cohomology(w, sector)


def cohomology_table(w: Superpotential, max_weight: int = 3, z_max: int = 6, threads: int = 1) -> CohomologyTable:
    """Cohomology of every sector with A + B <= max_weight and 0 <= C <= z_max."""
    if max_weight < 0 or z_max < 0:
        raise ValueError("bounds must be non-negative")
    sectors = [(a, s - a, c) for s in range(max_weight + 1) for a in range(s + 1) for c in range(z_max + 1)]
    jobs = [(w, s) for s in sectors]
    if threads > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(_sector_job, jobs, chunksize=4))
    else:
        results = [_sector_job(j) for j in jobs]
    table = CohomologyTable(w, max_weight, z_max)
    for sector, res in sorted(results):
        for k, (dim, h) in res.items():
            table.chains[sector + (k,)] = dim
            table.cohomology[sector + (k,)] = h
    return table
