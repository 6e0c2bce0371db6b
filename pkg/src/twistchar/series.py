"""Exact truncated multivariate Laurent series.

A series lives on a :class:`FugacitySpec`: a finite box of exponents, one
interval per variable, optionally cut further by a bound on the total degree
of a designated set of "mode" variables.  Exponents may be half-integers for
variables declared with lattice denominator 2; internally every exponent is
stored as an integer scaled by its variable's denominator.

Truncation simply discards exponents outside the box.  That is only sound when
no discarded term can be multiplied back into the box by a later factor; the
character builders in :mod:`twistchar.characters` therefore compute on a
widened working box and restrict at the end.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Callable, Iterable, Mapping

Exps = tuple  # tuple[int, ...] of scaled exponents


class SeriesError(ValueError):
    pass


def as_rational(x) -> int | Fraction:
    """Exact rational normalised to ``int`` when integral.  Floats are refused."""
    if isinstance(x, bool):
        return int(x)
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else x
    if isinstance(x, str):
        return as_rational(Fraction(x))
    raise TypeError(f"exact rational required, got {type(x).__name__}")


def rational_str(x) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class Variable:
    name: str
    denominator: int
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.denominator not in (1, 2):
            raise SeriesError(f"lattice denominator must be 1 or 2, got {self.denominator}")
        lo, hi = Fraction(self.lo), Fraction(self.hi)
        if lo > hi:
            raise SeriesError(f"empty range for {self.name}: {lo} > {hi}")
        for b in (lo, hi):
            if (b * self.denominator).denominator != 1:
                raise SeriesError(f"bound {b} of {self.name} is off its lattice")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def slo(self) -> int:
        return int(self.lo * self.denominator)

    @property
    def shi(self) -> int:
        return int(self.hi * self.denominator)


class FugacitySpec:
    """Ordered variables with per-variable exponent bounds and an optional
    total-degree bound over the mode variables."""

    def __init__(self, variables: Iterable, mode_vars: Iterable[str] = (), mode_bound=None):
        vs = []
        for v in variables:
            if not isinstance(v, Variable):
                name, den, lo, hi = v
                v = Variable(name, den, Fraction(lo), Fraction(hi))
            vs.append(v)
        self.variables: tuple[Variable, ...] = tuple(vs)
        self.names = tuple(v.name for v in vs)
        if len(set(self.names)) != len(self.names):
            raise SeriesError("duplicate variable names")
        self._index = {n: i for i, n in enumerate(self.names)}
        self.mode_vars = tuple(mode_vars)
        for n in self.mode_vars:
            if n not in self._index:
                raise SeriesError(f"mode variable {n} not in spec")
        self.mode_bound = None if mode_bound is None else Fraction(mode_bound)
        # doubled mode degree of a scaled exponent vector = sum e_i * (2 // den_i)
        self._mode_w = [
            (self._index[n], 2 // self.variables[self._index[n]].denominator)
            for n in self.mode_vars
        ]
        self._mode_cap = None if self.mode_bound is None else int(2 * self.mode_bound)
        self._lo = tuple(v.slo for v in self.variables)
        self._hi = tuple(v.shi for v in self.variables)
        self._key = (
            tuple((v.name, v.denominator, v.lo, v.hi) for v in self.variables),
            self.mode_vars,
            self.mode_bound,
        )

    @classmethod
    def build(cls, ranges: Mapping[str, tuple], mode_vars=(), mode_bound=None, halves=()):
        """``ranges`` maps name -> (lo, hi); names in ``halves`` get denominator 2."""
        return cls(
            [(n, 2 if n in halves else 1, lo, hi) for n, (lo, hi) in ranges.items()],
            mode_vars,
            mode_bound,
        )

    def __eq__(self, other):
        return isinstance(other, FugacitySpec) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        parts = [f"{v.name}∈[{v.lo},{v.hi}]" + ("/2" if v.denominator == 2 else "") for v in self.variables]
        if self.mode_bound is not None:
            parts.append(f"deg({','.join(self.mode_vars)})≤{self.mode_bound}")
        return f"FugacitySpec({', '.join(parts)})"

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise SeriesError(f"variable {name!r} not in spec") from None

    def has(self, *names: str) -> bool:
        return all(n in self._index for n in names)

    def require(self, *names: str) -> None:
        missing = [n for n in names if n not in self._index]
        if missing:
            raise SeriesError(f"spec missing required variable(s): {', '.join(missing)}")

    def var(self, name: str) -> Variable:
        return self.variables[self.index(name)]

    def in_box(self, e: Exps) -> bool:
        for x, lo, hi in zip(e, self._lo, self._hi):
            if x < lo or x > hi:
                return False
        if self._mode_cap is not None:
            if sum(e[i] * w for i, w in self._mode_w) > self._mode_cap:
                return False
        return True

    def mode_degree(self, e: Exps) -> Fraction:
        return Fraction(sum(e[i] * w for i, w in self._mode_w), 2)

    def scale(self, exps: Mapping[str, object]) -> Exps:
        """Scaled exponent tuple from a name -> rational-exponent mapping."""
        out = [0] * len(self.variables)
        for name, val in exps.items():
            i = self.index(name)
            s = Fraction(val) * self.variables[i].denominator
            if s.denominator != 1:
                raise SeriesError(f"lattice violation: {name}^{val}")
            out[i] = int(s)
        return tuple(out)

    def unscale(self, e: Exps) -> dict[str, Fraction]:
        return {v.name: Fraction(x, v.denominator) for v, x in zip(self.variables, e)}

    def with_ranges(self, mode_bound="keep", **ranges) -> "FugacitySpec":
        """Copy with some variable ranges (and optionally the mode bound) replaced."""
        vs = []
        for v in self.variables:
            if v.name in ranges:
                lo, hi = ranges[v.name]
                vs.append(Variable(v.name, v.denominator, Fraction(lo), Fraction(hi)))
            else:
                vs.append(v)
        mb = self.mode_bound if mode_bound == "keep" else mode_bound
        return FugacitySpec(vs, self.mode_vars, mb)

    def without(self, *names: str) -> "FugacitySpec":
        vs = [v for v in self.variables if v.name not in names]
        mv = [n for n in self.mode_vars if n not in names]
        return FugacitySpec(vs, mv, self.mode_bound if mv else None)

    def contains_box(self, other: "FugacitySpec") -> bool:
        """True if every exponent admissible in ``other`` is admissible here (same variables)."""
        if self.names != other.names:
            return False
        for a, b in zip(self.variables, other.variables):
            if a.denominator != b.denominator or a.lo > b.lo or a.hi < b.hi:
                return False
        if self.mode_bound is None:
            return True
        if self.mode_vars != other.mode_vars:
            return False
        if other.mode_bound is None:
            return False
        return other.mode_bound <= self.mode_bound

    def to_json(self) -> dict:
        return {
            "variables": [
                {"name": v.name, "denominator": v.denominator, "min": rational_str(v.lo), "max": rational_str(v.hi)}
                for v in self.variables
            ],
            "mode_variables": list(self.mode_vars),
            "mode_bound": None if self.mode_bound is None else rational_str(self.mode_bound),
        }

    @classmethod
    def from_json(cls, data: dict) -> "FugacitySpec":
        vs = [(d["name"], int(d["denominator"]), Fraction(d["min"]), Fraction(d["max"])) for d in data["variables"]]
        mb = data.get("mode_bound")
        return cls(vs, data.get("mode_variables", ()), None if mb is None else Fraction(mb))


class TruncatedSeries:
    """Immutable exact series on a fixed box.  ``terms`` maps scaled exponent
    tuples to rationals; zero coefficients and out-of-box exponents are dropped."""

    __slots__ = ("spec", "terms")

    def __init__(self, spec: FugacitySpec, terms: Mapping[Exps, object] | None = None, *, _trusted=False):
        self.spec = spec
        if _trusted:
            self.terms = terms
            return
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(e)
            if len(e) != len(spec.variables):
                raise SeriesError("exponent length does not match spec")
            c = as_rational(c)
            if c and spec.in_box(e):
                clean[e] = c
        self.terms = clean

    # constructors -----------------------------------------------------------
    @classmethod
    def zero(cls, spec):
        return cls(spec, {}, _trusted=True)

    @classmethod
    def one(cls, spec):
        return cls.monomial(spec, {}, 1)

    @classmethod
    def monomial(cls, spec, exps: Mapping[str, object], coeff=1):
        return cls(spec, {spec.scale(exps): coeff})

    @classmethod
    def from_terms(cls, spec, items: Iterable[tuple[Mapping[str, object], object]]):
        out: dict = {}
        for exps, c in items:
            e = spec.scale(exps)
            out[e] = out.get(e, 0) + as_rational(c)
        return cls(spec, out)

    # inspection -------------------------------------------------------------
    def coefficient(self, **exps) -> int | Fraction:
        return self.terms.get(self.spec.scale(exps), 0)

    def constant_term(self):
        return self.terms.get((0,) * len(self.spec.variables), 0)

    def items(self):
        """(name -> exponent, coefficient) pairs in lexicographic exponent order."""
        for e in sorted(self.terms):
            yield self.spec.unscale(e), self.terms[e]

    def __len__(self):
        return len(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, TruncatedSeries):
            return self.spec == other.spec and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == TruncatedSeries(self.spec, {(0,) * len(self.spec.variables): other})
        return NotImplemented

    def __hash__(self):
        return hash((self.spec, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms)[:12]:
            mono = "*".join(
                f"{v.name}" + ("" if x == v.denominator else f"^{rational_str(Fraction(x, v.denominator))}")
                for v, x in zip(self.spec.variables, e) if x
            )
            parts.append(f"{rational_str(self.terms[e])}" + (f"*{mono}" if mono else ""))
        more = " + ..." if len(self.terms) > 12 else ""
        return " + ".join(parts) + more

    # ring operations --------------------------------------------------------
    def _check(self, other):
        if not isinstance(other, TruncatedSeries):
            other = TruncatedSeries(self.spec, {(0,) * len(self.spec.variables): other})
        if other.spec != self.spec:
            raise SeriesError("incompatible fugacity specs")
        return other

    def __add__(self, other):
        other = self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return TruncatedSeries(self.spec, out, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(self.spec, {e: -c for e, c in self.terms.items()}, _trusted=True)

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def scale(self, c) -> "TruncatedSeries":
        c = as_rational(c)
        if not c:
            return TruncatedSeries.zero(self.spec)
        return TruncatedSeries(self.spec, {e: as_rational(v * c) for e, v in self.terms.items()}, _trusted=True)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return multiply(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, n: int):
        if n < 0:
            return invert(self) ** (-n)
        result = TruncatedSeries.one(self.spec)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # cheap special cases used by the product builders -----------------------
    def mul_binomial(self, exps: Exps, c=-1) -> "TruncatedSeries":
        """self * (1 + c x^exps) in O(len(self))."""
        c = as_rational(c)
        spec = self.spec
        out = dict(self.terms)
        for e, v in self.terms.items():
            f = tuple(a + b for a, b in zip(e, exps))
            if spec.in_box(f):
                w = out.get(f, 0) + c * v
                if w:
                    out[f] = as_rational(w)
                else:
                    del out[f]
        return TruncatedSeries(spec, out, _trusted=True)

    def div_binomial(self, exps: Exps, c=-1) -> "TruncatedSeries":
        """self / (1 + c x^exps) by the recurrence r[e] = s[e] - c r[e - exps].

        Exponents are visited in increasing order of their projection on
        ``exps``, so r[e - exps] is final before r[e] is formed.  The box is
        convex, hence every intermediate point of a chain stays inside it.
        """
        if not any(exps):
            raise SeriesError("non-unit series")
        c = as_rational(c)
        spec = self.spec
        weight = lambda e: sum(a * b for a, b in zip(e, exps))  # noqa: E731
        out: dict = {}
        heap = [(weight(e), e) for e in self.terms]
        heapq.heapify(heap)
        seen = set(self.terms)
        while heap:
            _, e = heapq.heappop(heap)
            prev = tuple(a - b for a, b in zip(e, exps))
            v = self.terms.get(e, 0) - c * out.get(prev, 0)
            if v:
                out[e] = as_rational(v)
            nxt = tuple(a + b for a, b in zip(e, exps))
            if nxt not in seen and spec.in_box(nxt) and (v or nxt in self.terms):
                seen.add(nxt)
                heapq.heappush(heap, (weight(nxt), nxt))
        return TruncatedSeries(spec, out, _trusted=True)

    def restrict(self, spec: FugacitySpec) -> "TruncatedSeries":
        """Project onto a smaller box over the same variables."""
        if spec.names != self.spec.names or any(
            a.denominator != b.denominator for a, b in zip(spec.variables, self.spec.variables)
        ):
            raise SeriesError("incompatible fugacity specs")
        return TruncatedSeries(spec, {e: c for e, c in self.terms.items() if spec.in_box(e)}, _trusted=True)

    def adams(self, k: int) -> "TruncatedSeries":
        """Replace every variable v by v^k."""
        spec = self.spec
        out = {}
        for e, c in self.terms.items():
            f = tuple(k * a for a in e)
            if spec.in_box(f):
                out[f] = c
        return TruncatedSeries(spec, out, _trusted=True)

    def evaluate(self, values: Mapping[str, complex]) -> complex:
        """Numerically evaluate the truncated sum at the given point."""
        total = 0j
        vals = [complex(values[v.name]) for v in self.spec.variables]
        dens = [v.denominator for v in self.spec.variables]
        for e, c in self.terms.items():
            term = complex(Fraction(c))
            for x, val, d in zip(e, vals, dens):
                if x:
                    term *= val ** x if d == 1 else val ** (x / d)
            total += term
        return total

    # serialisation ----------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "spec": self.spec.to_json(),
            "terms": [
                {"exp": {n: rational_str(x) for n, x in exps.items()}, "coeff": rational_str(c)}
                for exps, c in self.items()
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), ensure_ascii=False)

    @classmethod
    def from_json(cls, data: dict) -> "TruncatedSeries":
        spec = FugacitySpec.from_json(data["spec"])
        out = {}
        for t in data["terms"]:
            e = spec.scale({n: Fraction(x) for n, x in t["exp"].items()})
            if not spec.in_box(e):
                raise SeriesError(f"term {t['exp']} lies outside the declared box")
            out[e] = as_rational(Fraction(t["coeff"]))
        return cls(spec, out)

    @classmethod
    def loads(cls, text: str) -> "TruncatedSeries":
        return cls.from_json(json.loads(text))


# ---------------------------------------------------------------------------
# operations


def multiply(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    if not isinstance(b, TruncatedSeries) or a.spec != b.spec:
        raise SeriesError("incompatible fugacity specs")
    if len(a.terms) < len(b.terms):
        a, b = b, a
    spec = a.spec
    out: dict = {}
    for eb, cb in b.terms.items():
        for ea, ca in a.terms.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            if spec.in_box(e):
                out[e] = out.get(e, 0) + ca * cb
    return TruncatedSeries(spec, out)


def _iteration_cap(spec: FugacitySpec) -> int:
    span = sum(v.shi - v.slo for v in spec.variables)
    if spec.mode_bound is not None:
        span += int(2 * spec.mode_bound)
    return 2 * span + 2


def invert(a: TruncatedSeries) -> TruncatedSeries:
    """Multiplicative inverse via the geometric series of 1 - a/a0."""
    c0 = a.constant_term()
    if not c0:
        raise SeriesError("non-unit series")
    spec = a.spec
    zero = (0,) * len(spec.variables)
    inv0 = Fraction(1, 1) / c0
    if len(a.terms) == 2:
        (e,) = [k for k in a.terms if k != zero]
        return TruncatedSeries.one(spec).scale(inv0).div_binomial(e, a.terms[e] * inv0)
    x = TruncatedSeries(spec, {e: -c * inv0 for e, c in a.terms.items() if e != zero})
    result = TruncatedSeries.one(spec)
    power = TruncatedSeries.one(spec)
    for _ in range(_iteration_cap(spec)):
        power = power * x
        if not power:
            return result.scale(inv0)
        result = result + power
    raise SeriesError("divergent inversion")


def divide(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    if a.spec != b.spec:
        raise SeriesError("incompatible fugacity specs")
    zero = (0,) * len(a.spec.variables)
    c0 = b.constant_term()
    if len(b.terms) == 2 and c0:
        (e,) = [k for k in b.terms if k != zero]
        return a.scale(Fraction(1) / c0).div_binomial(e, Fraction(b.terms[e]) / c0)
    if len(b.terms) == 1 and c0:
        return a.scale(Fraction(1) / c0)
    return a * invert(b)


def substitute(
    a: TruncatedSeries,
    rules: Mapping[str, tuple],
    target: FugacitySpec,
) -> TruncatedSeries:
    """Rewrite every monomial by ``rules`` and re-truncate to ``target``.

    ``rules`` maps a source variable to ``(coeff, {target_var: exponent})``;
    unmapped source variables pass through to the same-named target variable.
    A non-unit coefficient is only allowed for variables with integral
    exponents (the sign of a half-integer power is undefined).
    """
    src = a.spec
    images = []
    for v in src.variables:
        if v.name in rules:
            coeff, mono = rules[v.name]
            coeff = as_rational(coeff)
            img = {n: Fraction(x) for n, x in mono.items()}
            for n in img:
                target.index(n)
        else:
            if not target.has(v.name):
                images.append(None)
                continue
            coeff, img = 1, {v.name: Fraction(1)}
        if coeff != 1 and v.denominator != 1:
            raise SeriesError(f"signed rule on half-lattice variable {v.name}")
        images.append((coeff, v.denominator, img))
    out: dict = {}
    ntar = len(target.variables)
    for e, c in a.terms.items():
        exps = [Fraction(0)] * ntar
        coeff = Fraction(c)
        for x, image, v in zip(e, images, src.variables):
            if not x:
                continue
            if image is None:
                raise SeriesError(f"variable {v.name} has no image in the target spec")
            k, den, img = image
            power = Fraction(x, den)
            if k != 1:
                coeff *= Fraction(k) ** int(power)
            for n, y in img.items():
                exps[target.index(n)] += power * y
        scaled = []
        for val, tv in zip(exps, target.variables):
            s = val * tv.denominator
            if s.denominator != 1:
                raise SeriesError("lattice violation")
            scaled.append(int(s))
        f = tuple(scaled)
        if target.in_box(f):
            out[f] = out.get(f, 0) + coeff
    return TruncatedSeries(target, out)


Factor = TruncatedSeries | tuple  # series, or (numerator, denominator) pair


def lattice_product(
    factor: Callable[..., Factor],
    spec: FugacitySpec,
    skip: Callable[..., bool] | None = None,
    indices: Iterable[tuple] | None = None,
) -> TruncatedSeries:
    """Product of ``factor(*idx)`` over an index set, truncated to ``spec``.

    By default the index set is every (n1, n2) with n1 + n2 at most the spec's
    mode bound.  A factor may be a series or a ``(numerator, denominator)``
    pair; each must have constant term 1.  Factors equal to 1 after truncation
    are skipped, as are indices for which ``skip`` is true.
    """
    if indices is None:
        if spec.mode_bound is None:
            raise SeriesError("lattice_product needs explicit indices without a mode bound")
        nb = int(spec.mode_bound)
        indices = [(n1, s - n1) for s in range(nb + 1) for n1 in range(s + 1)]
    result = TruncatedSeries.one(spec)
    for idx in indices:
        if skip is not None and skip(*idx):
            continue
        f = factor(*idx)
        num, den = f if isinstance(f, tuple) else (f, None)
        for part in (num, den):
            if part is not None and part.constant_term() != 1:
                raise SeriesError("non-unital factor")
        if num is not None and num != 1:
            result = _times(result, num)
        if den is not None and den != 1:
            result = divide(result, den)
    return result


def _times(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    zero = (0,) * len(a.spec.variables)
    if len(b.terms) == 2 and b.constant_term() == 1:
        (e,) = [k for k in b.terms if k != zero]
        return a.mul_binomial(e, b.terms[e])
    return a * b


def _positive_functional(exps: list[Exps]) -> list[int] | None:
    """Integer vector with strictly positive pairing on every given exponent
    (perceptron iteration); None when none is found."""
    if not exps:
        return [0]
    n = len(exps[0])
    phi = [0] * n
    for e in exps:
        for i, x in enumerate(e):
            phi[i] += x
    for _ in range(10000):
        bad = [e for e in exps if sum(p * x for p, x in zip(phi, e)) <= 0]
        if not bad:
            g = 0
            for p in phi:
                g = gcd(g, p)
            return [p // g for p in phi] if g else phi
        for i, x in enumerate(bad[0]):
            phi[i] += x
    return None


def plethystic_exp(f: TruncatedSeries) -> TruncatedSeries:
    """PE[f] = exp(sum_k f(x^k)/k), evaluated literally.

    The exponential is formed with the Euler-derivation recurrence
    theta(E) = E * theta(g) for a grading theta that is positive on the support
    of the letters, so no factorisation of f is used.
    """
    spec = f.spec
    zero = (0,) * len(spec.variables)
    if f.terms.get(zero):
        raise SeriesError("PE undefined: nonzero constant term")
    if not f.terms:
        return TruncatedSeries.one(spec)
    phi = _positive_functional(list(f.terms))
    if phi is None:
        raise SeriesError("PE undefined: letters do not lie in an open half-space")
    g = TruncatedSeries.zero(spec)
    for k in range(1, _iteration_cap(spec) + 1):
        fk = f.adams(k)
        if not fk:
            break
        g = g + fk.scale(Fraction(1, k))
    weight = lambda e: sum(p * x for p, x in zip(phi, e))  # noqa: E731
    gt = [(e, weight(e) * c) for e, c in g.terms.items()]
    E: dict = {zero: 1}
    heap: list = []
    seen = {zero}

    def push_from(e):
        for d, _ in gt:
            n = tuple(a + b for a, b in zip(e, d))
            if n not in seen and spec.in_box(n):
                seen.add(n)
                heapq.heappush(heap, (weight(n), n))

    push_from(zero)
    while heap:
        w, e = heapq.heappop(heap)
        acc = Fraction(0)
        for d, wc in gt:
            prev = tuple(a - b for a, b in zip(e, d))
            v = E.get(prev)
            if v:
                acc += wc * v
        if acc:
            E[e] = as_rational(acc / w)
            push_from(e)
    return TruncatedSeries(spec, E)
