"""Sparse homogeneous polynomials over exponent tuples.

Coefficients are floats. A :class:`HomPoly` only ever holds monomials of one
degree, which keeps products of forms, multipliers and their coefficient
matching straightforward.
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

Monomial = tuple[int, ...]

GROUP_SIZE_CAP = 100_000


@lru_cache(maxsize=None)
def monomials(n: int, degree: int) -> tuple[Monomial, ...]:
    """All exponent tuples of length ``n`` and total ``degree``, lex-descending.

    For a fixed degree this is the graded-lex order; degree one gives
    ``e_0, e_1, ..., e_{n-1}``.
    """
    if n == 0:
        return ((),) if degree == 0 else ()
    out = []
    for first in range(degree, -1, -1):
        for rest in monomials(n - 1, degree - first):
            out.append((first,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def monomial_index(n: int, degree: int) -> dict[Monomial, int]:
    return {m: k for k, m in enumerate(monomials(n, degree))}


def glex_key(mono: Monomial) -> tuple:
    return (sum(mono), tuple(-e for e in mono))


def add_exponents(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))


def unit(n: int, i: int, power: int = 1) -> Monomial:
    e = [0] * n
    e[i] = power
    return tuple(e)


def is_squarefree(mono: Monomial) -> bool:
    return all(e <= 1 for e in mono)


def support(mono: Monomial) -> frozenset[int]:
    return frozenset(i for i, e in enumerate(mono) if e)


class HomPoly:
    """Homogeneous polynomial ``sum c_a x^a`` in ``nvars`` variables."""

    __slots__ = ("nvars", "degree", "terms")

    def __init__(self, nvars: int, degree: int, terms: Mapping[Monomial, float] | None = None):
        self.nvars = nvars
        self.degree = degree
        clean: dict[Monomial, float] = {}
        for mono, c in (terms or {}).items():
            mono = tuple(int(e) for e in mono)
            if len(mono) != nvars or sum(mono) != degree or min(mono, default=0) < 0:
                raise ValueError(f"monomial {mono} does not have {nvars} variables and degree {degree}")
            c = float(c)
            if c != 0.0:
                clean[mono] = clean.get(mono, 0.0) + c
        self.terms = {m: clean[m] for m in sorted(clean, key=glex_key) if clean[m] != 0.0}

    # construction helpers

    @classmethod
    def constant(cls, nvars: int, value: float = 1.0) -> HomPoly:
        return cls(nvars, 0, {(0,) * nvars: value})

    @classmethod
    def zero(cls, nvars: int, degree: int) -> HomPoly:
        return cls(nvars, degree, {})

    @classmethod
    def linear(cls, coeffs: Sequence[float]) -> HomPoly:
        n = len(coeffs)
        return cls(n, 1, {unit(n, i): c for i, c in enumerate(coeffs)})

    # basic protocol

    def __repr__(self) -> str:
        if not self.terms:
            return f"HomPoly(0; n={self.nvars}, d={self.degree})"
        parts = []
        for mono, c in self.terms.items():
            factors = [f"x{i}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(mono) if e]
            parts.append(f"{c:g}" + ("*" + "*".join(factors) if factors else ""))
        return " + ".join(parts)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HomPoly):
            return NotImplemented
        return (self.nvars, self.degree, self.terms) == (other.nvars, other.degree, other.terms)

    def __getitem__(self, mono: Monomial) -> float:
        return self.terms.get(tuple(mono), 0.0)

    def __len__(self) -> int:
        return len(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def _check_compatible(self, other: HomPoly) -> None:
        if self.nvars != other.nvars:
            raise ValueError(f"variable count mismatch: {self.nvars} vs {other.nvars}")

    def __add__(self, other: HomPoly) -> HomPoly:
        self._check_compatible(other)
        if other.degree != self.degree and not (other.is_zero() or self.is_zero()):
            raise ValueError("cannot add polynomials of different degrees")
        if self.is_zero():
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0.0) + c
        return HomPoly(self.nvars, self.degree, out)

    def __neg__(self) -> HomPoly:
        return HomPoly(self.nvars, self.degree, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: HomPoly) -> HomPoly:
        return self + (-other)

    def scale(self, factor: float) -> HomPoly:
        return HomPoly(self.nvars, self.degree, {m: factor * c for m, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, HomPoly):
            return multiply(self, other)
        return self.scale(float(other))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> HomPoly:
        out = HomPoly.constant(self.nvars)
        for _ in range(k):
            out = multiply(out, self)
        return out

    def norm1(self) -> float:
        return float(sum(abs(c) for c in self.terms.values()))

    def min_coeff(self) -> float:
        """Smallest coefficient, counting absent monomials as zero."""
        if not self.terms:
            return 0.0
        low = min(self.terms.values())
        if len(self.terms) < math.comb(self.nvars + self.degree - 1, self.degree):
            low = min(low, 0.0)
        return low

    def evaluate(self, x: Sequence[float]) -> float:
        x = np.asarray(x, dtype=float)
        return float(sum(c * np.prod(x ** np.array(m)) for m, c in self.terms.items()))

    def to_vector(self) -> np.ndarray:
        """Dense coefficient vector in the order of :func:`monomials`."""
        idx = monomial_index(self.nvars, self.degree)
        v = np.zeros(len(idx))
        for m, c in self.terms.items():
            v[idx[m]] = c
        return v

    def to_json(self) -> dict:
        return {
            "nvars": self.nvars,
            "degree": self.degree,
            "terms": [{"exp": list(m), "c": float(f"{c:.12g}")} for m, c in self.terms.items()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> HomPoly:
        return cls(
            int(data["nvars"]),
            int(data["degree"]),
            {tuple(t["exp"]): t["c"] for t in data["terms"]},
        )


def quad_form(m) -> HomPoly:
    """``x^T M x`` as a degree-2 polynomial."""
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    terms: dict[Monomial, float] = {}
    for i in range(n):
        if m[i, i]:
            terms[unit(n, i, 2)] = m[i, i]
        for j in range(i + 1, n):
            c = m[i, j] + m[j, i]
            if c:
                e = [0] * n
                e[i] = e[j] = 1
                terms[tuple(e)] = c
    return HomPoly(n, 2, terms)


def multiply(p: HomPoly, q: HomPoly) -> HomPoly:
    p._check_compatible(q)
    out: dict[Monomial, float] = {}
    for a, ca in p.terms.items():
        for b, cb in q.terms.items():
            m = add_exponents(a, b)
            out[m] = out.get(m, 0.0) + ca * cb
    return HomPoly(p.nvars, p.degree + q.degree, out)


def product(polys: Iterable[HomPoly], nvars: int) -> HomPoly:
    out = HomPoly.constant(nvars)
    for p in polys:
        out = multiply(out, p)
    return out


def simplex_power(n: int, r: int) -> HomPoly:
    """Multinomial expansion of ``(x_0 + ... + x_{n-1})^r``."""
    terms = {}
    for mono in monomials(n, r):
        c = math.factorial(r)
        for e in mono:
            c //= math.factorial(e)
        terms[mono] = float(c)
    return HomPoly(n, r, terms)


def substitute_positive(p: HomPoly, mapping: Sequence[tuple[int, float]], nvars: int | None = None) -> HomPoly:
    """Substitute ``x_i -> c_i * x_{target_i}`` for every variable ``i``.

    ``mapping[i] = (target_i, c_i)`` with ``c_i > 0``. Targets may coincide, in
    which case coefficients are merged additively.
    """
    if len(mapping) != p.nvars:
        raise ValueError("mapping must cover every variable")
    if any(c <= 0 for _, c in mapping):
        raise ValueError("substitution factors must be positive")
    nv = nvars if nvars is not None else p.nvars
    out: dict[Monomial, float] = {}
    for mono, coef in p.terms.items():
        e = [0] * nv
        for i, k in enumerate(mono):
            if k:
                tgt, c = mapping[i]
                e[tgt] += k
                coef *= c**k
        key = tuple(e)
        out[key] = out.get(key, 0.0) + coef
    return HomPoly(nv, p.degree, out)


def scale_variables(p: HomPoly, d: Sequence[float]) -> HomPoly:
    return substitute_positive(p, [(i, float(c)) for i, c in enumerate(d)])


def normalize_one(p: HomPoly) -> HomPoly:
    norm = p.norm1()
    if norm == 0:
        raise ValueError("cannot normalize the zero polynomial")
    return p.scale(1.0 / norm)


def is_nonneg_coeffs(p: HomPoly, tol: float = 0.0) -> bool:
    return all(c >= -tol for c in p.terms.values())


def permute(p: HomPoly, perm: Sequence[int]) -> HomPoly:
    """``p^sigma(x) = p(x_sigma(0), ..., x_sigma(n-1))``."""
    out = {}
    for mono, c in p.terms.items():
        e = [0] * p.nvars
        for i, k in enumerate(mono):
            e[perm[i]] += k
        out[tuple(e)] = c
    return HomPoly(p.nvars, p.degree, out)


def group_closure(generators: Sequence[Sequence[int]], n: int, cap: int = GROUP_SIZE_CAP) -> list[tuple[int, ...]]:
    identity = tuple(range(n))
    gens = [tuple(g) for g in generators]
    for g in gens:
        if sorted(g) != list(identity):
            raise ValueError(f"{g} is not a permutation of range({n})")
    seen = {identity}
    frontier = [identity]
    while frontier:
        nxt = []
        for h in frontier:
            for g in gens:
                comp = tuple(g[h[i]] for i in range(n))
                if comp not in seen:
                    seen.add(comp)
                    if len(seen) > cap:
                        raise OverflowError(f"generated group exceeds {cap} elements")
                    nxt.append(comp)
        frontier = nxt
    return sorted(seen)


def symmetrize(p: HomPoly, generators: Sequence[Sequence[int]], cap: int = GROUP_SIZE_CAP) -> HomPoly:
    """Group average of ``p`` over the group generated by ``generators``, unit 1-norm."""
    group = group_closure(generators, p.nvars, cap)
    acc = HomPoly.zero(p.nvars, p.degree)
    for g in group:
        acc = acc + permute(p, g)
    return normalize_one(acc.scale(1.0 / len(group)))


def squarefree_monomials(n: int, degree: int) -> list[Monomial]:
    out = []
    for combo in itertools.combinations(range(n), degree):
        e = [0] * n
        for i in combo:
            e[i] = 1
        out.append(tuple(e))
    return sorted(out, key=glex_key)
