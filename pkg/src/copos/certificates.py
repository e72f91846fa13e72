"""Independent checks and structural transformations of SOS certificates."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cones import SosCertificate, absorb_nonneg
from .graphs import Graph, m_matrix, stable_sets
from .polynomials import (
    HomPoly,
    Monomial,
    add_exponents,
    monomial_index,
    monomials,
    multiply,
    quad_form,
    scale_variables,
)


@dataclass
class VerifyReport:
    residual_inf: float
    min_gram_eig: float
    min_c: float
    min_multiplier_coeff: float
    multiplier_norm1: float
    passed: bool

    def to_json(self) -> dict:
        return {
            "residual_inf": self.residual_inf,
            "min_gram_eig": self.min_gram_eig,
            "min_c": self.min_c,
            "min_multiplier_coeff": self.min_multiplier_coeff,
            "multiplier_norm1": self.multiplier_norm1,
            "pass": self.passed,
        }


def reconstruct(cert: SosCertificate) -> HomPoly:
    """The right-hand side ``sum x^beta z^T P_beta z + sum c_A x^A`` as a polynomial."""
    n, deg = cert.nvars, cert.r + 2
    out: dict[Monomial, float] = {}
    for beta, mat in cert.gram.items():
        basis = monomials(n, cert.half_degree(beta))
        if mat.shape != (len(basis), len(basis)):
            raise ValueError(f"block {beta} has shape {mat.shape}, expected {len(basis)}")
        for a, za in enumerate(basis):
            for b, zb in enumerate(basis):
                v = mat[a, b]
                if v:
                    key = add_exponents(beta, add_exponents(za, zb))
                    out[key] = out.get(key, 0.0) + v
    for a, v in cert.c.items():
        out[a] = out.get(a, 0.0) + v
    return HomPoly(n, deg, out)


def verify(m, cert: SosCertificate, tol: float = 1e-6) -> VerifyReport:
    """Recompute ``multiplier * x^T M x - reconstruct(cert)`` and the sign conditions."""
    m = np.asarray(m, dtype=float)
    if m.shape != (cert.nvars, cert.nvars):
        raise ValueError(f"matrix of shape {m.shape} does not match a certificate in {cert.nvars} variables")
    if cert.multiplier.nvars != cert.nvars or cert.multiplier.degree != cert.r:
        raise ValueError("multiplier does not have the certificate's level and variable count")
    lhs = multiply(cert.multiplier, quad_form(m))
    diff = lhs - reconstruct(cert)
    resid = max((abs(c) for c in diff.terms.values()), default=0.0)
    eigs = [float(np.linalg.eigvalsh((p + p.T) / 2)[0]) for p in cert.gram.values()]
    min_eig = min(eigs, default=0.0)
    min_c = min(cert.c.values(), default=0.0)
    mult_min = min(cert.multiplier.terms.values(), default=0.0)
    norm = cert.multiplier.norm1()
    ok = resid <= tol and min_eig >= -tol and min_c >= -tol and mult_min >= -tol and norm > 0
    return VerifyReport(resid, min_eig, min_c, mult_min, norm, ok)


# transformations


def _basis_scaling(n: int, half: int, d: np.ndarray) -> np.ndarray:
    return np.array([np.prod(d ** np.array(z)) for z in monomials(n, half)])


def transform_scale(cert: SosCertificate, d) -> SosCertificate:
    """Certificate for ``D M D`` from one for ``M`` via ``x_i -> d_i x_i``."""
    d = np.asarray(d, dtype=float)
    if d.shape != (cert.nvars,):
        raise ValueError("scaling vector has the wrong length")
    if np.any(d <= 0):
        raise ValueError("scaling entries must be positive")
    mult = scale_variables(cert.multiplier, d)
    s = 1.0 / mult.norm1()
    gram = {}
    for beta, mat in cert.gram.items():
        w = _basis_scaling(cert.nvars, cert.half_degree(beta), d)
        gram[beta] = s * np.prod(d ** np.array(beta)) * (w[:, None] * mat * w[None, :])
    c = {a: s * v * np.prod(d ** np.array(a)) for a, v in cert.c.items()}
    return SosCertificate(cert.nvars, cert.r, mult.scale(s), gram, c)


def scale_value(cert: SosCertificate, factor: float) -> SosCertificate:
    """Certificate for ``factor * M`` (``factor >= 0``) with the same multiplier."""
    if factor < 0:
        raise ValueError("factor must be nonnegative")
    gram = {b: factor * p for b, p in cert.gram.items()}
    return SosCertificate(cert.nvars, cert.r, cert.multiplier, gram, {a: factor * v for a, v in cert.c.items()})


def embed(cert: SosCertificate, nvars: int, offset: int) -> SosCertificate:
    """Rename variable ``i`` to ``i + offset`` inside ``nvars`` variables."""
    n = cert.nvars
    if offset < 0 or offset + n > nvars:
        raise ValueError("embedding does not fit")

    def pad(mono: Monomial) -> Monomial:
        return (0,) * offset + tuple(mono) + (0,) * (nvars - offset - n)

    mult = HomPoly(nvars, cert.r, {pad(a): v for a, v in cert.multiplier.terms.items()})
    gram = {}
    for beta, mat in cert.gram.items():
        half = cert.half_degree(beta)
        big = monomial_index(nvars, half)
        pos = [big[pad(z)] for z in monomials(n, half)]
        out = np.zeros((len(big), len(big)))
        out[np.ix_(pos, pos)] = mat
        gram[pad(beta)] = out
    c = {pad(a): v for a, v in cert.c.items()}
    return SosCertificate(nvars, cert.r, mult, gram, c)


def _times_poly(cert: SosCertificate, q: HomPoly) -> tuple[dict[Monomial, np.ndarray], dict[Monomial, float]]:
    """Body of ``q * (cert identity)`` for ``q`` with nonnegative coefficients; multiplier untouched."""
    gram: dict[Monomial, np.ndarray] = {}
    leftover: dict[Monomial, float] = {}
    for alpha, qa in q.terms.items():
        if qa < 0:
            raise ValueError("can only multiply certificates by nonnegative polynomials")
        for beta, mat in cert.gram.items():
            key = add_exponents(alpha, beta)
            gram[key] = gram.get(key, 0.0) + qa * mat
        for a, v in cert.c.items():
            key = add_exponents(alpha, a)
            leftover[key] = leftover.get(key, 0.0) + qa * v
    extra = HomPoly(cert.nvars, cert.r + q.degree + 2, leftover)
    g2, c2 = absorb_nonneg(extra, cert.r + q.degree)
    for beta, mat in g2.items():
        gram[beta] = gram.get(beta, 0.0) + mat
    return gram, c2


def _merge(*bodies) -> tuple[dict[Monomial, np.ndarray], dict[Monomial, float]]:
    gram: dict[Monomial, np.ndarray] = {}
    c: dict[Monomial, float] = {}
    for g, cc in bodies:
        for b, mat in g.items():
            gram[b] = gram[b] + mat if b in gram else np.array(mat, dtype=float)
        for a, v in cc.items():
            c[a] = c.get(a, 0.0) + v
    return gram, c


def _normalized(nvars: int, r: int, mult: HomPoly, body) -> SosCertificate:
    gram, c = body
    s = 1.0 / mult.norm1()
    return SosCertificate(
        nvars, r, mult.scale(s), {b: s * p for b, p in gram.items()}, {a: s * v for a, v in c.items()}
    )


def _check_signs(cert: SosCertificate, tol: float = 1e-6) -> None:
    """The parts of verify that do not need the matrix."""
    if any(np.linalg.eigvalsh((p + p.T) / 2)[0] < -tol for p in cert.gram.values()):
        raise ValueError("certificate has a Gram block that is not psd")
    if min(cert.c.values(), default=0.0) < -tol or cert.multiplier.min_coeff() < -tol:
        raise ValueError("certificate has a negative squarefree or multiplier coefficient")


def transform_border(cert1: SosCertificate, cert2: SosCertificate) -> SosCertificate:
    """Certificate for ``diag(M1, M2)`` at level ``r1 + r2``."""
    _check_signs(cert1)
    _check_signs(cert2)
    n, m = cert1.nvars, cert2.nvars
    e1, e2 = embed(cert1, n + m, 0), embed(cert2, n + m, n)
    body = _merge(_times_poly(e1, e2.multiplier), _times_poly(e2, e1.multiplier))
    return _normalized(n + m, cert1.r + cert2.r, multiply(e1.multiplier, e2.multiplier), body)


def transform_sum(cert0: SosCertificate, cert1: SosCertificate) -> SosCertificate:
    """Certificate for ``M0 + M1`` at level ``r0 + r1``."""
    if cert0.nvars != cert1.nvars:
        raise ValueError("certificates live in different numbers of variables")
    _check_signs(cert0)
    _check_signs(cert1)
    body = _merge(_times_poly(cert0, cert1.multiplier), _times_poly(cert1, cert0.multiplier))
    return _normalized(cert0.nvars, cert0.r + cert1.r, multiply(cert0.multiplier, cert1.multiplier), body)


def psd_certificate(p) -> SosCertificate:
    """Level-0 certificate of a psd matrix: the matrix itself as the Gram block."""
    p = np.asarray(p, dtype=float)
    n = p.shape[0]
    return SosCertificate(n, 0, HomPoly.constant(n), {(0,) * n: p.copy()}, {})


def zero_certificate(n: int, r: int = 0) -> SosCertificate:
    from .polynomials import normalize_one, simplex_power

    return SosCertificate(n, r, normalize_one(simplex_power(n, r)), {}, {})


# zeros and kernels


def form_zeros(g: Graph) -> list[np.ndarray]:
    """``chi^S / alpha`` for every maximum stable set ``S``; each is a zero of ``x^T M_G x``."""
    a = g.alpha
    if a == 0:
        return []
    mg = m_matrix(g)
    out = []
    for s in stable_sets(g, "maximum_only").all:
        chi = np.zeros(g.n, dtype=int)
        chi[list(s)] = 1
        # integer check before dividing by alpha
        if int(chi @ mg.astype(int) @ chi) != 0:
            raise AssertionError(f"indicator of {sorted(s)} is not a zero of the graph form")
        out.append(chi / a)
    return out


@dataclass
class KernelReport:
    max_norm: float
    checks: list[dict] = field(default_factory=list)
    passed: bool = True

    def to_json(self) -> dict:
        return {"max_norm": self.max_norm, "pass": self.passed, "checks": self.checks}


def kernel_check(m, cert: SosCertificate, zeros, tol: float = 1e-5) -> KernelReport:
    """``||P_beta a||_inf`` for every zero ``a`` and every block with ``supp(beta)`` inside ``supp(a)``."""
    m = np.asarray(m, dtype=float)
    checks = []
    worst = 0.0
    for k, a in enumerate(zeros):
        a = np.asarray(a, dtype=float)
        if np.any(a < 0):
            raise ValueError(f"zero {k} has negative entries")
        val = float(a @ m @ a)
        if abs(val) > tol:
            raise ValueError(f"vector {k} is not a zero of the form (value {val:.3g})")
        supp = set(np.flatnonzero(a > 0))
        for beta, mat in cert.gram.items():
            if cert.half_degree(beta) != 1:
                continue
            if {i for i, e in enumerate(beta) if e} <= supp:
                norm = float(np.max(np.abs(mat @ a)))
                worst = max(worst, norm)
                checks.append({"zero": k, "beta": list(beta), "norm": norm})
    return KernelReport(worst, checks, worst <= tol)
