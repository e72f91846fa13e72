import copy

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from copos.certificates import (
    form_zeros,
    kernel_check,
    psd_certificate,
    reconstruct,
    scale_value,
    transform_border,
    transform_scale,
    transform_sum,
    verify,
    zero_certificate,
)
from copos.cones import SosCertificate, horn_matrix, q_membership, qtilde_membership
from copos.graphs import Graph, complete, cycle, disjoint_union, g_k, m_matrix
from copos.polynomials import HomPoly

H = horn_matrix()


@pytest.fixture(scope="module")
def horn_cert():
    v = q_membership(H, 1)
    assert v.member
    return v.certificate


def block_diag(a, b):
    out = np.zeros((len(a) + len(b),) * 2)
    out[: len(a), : len(a)] = a
    out[len(a) :, len(a) :] = b
    return out


def random_psd(rng, n):
    b = rng.normal(size=(n, n))
    return b @ b.T / n


def test_verify_examples(horn_cert):
    rep = verify(H, horn_cert)
    assert rep.passed and rep.residual_inf <= 1e-6
    bad = copy.deepcopy(horn_cert)
    key = next(iter(bad.c))
    bad.c[key] = -abs(bad.c[key]) - 1e-3
    rep = verify(H, bad)
    assert not rep.passed and rep.min_c < -1e-6
    assert verify(np.zeros((3, 3)), SosCertificate(3, 1, HomPoly.linear([1, 0, 0]))).passed


def test_verify_dimension_mismatch(horn_cert):
    with pytest.raises(ValueError):
        verify(np.eye(4), horn_cert)


def test_verify_rejects_wrong_matrix(horn_cert):
    rep = verify(H + 0.1 * np.ones((5, 5)), horn_cert)
    assert not rep.passed and rep.residual_inf > 1e-3


def test_report_json_keys(horn_cert):
    assert set(verify(H, horn_cert).to_json()) >= {"residual_inf", "min_gram_eig", "min_c", "pass"}


def test_transform_scale_examples(horn_cert):
    same = transform_scale(horn_cert, np.ones(5))
    assert same.multiplier == horn_cert.multiplier
    for beta in horn_cert.gram:
        assert np.allclose(same.gram[beta], horn_cert.gram[beta])
    d = np.array([1, 2, 1, 1, 1.0])
    assert verify(np.diag(d) @ H @ np.diag(d), transform_scale(horn_cert, d)).passed
    rng = np.random.default_rng(0)
    p = random_psd(rng, 4)
    d = rng.uniform(0.2, 3, 4)
    assert verify(np.diag(d) @ p @ np.diag(d), transform_scale(psd_certificate(p), d)).passed


def test_transform_scale_rejects_nonpositive(horn_cert):
    with pytest.raises(ValueError):
        transform_scale(horn_cert, [1, 0, 1, 1, 1])
    with pytest.raises(ValueError):
        transform_scale(horn_cert, [1, 1])


def test_transform_border_examples(horn_cert):
    bordered = transform_border(horn_cert, zero_certificate(1))
    assert bordered.r == 1
    assert verify(block_diag(H, np.zeros((1, 1))), bordered).passed
    rng = np.random.default_rng(1)
    p1, p2 = random_psd(rng, 3), random_psd(rng, 2)
    both = transform_border(psd_certificate(p1), psd_certificate(p2))
    assert both.r == 0 and verify(block_diag(p1, p2), both).passed
    hh = transform_border(horn_cert, horn_cert)
    assert hh.r == 2 and verify(block_diag(H, H), hh).passed


def test_transform_border_rejects_broken_input(horn_cert):
    bad = copy.deepcopy(horn_cert)
    beta = next(iter(bad.gram))
    bad.gram[beta] = -np.eye(5)
    with pytest.raises(ValueError):
        transform_border(bad, zero_certificate(1))


def test_transform_sum_examples(horn_cert):
    lifted = transform_sum(horn_cert, zero_certificate(5, 1))
    assert lifted.r == 2 and verify(H, lifted).passed
    rng = np.random.default_rng(2)
    p0, p1 = random_psd(rng, 4), random_psd(rng, 4)
    s = transform_sum(psd_certificate(p0), psd_certificate(p1))
    assert s.r == 0 and verify(p0 + p1, s).passed
    with pytest.raises(ValueError):
        transform_sum(psd_certificate(p0), horn_cert)


def test_sum_decomposition_of_disjoint_union(horn_cert):
    # M_{G+H} = (1 + aH/aG) (M_G + 0) + (1 + aG/aH) (0 + M_H) + R with R psd;
    # here G = C5, H = K1 so M_H = 0
    g = disjoint_union(cycle(5), complete(1))
    target = m_matrix(g)
    a_g, a_h = 2, 1
    r = np.zeros((6, 6))
    r[:5, :5] = a_h / a_g
    r[5, 5] = a_g / a_h
    r[:5, 5] = r[5, :5] = -1
    assert np.linalg.eigvalsh(r)[0] >= -1e-12
    first = scale_value(transform_border(horn_cert, zero_certificate(1)), 1 + a_h / a_g)
    cert = transform_sum(first, psd_certificate(r))
    assert cert.r == 1
    assert verify(target, cert).passed


def test_form_zeros_examples():
    zs = form_zeros(cycle(5))
    assert len(zs) == 5
    assert all(sorted(z.tolist()) == [0, 0, 0, 0.5, 0.5] for z in zs)
    zs = form_zeros(complete(4))
    assert sorted(map(tuple, zs)) == sorted(map(tuple, np.eye(4)))
    zs = form_zeros(g_k(2))
    assert zs and all(abs(z.sum() - 1) < 1e-12 and np.count_nonzero(z) == 3 for z in zs)


def test_kernel_check_examples(horn_cert):
    rep = kernel_check(H, horn_cert, form_zeros(cycle(5)))
    assert rep.passed and rep.checks
    rng = np.random.default_rng(4)
    pd = random_psd(rng, 4) + np.eye(4)
    assert kernel_check(pd, psd_certificate(pd), []).passed
    broken = copy.deepcopy(horn_cert)
    z = form_zeros(cycle(5))[0]
    beta = next(b for b in broken.gram if {i for i, e in enumerate(b) if e} <= set(np.flatnonzero(z)))
    broken.gram[beta] = broken.gram[beta] + 0.1 * np.eye(5)
    assert not kernel_check(H, broken, [z]).passed


def test_kernel_check_rejects_non_zero(horn_cert):
    with pytest.raises(ValueError):
        kernel_check(H, horn_cert, [np.ones(5) / 5])


def test_qtilde_kernel():
    v = qtilde_membership(H, 1)
    assert kernel_check(H, v.certificate, form_zeros(cycle(5))).passed


def test_reconstruct_degree(horn_cert):
    rec = reconstruct(horn_cert)
    assert rec.degree == 3 and rec.nvars == 5


# properties


@given(st.integers(0, 10_000))
def test_scale_preserves_validity(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 5))
    m = random_psd(rng, n) + np.abs(rng.normal(size=(n, n))) * 0.3
    m = (m + m.T) / 2
    v = q_membership(m, int(rng.integers(0, 2)))
    if not v.member:
        return
    assert verify(m, v.certificate).passed
    d = rng.uniform(0.5, 2.0, n)
    dmd = np.diag(d) @ m @ np.diag(d)
    assert verify(dmd, transform_scale(v.certificate, d)).passed


@given(st.integers(0, 10_000))
def test_border_preserves_validity(seed):
    rng = np.random.default_rng(seed)
    n1, n2 = int(rng.integers(1, 4)), int(rng.integers(1, 4))
    m1 = random_psd(rng, n1) + np.diag(rng.uniform(0, 1, n1))
    m2 = random_psd(rng, n2)
    c1 = q_membership(m1, int(rng.integers(0, 2))).certificate
    c2 = q_membership(m2, 0).certificate
    assert verify(m1, c1).passed and verify(m2, c2).passed
    out = transform_border(c1, c2)
    assert verify(block_diag(m1, m2), out).passed


@given(st.integers(1, 7), st.integers(0, 200))
def test_stable_set_form_values_are_exact(n, seed):
    rng = np.random.default_rng(seed)
    edges = {(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.4}
    g = Graph(n, frozenset(edges))
    for z in form_zeros(g):
        chi = np.rint(z * g.alpha).astype(int)
        assert int(chi @ m_matrix(g).astype(int) @ chi) == 0
