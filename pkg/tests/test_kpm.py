import numpy as np
import pytest

from netdos import (OperatorKind, ProbeKind, RecurrenceBlowupError, build_csr,
                    build_operator, chebyshev_values, dos_moments,
                    jackson_coefficients, make_probes, pdos_moments,
                    rescale_operator)
from netdos.pipeline import scaled_operator_for
from netdos.testkit import erdos_renyi, exact_spectrum, oracle_moments


def _scaled(g, kind=OperatorKind.NORMALIZED_ADJACENCY, seed=0):
    return scaled_operator_for(g, kind, seed=seed)


def test_jackson_j0_is_one():
    for m in (0, 1, 7, 500):
        assert jackson_coefficients(m)[0] == 1.0


def test_jackson_m1_second_coefficient_vanishes():
    j = jackson_coefficients(1)
    assert j[1] == pytest.approx(0.0, abs=1e-15)


def test_jackson_monotone_nonincreasing_in_unit_interval():
    j = jackson_coefficients(100)
    assert np.all(np.diff(j) <= 1e-15)
    assert np.all(j[:-1] > 0) and np.all(j <= 1.0)
    assert j[-1] == pytest.approx(0.0, abs=1e-15)  # analytically exact zero


def test_jackson_kernel_is_nonnegative():
    # The damped delta approximation must be a positive kernel.
    for m in (8, 64, 301):
        j = jackson_coefficients(m)
        u = np.linspace(0, np.pi, 4001)
        k = j[0] + 2 * np.sum(j[1:, None] * np.cos(
            np.arange(1, m + 1)[:, None] * u[None, :]), axis=0)
        assert k.min() > -1e-10


def test_dos_moment_zero_is_one(star4):
    sop = _scaled(star4)
    p = make_probes(4, 3, ProbeKind.RADEMACHER, seed=1)
    mom = dos_moments(sop, p, 0)
    assert mom.values.shape == (1,)
    assert mom.values[0] == pytest.approx(1.0, abs=1e-14)


def test_k3_first_two_moments_vanish(triangle):
    sop = _scaled(triangle)
    p = make_probes(3, 3, ProbeKind.STANDARD_BASIS, seed=0)
    mom = dos_moments(sop, p, 2)
    # spectrum {1, -1/2, -1/2}: mean T_1 = 0 and mean T_2 = 0
    assert mom.values[1] == pytest.approx(0.0, abs=1e-14)
    assert mom.values[2] == pytest.approx(0.0, abs=1e-14)


def test_p3_moments_match_closed_form(path3):
    sop = _scaled(path3)
    p = make_probes(3, 3, ProbeKind.STANDARD_BASIS, seed=0)
    mom = dos_moments(sop, p, 4)
    want = chebyshev_values(4, np.array([-1.0, 0.0, 1.0])).mean(axis=1)
    assert np.abs(mom.values - want).max() < 1e-13


def test_moment_exactness_against_eigenvalue_oracle():
    rng = np.random.default_rng(100)
    for kind in (OperatorKind.NORMALIZED_ADJACENCY, OperatorKind.LAPLACIAN):
        n = int(rng.integers(40, 120))
        g = erdos_renyi(n, 0.08, seed=int(rng.integers(1 << 30)))
        sop = _scaled(g, kind)
        p = make_probes(n, n, ProbeKind.STANDARD_BASIS, seed=0)
        mom = dos_moments(sop, p, 50)
        ev = exact_spectrum(sop.base).eigenvalues
        want = oracle_moments(sop.scale_map.to_scaled(ev), 50)
        assert np.abs(mom.values - want).max() < 1e-10


def test_pdos_zero_degree_moment_is_one(star4):
    sop = _scaled(star4)
    for kind in (ProbeKind.RADEMACHER, ProbeKind.GAUSSIAN, ProbeKind.HADAMARD):
        mom = pdos_moments(sop, make_probes(4, 3, kind, seed=2), 3)
        assert np.abs(mom.values[:, 0] - 1.0).max() < 1e-12


def test_p3_center_second_moment(path3):
    sop = _scaled(path3)
    p = make_probes(3, 3, ProbeKind.STANDARD_BASIS, seed=0)
    mom = pdos_moments(sop, p, 2)
    assert mom.values[1, 2] == pytest.approx(1.0, abs=1e-13)  # 2*(A~^2)_cc - 1


def test_star_leaf_first_moment_zero(star4):
    sop = _scaled(star4)
    p = make_probes(4, 4, ProbeKind.STANDARD_BASIS, seed=0)
    mom = pdos_moments(sop, p, 1)
    assert np.abs(mom.values[1:, 1]).max() < 1e-14  # no self-loops


def test_pdos_rows_average_to_global_moments():
    g = erdos_renyi(80, 0.06, seed=6)
    sop = _scaled(g)
    for kind in (ProbeKind.RADEMACHER, ProbeKind.HADAMARD, ProbeKind.STANDARD_BASIS):
        nz = g.n if kind is ProbeKind.STANDARD_BASIS else 12
        p = make_probes(g.n, nz, kind, seed=5)
        per_node = pdos_moments(sop, p, 25)
        global_ = dos_moments(sop, p, 25)
        assert np.abs(per_node.values.mean(axis=0) - global_.values).max() < 1e-10


def test_pdos_exact_probes_match_node_oracle():
    g = erdos_renyi(70, 0.08, seed=8)
    sop = _scaled(g, OperatorKind.NORMALIZED_LAPLACIAN)
    p = make_probes(g.n, g.n, ProbeKind.STANDARD_BASIS, seed=0)
    mom = pdos_moments(sop, p, 30)
    spec = exact_spectrum(sop.base, want_vectors=True)
    t = chebyshev_values(30, sop.scale_map.to_scaled(spec.eigenvalues))
    want = (spec.eigenvectors ** 2) @ t.T
    assert np.abs(mom.values - want).max() < 1e-10


def test_polynomial_integration_exactness():
    # sum_m c_m d_m must equal tr(f(H))/N for Chebyshev-coefficient f.
    g = erdos_renyi(50, 0.1, seed=12)
    sop = _scaled(g)
    p = make_probes(g.n, g.n, ProbeKind.STANDARD_BASIS, seed=0)
    m_max = 24
    mom = dos_moments(sop, p, m_max)
    rng = np.random.default_rng(3)
    coef = rng.standard_normal(m_max + 1)
    ev = sop.scale_map.to_scaled(exact_spectrum(sop.base).eigenvalues)
    f_vals = coef @ chebyshev_values(m_max, ev)
    want = f_vals.mean()
    # the dual-basis pairing carries a factor (2 - delta_m0)/2 ... the plain
    # coefficient pairing is sum_m coef_m * mean T_m(lambda_i)
    got = coef @ mom.values
    assert got == pytest.approx(want, abs=1e-8)


def test_statistical_moment_bound():
    g = erdos_renyi(300, 0.03, seed=2)
    sop = _scaled(g)
    for kind in (ProbeKind.RADEMACHER, ProbeKind.HADAMARD, ProbeKind.GAUSSIAN):
        nz = 16
        mom = dos_moments(sop, make_probes(g.n, nz, kind, seed=3), 200)
        assert np.abs(mom.values).max() <= 1.0 + 5.0 / np.sqrt(nz)


def test_recurrence_blowup_detected(path3):
    op = build_operator(path3, OperatorKind.LAPLACIAN)
    bad = rescale_operator(op, (0.0, 1.5))  # true range is [0, 3]
    p = make_probes(3, 2, ProbeKind.RADEMACHER, seed=0)
    with pytest.raises(RecurrenceBlowupError, match="margin"):
        dos_moments(bad, p, 600)


def test_hadamard_not_worse_than_rademacher_for_trace_noise():
    # the sign-flipped orthogonal construction should estimate global
    # moments at least as well as i.i.d. signs, on average over seeds
    g = erdos_renyi(256, 0.05, seed=4)
    sop = _scaled(g)
    exact = dos_moments(sop, make_probes(g.n, g.n, ProbeKind.STANDARD_BASIS, 0), 60)
    errs = {}
    for kind in (ProbeKind.HADAMARD, ProbeKind.RADEMACHER):
        e = []
        for seed in range(8):
            mom = dos_moments(sop, make_probes(g.n, 8, kind, seed=seed), 60)
            e.append(np.abs(mom.values - exact.values).max())
        errs[kind] = np.mean(e)
    assert errs[ProbeKind.HADAMARD] < 2.0 * errs[ProbeKind.RADEMACHER]


def test_per_node_statistical_moment_bound():
    g = erdos_renyi(150, 0.05, seed=8)
    sop = _scaled(g)
    nz = 16
    mom = pdos_moments(sop, make_probes(g.n, nz, ProbeKind.HADAMARD, seed=4), 120)
    assert np.abs(mom.values).max() <= 1.0 + 5.0 / np.sqrt(nz)
