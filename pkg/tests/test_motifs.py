import numpy as np
import pytest

from netdos import (MotifError, MotifKind, OperatorKind, ProbeKind, build_csr,
                    build_operator, detect_motifs, dos_moments, filter_probes,
                    make_probes, motif_eigenvalue, motif_eigenvectors)
from netdos.kpm import chebyshev_values
from netdos.motifs import MotifInstance
from netdos.pipeline import scaled_operator_for
from netdos.testkit import dense_matrix, erdos_renyi, preferential_attachment


def _as_dense(vec, n):
    u = np.zeros(n)
    for k, v in vec.items():
        u[k] = v
    return u


def _check_instance(inst, g, kind):
    h = dense_matrix(build_operator(g, kind))
    vecs = [_as_dense(v, g.n) for v in inst.eigvecs]
    for i, u in enumerate(vecs):
        assert np.linalg.norm(h @ u - inst.eigenvalue * u) <= 1e-10
        assert abs(u @ u - 1.0) <= 1e-12
        for v in vecs[i + 1:]:
            assert abs(u @ v) <= 1e-12
        assert set(np.flatnonzero(u)) <= set(inst.nodes)


def test_star_open_twin_class(star4):
    insts = detect_motifs(star4)
    twins = [i for i in insts if i.kind is MotifKind.OPEN_TWIN]
    assert len(twins) == 1
    assert twins[0].nodes == (1, 2, 3)
    assert twins[0].eigenvalue == 0.0
    assert twins[0].multiplicity == 2
    _check_instance(twins[0], star4, OperatorKind.NORMALIZED_ADJACENCY)


def test_pendant_pair_difference_vector():
    # two pendants on one node: eigenvector (+1, -1)/sqrt(2), eigenvalue 0
    g = build_csr([(0, 1), (0, 2), (0, 3), (3, 4)])
    insts = detect_motifs(g, kinds={MotifKind.OPEN_TWIN})
    assert len(insts) == 1
    inst = insts[0]
    assert inst.nodes == (1, 2)
    assert inst.eigenvalue == 0.0
    u = _as_dense(inst.eigvecs[0], g.n)
    assert np.allclose(np.sort(np.abs(u[[1, 2]])), [1 / np.sqrt(2)] * 2)
    assert u[1] * u[2] < 0
    _check_instance(inst, g, OperatorKind.NORMALIZED_ADJACENCY)


def test_closed_twin_pendant_triangle():
    g = build_csr([(0, 1), (0, 2), (1, 2), (0, 3)])
    insts = detect_motifs(g, kinds={MotifKind.CLOSED_TWIN})
    assert len(insts) == 1
    inst = insts[0]
    assert inst.nodes == (1, 2)
    assert inst.eigenvalue == pytest.approx(-0.5)
    _check_instance(inst, g, OperatorKind.NORMALIZED_ADJACENCY)


def test_dangling_chain_modes():
    # hub 0 with two pendant 2-chains and one extra neighbor
    g = build_csr([(0, 1), (1, 2), (0, 3), (3, 4), (0, 5)])
    insts = detect_motifs(g, kinds={MotifKind.DANGLING_TWO_CHAIN})
    assert len(insts) == 2
    lams = sorted(i.eigenvalue for i in insts)
    assert lams == pytest.approx([-1 / np.sqrt(2), 1 / np.sqrt(2)])
    for inst in insts:
        assert inst.nodes == (1, 2, 3, 4)
        _check_instance(inst, g, OperatorKind.NORMALIZED_ADJACENCY)


def test_motif_eigenpairs_for_all_operator_kinds():
    g = build_csr([(0, 1), (1, 2), (0, 3), (3, 4), (0, 5), (5, 6), (5, 7),
                   (6, 7), (5, 8), (5, 9)])
    for kind in OperatorKind:
        for inst in detect_motifs(g, operator=kind):
            _check_instance(inst, g, kind)


def test_weighted_twins_require_equal_weights():
    g = build_csr([(0, 1, 2.0), (0, 2, 2.0), (0, 3, 1.0)])
    insts = detect_motifs(g, kinds={MotifKind.OPEN_TWIN})
    assert len(insts) == 1
    assert insts[0].nodes == (1, 2)
    _check_instance(insts[0], g, OperatorKind.NORMALIZED_ADJACENCY)
    # laplacian eigenvalue is the shared weighted degree
    assert motif_eigenvalue(insts[0], OperatorKind.LAPLACIAN) == pytest.approx(2.0)


def test_no_motifs_in_clean_graph():
    c5 = build_csr([(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)])
    assert detect_motifs(c5) == []


def test_detection_complete_on_planted_pairs():
    rng = np.random.default_rng(77)
    found_all = 0
    for trial in range(100):
        n = int(rng.integers(20, 60))
        g0 = erdos_renyi(n, 0.15, seed=int(rng.integers(1 << 30)))
        u, v, w = g0.edge_list()
        edges = list(zip(u.tolist(), v.tolist()))
        # plant a duplicate pair: new nodes n, n+1 attached to the same hosts
        hosts = rng.choice(n, size=2, replace=False)
        for h in hosts.tolist():
            edges.append((h, n))
            edges.append((h, n + 1))
        g = build_csr(edges)
        insts = detect_motifs(g, kinds={MotifKind.OPEN_TWIN},
                              seed=int(rng.integers(1 << 30)))
        planted = [i for i in insts if {n, n + 1} <= set(i.nodes)]
        assert len(planted) == 1
        found_all += 1
        # soundness: every reported class has identical sorted neighbor lists
        for inst in insts:
            sigs = {tuple(g.neighbors(x).tolist()) for x in inst.nodes}
            assert len(sigs) == 1
    assert found_all == 100


def test_filter_probes_annihilates_difference(star4):
    insts = detect_motifs(star4, kinds={MotifKind.OPEN_TWIN})
    probes = make_probes(4, 6, ProbeKind.GAUSSIAN, seed=3)
    filtered, adj = filter_probes(probes, insts)
    z = filtered.columns
    assert np.abs(z[1] - z[2]).max() < 1e-12
    assert np.abs(z[2] - z[3]).max() < 1e-12
    assert adj.deflated_dim == 2
    assert adj.removed == {0.0: 2}


def test_filter_probes_empty_instances_noop():
    probes = make_probes(5, 3, ProbeKind.RADEMACHER, seed=1)
    filtered, adj = filter_probes(probes, [])
    assert filtered is probes
    assert adj.deflated_dim == 0


def test_star_filtered_moments_identity(star4):
    insts = detect_motifs(star4, kinds={MotifKind.OPEN_TWIN})
    sop = scaled_operator_for(star4, "normalized-adjacency")
    probes = make_probes(4, 4, ProbeKind.STANDARD_BASIS, seed=0)
    filtered, adj = filter_probes(probes, insts)
    m_unf = dos_moments(sop, probes, 30)
    m_fil = dos_moments(sop, filtered, 30, effective_dim=4 - adj.deflated_dim)
    t_at_zero = chebyshev_values(30, sop.scale_map.to_scaled(np.array([0.0])))[:, 0]
    want = (4 * m_unf.values - 2 * t_at_zero) / 2
    assert np.abs(m_fil.values - want).max() < 1e-12


def test_trace_decomposition_on_planted_graphs():
    rng = np.random.default_rng(5)
    for trial in range(6):
        g = preferential_attachment(int(rng.integers(80, 300)), 1,
                                    seed=int(rng.integers(1 << 30)))
        insts = detect_motifs(g)
        if not insts:
            continue
        sop = scaled_operator_for(g, "normalized-adjacency")
        probes = make_probes(g.n, g.n, ProbeKind.STANDARD_BASIS, seed=0)
        filtered, adj = filter_probes(probes, insts)
        r = adj.deflated_dim
        m_unf = dos_moments(sop, probes, 50)
        m_fil = dos_moments(sop, filtered, 50, effective_dim=g.n - r)
        removed = np.zeros(51)
        for lam, cnt in adj.removed.items():
            removed += cnt * chebyshev_values(
                50, sop.scale_map.to_scaled(np.array([lam])))[:, 0]
        lhs = g.n * m_unf.values
        rhs = (g.n - r) * m_fil.values + removed
        assert np.abs(lhs - rhs).max() < 1e-8


def test_overlapping_claims_resolved_deterministically():
    g = build_csr([(0, 1), (0, 2), (0, 3)])
    twin = detect_motifs(g, kinds={MotifKind.OPEN_TWIN})[0]
    fake = MotifInstance(kind=MotifKind.CUSTOM, nodes=(2, 3), eigenvalue=0.25,
                         eigvecs=({2: 1 / np.sqrt(2), 3: -1 / np.sqrt(2)},))
    probes = make_probes(4, 2, ProbeKind.GAUSSIAN, seed=0)
    _, adj = filter_probes(probes, [twin, fake])
    # open twin claims nodes 1..3 first; the custom overlap is dropped
    assert adj.removed == {0.0: 2}


def test_custom_instance_deflation():
    g = build_csr([(0, 1), (1, 2)])
    sop = scaled_operator_for(g, "normalized-adjacency")
    # middle eigenvector of P3 (eigenvalue 0) supplied by hand
    inst = MotifInstance(kind=MotifKind.CUSTOM, nodes=(0, 2), eigenvalue=0.0,
                         eigvecs=({0: 1 / np.sqrt(2), 2: -1 / np.sqrt(2)},))
    probes = make_probes(3, 3, ProbeKind.STANDARD_BASIS, seed=0)
    filtered, adj = filter_probes(probes, [inst])
    m_fil = dos_moments(sop, filtered, 8, effective_dim=2)
    want = chebyshev_values(8, np.array([-1.0, 1.0])).mean(axis=1)
    assert np.abs(m_fil.values - want).max() < 1e-12


def test_degenerate_custom_vectors_rejected():
    probes = make_probes(4, 2, ProbeKind.GAUSSIAN, seed=0)
    a = MotifInstance(kind=MotifKind.CUSTOM, nodes=(0, 1), eigenvalue=0.0,
                      eigvecs=({0: 1.0},))
    b = MotifInstance(kind=MotifKind.CUSTOM, nodes=(0, 1), eigenvalue=0.5,
                      eigvecs=({0: 1.0},))
    with pytest.raises(MotifError, match="dependent"):
        filter_probes(probes, [a, b])


def test_detect_rejects_custom_kind(star4):
    with pytest.raises(MotifError, match="custom"):
        detect_motifs(star4, kinds={MotifKind.CUSTOM})


def test_chain_detection_skips_p3_components():
    # an isolated 3-path has two chain candidates on different hubs; neither
    # hub collects two chains, so no +-1/sqrt(2) instances may be reported
    g = build_csr([(0, 1), (1, 2), (10, 11)], n=12)
    insts = detect_motifs(g, kinds={MotifKind.DANGLING_TWO_CHAIN})
    assert insts == []
