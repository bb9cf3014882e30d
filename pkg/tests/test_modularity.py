import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import bipartitions, cliques, exhaustive_max, q_oracle
from fsgraph.exceptions import NumericalError
from fsgraph.graph import SimilarityGraph, build_graph
from fsgraph.modularity import detect_modularity, fast_greedy, localize_modularity, modularity_q




def random_graph(rng, n, p=0.6):
    a = rng.random((n, n)) * (rng.random((n, n)) < p)
    W = np.triu(a, 1)
    W = W + W.T
    if W.sum() == 0:
        W[0, 1] = W[1, 0] = 0.5
    return W


def test_single_community_zero(rng):
    G = build_graph(random_graph(rng, 9))
    assert abs(modularity_q(G, np.ones(9, int))) < 1e-12


def test_single_edge_zero():
    assert modularity_q(build_graph([[0, 1], [1, 0]]), [1, 1]) == 0.0


def test_two_cliques_quarter():
    assert modularity_q(build_graph(cliques(4, 4)), [1] * 4 + [2] * 4) == pytest.approx(0.25, abs=1e-12)


def test_q_matches_oracle(rng):
    for _ in range(20):
        W = random_graph(rng, 7)
        lab = rng.integers(0, 3, 7)
        assert modularity_q(SimilarityGraph.from_weights(W), lab) == pytest.approx(q_oracle(W, lab), abs=1e-12)


def test_zero_m_raises():
    with pytest.raises(NumericalError):
        modularity_q(build_graph(np.zeros((3, 3))), [1, 1, 2])
    with pytest.raises(NumericalError):
        fast_greedy(build_graph(np.zeros((3, 3))))


def test_fast_greedy_two_cliques():
    res = fast_greedy(build_graph(cliques(4, 4)), verify=True)
    assert res.q_opt == pytest.approx(0.25, abs=1e-12)
    lab = res.labels
    assert len(set(lab[:4])) == 1 and len(set(lab[4:])) == 1 and lab[0] != lab[4]
    assert exhaustive_max(cliques(4, 4)) == pytest.approx(0.25, abs=1e-12)


def test_fast_greedy_complete_graph():
    W = np.ones((5, 5)) - np.eye(5)
    res = fast_greedy(build_graph(W))
    assert res.q_opt == pytest.approx(0.0, abs=1e-12)
    assert res.partition.k == 1
    assert exhaustive_max(W) == pytest.approx(0.0, abs=1e-12)


def test_fast_greedy_planted_blocks():
    W = cliques(4, 4, weight=0.9, cross=0.1)
    lab = fast_greedy(build_graph(W)).labels
    best = max(bipartitions(8), key=lambda b: q_oracle(W, b))
    assert np.array_equal(lab == lab[0], best == best[0])


def test_trace_and_initial_q(rng):
    W = random_graph(rng, 6)
    G = build_graph(W)
    res = fast_greedy(G)
    assert len(res.merge_trace) == 5
    assert res.q_initial == pytest.approx(q_oracle(W, np.arange(6)), abs=1e-12)
    lines = res.trace_tsv().splitlines()
    assert len(lines) == 5 and lines[0].startswith("1\t")
    assert res.q_opt == pytest.approx(max([res.q_initial] + [q for *_, q in res.merge_trace]), abs=1e-15)


@pytest.mark.parametrize("q, decision", [(0.0030, "Unaltered"), (0.0685, "Forged"), (0.025, "Forged")])
def test_detect_modularity(q, decision):
    assert detect_modularity(q, 0.025).decision == decision


def test_localize_k_cuts():
    G = build_graph(cliques(3, 3))
    assert localize_modularity(G, 6).labels.tolist() == [1, 2, 3, 4, 5, 6]
    lab = localize_modularity(G, 2).labels
    assert lab.tolist() == [1, 1, 1, 2, 2, 2]


def test_localize_disconnected_more_than_k():
    lab = localize_modularity(build_graph(cliques(2, 2, 2)), 2).labels
    assert len(set(lab)) == 2


@settings(max_examples=15, deadline=None)
@given(st.integers(3, 8), st.integers(0, 2**32 - 1))
def test_never_exceeds_exhaustive(n, seed):
    W = random_graph(np.random.default_rng(seed), n)
    res = fast_greedy(build_graph(W), verify=True)
    assert res.q_opt <= exhaustive_max(W) + 1e-12
    assert res.q_opt == pytest.approx(q_oracle(W, res.labels), abs=1e-12)
