import random

import pytest
from hypothesis import given, settings, strategies as st

from instances import oriented, partial_ktree, shuffled
from lowtw.decomp import TreeDecomposition
from lowtw.flow import (EMPTY_FLOW, VertexCut, VertexFlow, augment_once, check_flow,
                        collapse_terminals, cut_separates, flow_up_to_k, max_vertex_flow_td)
from lowtw.graph import DiGraph, Graph
from lowtw.oracles import brute_maxflow


def far_terminals(g: DiGraph, rng: random.Random) -> tuple[int, int] | None:
    for _ in range(20):
        s, t = rng.sample(range(g.n), 2)
        if not g.has_arc(s, t):
            return s, t
    return None


def test_check_flow_defects():
    g = DiGraph.from_arcs(4, [(0, 1), (1, 3), (0, 2), (2, 3), (1, 2)])
    assert check_flow(g, {0}, {3}, VertexFlow(((0, 1, 3), (0, 2, 3)))) is None
    assert "twice" in check_flow(g, {0}, {3}, VertexFlow(((0, 1, 3), (0, 1, 2, 3))))
    assert "missing arc" in check_flow(g, {0}, {3}, VertexFlow(((0, 3),)))
    assert check_flow(g, {0}, {3}, VertexFlow(((1, 3),))) is not None


def test_cut_separates():
    g = DiGraph.from_arcs(4, [(0, 1), (1, 3), (0, 2), (2, 3)])
    assert cut_separates(g, {0}, {3}, {1, 2})
    assert not cut_separates(g, {0}, {3}, {1})


def test_augment_uses_reverse_residual():
    # the greedy path 0-1-2-5 blocks both other routes until it is rerouted
    arcs = [(0, 1), (1, 2), (2, 5), (0, 3), (3, 2), (1, 4), (4, 5)]
    g = DiGraph.from_arcs(6, arcs)
    step = augment_once(g, {0}, {5}, VertexFlow(((0, 1, 2, 5),)))
    assert isinstance(step, VertexFlow) and len(step) == 2
    assert check_flow(g, {0}, {5}, step) is None
    done = augment_once(g, {0}, {5}, step)
    assert isinstance(done, VertexCut) and len(done) == 2
    assert cut_separates(g, {0}, {5}, done.vertices)


def test_flow_up_to_k_stops_early():
    g = DiGraph.from_arcs(5, [(0, v) for v in (1, 2, 3)] + [(v, 4) for v in (1, 2, 3)])
    assert flow_up_to_k(g, {0}, {4}, 2) is None
    res = flow_up_to_k(g, {0}, {4}, 3)
    assert res.value == 3 and res.cut.vertices == frozenset({1, 2, 3})
    with pytest.raises(ValueError):
        flow_up_to_k(DiGraph.from_arcs(2, [(0, 1)]), {0}, {1}, 1)


def test_set_terminals_and_collapse():
    rng = random.Random(8)
    for _ in range(40):
        g, _ = partial_ktree(20, 3, rng)
        dg = oriented(g, rng)
        verts = list(range(20))
        rng.shuffle(verts)
        S, T = set(verts[:3]), set(verts[3:6])
        if any(dg.has_arc(s, t) for s in S for t in T):
            continue
        inst = collapse_terminals(dg, S, T)
        res = flow_up_to_k(inst.graph, {inst.s}, {inst.t}, 20)
        flow = inst.lift_flow(res.flow)
        cut = inst.lift_cut(res.cut)
        assert check_flow(dg, S, T, flow) is None
        assert len(cut) == len(flow)
        assert cut_separates(dg, S, T, cut.vertices)
        direct = flow_up_to_k(dg, S, T, 20)
        assert direct.value == len(flow)


def test_patch_decomposition_is_valid():
    from lowtw.decomp import validate
    rng = random.Random(3)
    g, td = partial_ktree(15, 2, rng)
    dg = DiGraph.from_undirected(g)
    S, T = {0}, {14}
    if g.has_edge(0, 14):
        return
    inst = collapse_terminals(dg, S, T)
    patched = inst.patch_decomposition(td)
    assert validate(patched, inst.graph.underlying()) is None
    assert patched.width <= td.width + 2


@given(st.integers(3, 60), st.integers(1, 5), st.integers(0, 10**6))
@settings(max_examples=50)
def test_max_vertex_flow_td_against_oracle(n, k, seed):
    rng = random.Random(seed)
    g, td = shuffled(*partial_ktree(n, k, rng, p=0.8), rng)
    dg = oriented(g, rng, both=0.5)
    st_pair = far_terminals(dg, rng)
    if st_pair is None:
        return
    s, t = st_pair
    stats: dict = {}
    res = max_vertex_flow_td(dg, s, t, td, stats=stats)
    assert res.value == brute_maxflow(dg, s, t).value
    assert check_flow(dg, {s}, {t}, res.flow) is None
    assert len(res.cut) == res.value
    assert cut_separates(dg, {s}, {t}, res.cut.vertices)
    assert s not in res.cut.vertices and t not in res.cut.vertices


def test_max_vertex_flow_rejects_bad_terminals():
    g = DiGraph.from_arcs(3, [(0, 1), (1, 2)])
    td = TreeDecomposition.from_bags([{0, 1}, {1, 2}], [(0, 1)])
    with pytest.raises(ValueError):
        max_vertex_flow_td(g, 0, 1, td)
    with pytest.raises(ValueError):
        max_vertex_flow_td(g, 2, 2, td)
    assert max_vertex_flow_td(g, 2, 0, td).value == 0
    assert max_vertex_flow_td(g, 0, 2, td).value == 1


def test_flow_through_both_terminals_in_many_bags():
    # s and t share every bag of a long path; the middle layer has width disjoint routes
    n_mid = 30
    s, t = n_mid, n_mid + 1
    arcs = [(s, v) for v in range(n_mid)] + [(v, t) for v in range(n_mid)]
    g = DiGraph.from_arcs(n_mid + 2, arcs)
    td = TreeDecomposition.from_bags([{v, s, t} for v in range(n_mid)],
                                     [(i, i + 1) for i in range(n_mid - 1)])
    res = max_vertex_flow_td(g, s, t, td)
    assert res.value == n_mid
    assert res.cut.vertices == frozenset(range(n_mid))
