import random

import networkx as nx
import pytest

import nccsim


def test_msf_matches_networkx():
    n, edges = nccsim.gen_graph("gnm", n=64, m=300, seed=5)
    r = nccsim.msf(n, edges, seed=2)
    g = nx.Graph()
    g.add_nodes_from(range(1, n + 1))
    g.add_weighted_edges_from(edges)
    expected = nx.minimum_spanning_tree(g)
    assert r["weight"] == expected.size(weight="weight")
    assert r["weight"] == nccsim.kruskal(n, edges)[0]
    assert r["depth"] <= r["depth_bound"]
    assert r["report"]["violations"] == 0


def test_spanning_forest_partition():
    n, edges = nccsim.gen_graph("gnm", n=100, m=80, seed=3)
    r = nccsim.spanning_forest(n, edges, seed=4)
    comps = nccsim.components(n, edges)
    assert len(r["forest"]) == n - len(set(comps))
    by_label = {}
    for v in range(n):
        by_label.setdefault(r["label"][v], set()).add(comps[v])
    assert all(len(s) == 1 for s in by_label.values())


def test_sort_distributed():
    rng = random.Random(7)
    keys = [[rng.randrange(1000) for _ in range(rng.randrange(10))] for _ in range(32)]
    slices, report = nccsim.sort_distributed(keys)
    flat = [k for s in slices for k in s]
    assert flat == sorted(k for ks in keys for k in ks)
    assert report["rounds"] > 0


def test_ksparse_roundtrip():
    coords = [(5, 3), (900, -2), (4000, 7)]
    dense, got, bits = nccsim.ksparse_roundtrip(coords, dim=1 << 16, k=4)
    assert not dense
    assert got == coords
    assert bits > 0


def test_run_experiment_report():
    report = nccsim.run_experiment("sf", n=32, seeds=2)
    assert report["verdict"] == "MATCH"
    assert [r["seed"] for r in report["runs"]] == [1, 2]


def test_errors_surface():
    with pytest.raises(nccsim.NccError):
        nccsim.msf(3, [(1, 1, 4)])
