import numpy as np
import pytest

from latspec.errors import DomainSizeError
from latspec.lattice import (
    build_box,
    build_chain,
    build_spiral,
    domain_from_config,
    sites_in_ball,
    unroll_spiral,
)


def test_box_1d_counts():
    d = build_box(1, 2)
    assert d.n_sites == 5
    assert len(d.edges) == 4
    assert not d.true_boundary.any()
    assert d.truncation_boundary.sum() == 2


def test_box_2d_counts():
    d = build_box(2, 1)
    assert d.n_sites == 9
    assert len(d.edges) == 12


def test_box_size_formula():
    assert build_box(2, 100).n_sites == 201 ** 2


def test_box_budget_enforced():
    with pytest.raises(DomainSizeError):
        build_box(3, 100)  # 201^3 > 5e6


@pytest.mark.parametrize("dom", [build_box(2, 4), build_box(3, 2), build_spiral(3)])
def test_edges_are_unit_steps(dom):
    a = dom.sites[dom.edges[:, 0]]
    b = dom.sites[dom.edges[:, 1]]
    diff = np.abs(a - b)
    assert np.all(diff.sum(axis=1) == 1)
    assert np.all(diff.max(axis=1) == 1)


def test_index_roundtrip():
    for dom in (build_box(2, 3), build_chain(17), build_spiral(2)):
        idx = dom.index_of(dom.sites)
        assert np.array_equal(idx, np.arange(dom.n_sites))
        outside = np.array([[999] * dom.dimension])
        assert dom.index_of(outside)[0] == -1


def test_chain_flags():
    d = build_chain(10)
    assert d.true_boundary[0] and not d.true_boundary[1:].any()
    assert d.truncation_boundary[-1] and not d.truncation_boundary[:-1].any()
    assert len(d.edges) == 9


def test_spiral_sizes_grow_quadratically():
    # brute-force site counts of the explicit construction
    sizes = [build_spiral(k).n_sites for k in range(1, 11)]
    assert sizes == [13, 41, 85, 145, 221, 313, 421, 545, 685, 841]
    for k, n in enumerate(sizes, start=1):
        assert 8 * k * k <= n <= 13 * k * k


def test_spiral_is_a_path():
    for k in (1, 2, 4):
        d = build_spiral(k)
        degrees = np.diff(d.neighbor_ptr)
        assert degrees.max() == 2
        assert (degrees == 1).sum() == 2
        assert len(d.edges) == d.n_sites - 1


def test_spiral_boundary_flags():
    d = build_spiral(2)
    # one truncation site: the cut outer end of the corridor
    assert d.truncation_boundary.sum() == 1
    order = unroll_spiral(d)
    assert d.truncation_boundary[order[-1]]
    # every corridor site touches a wall
    assert d.true_boundary.sum() >= d.n_sites - 2


def test_unroll_starts_at_origin_and_walks_adjacent():
    d = build_spiral(3)
    order = unroll_spiral(d)
    assert tuple(d.sites[order[0]]) == (0, 0)
    steps = np.abs(d.sites[order[1:]] - d.sites[order[:-1]])
    assert np.all(steps.sum(axis=1) == 1)
    assert len(set(order.tolist())) == d.n_sites


def test_unroll_rejects_non_paths():
    with pytest.raises(ValueError):
        unroll_spiral(build_box(2, 2))


def test_spiral_radius_scales_like_sqrt_index():
    d = build_spiral(5)
    order = unroll_spiral(d)
    radii = np.abs(d.sites[order]).max(axis=1)
    j = np.arange(len(order))
    mask = j >= 13  # past the first revolution
    ratio = (radii[mask] + 1.0) / np.sqrt(j[mask].astype(float))
    assert ratio.min() > 0.4
    assert ratio.max() < 1.6


def test_sites_in_ball_counts():
    assert len(sites_in_ball(build_box(1, 10), 3)) == 7
    assert len(sites_in_ball(build_box(2, 10), 2)) == 25


def test_sites_in_ball_monotone_and_bounded():
    dom = build_spiral(3)
    sizes = [len(sites_in_ball(dom, r)) for r in (1, 2, 2.5, 4, 6)]
    assert sizes == sorted(sizes)
    with pytest.raises(ValueError):
        sites_in_ball(dom, dom.truncation_radius + 1)


def test_sites_in_ball_brute_force_spiral():
    dom = build_spiral(2)
    got = set(sites_in_ball(dom, 2.5).tolist())
    want = {
        i
        for i, s in enumerate(dom.sites.tolist())
        if max(abs(s[0]), abs(s[1])) <= 2.5
    }
    assert got == want


def test_domain_config_roundtrip():
    for dom in (build_box(2, 3), build_chain(9), build_spiral(2)):
        clone = domain_from_config(dom.to_config())
        assert np.array_equal(clone.sites, dom.sites)
        assert np.array_equal(clone.edges, dom.edges)
