import math

import numpy as np
import pytest

from latspec.potentials import (
    SQRT3,
    AndersonPotential,
    FreePotential,
    PeriodicPotential,
    RandomDecayingPotential,
    TablePotential,
    halfline_values,
    potential_from_config,
)


def test_free_is_zero():
    pot = FreePotential()
    assert pot.value((3, -1)) == 0.0
    assert np.all(halfline_values(pot, 100) == 0.0)


def test_periodic_half_line_indexing():
    pot = PeriodicPotential(cell=(1.0, -1.0))
    # odd half-line positions read the first cell entry
    assert pot.value((5,)) == 1.0
    assert pot.value((1,)) == 1.0
    assert pot.value((2,)) == -1.0
    vals = halfline_values(pot, 6)
    assert np.array_equal(vals, [1, -1, 1, -1, 1, -1])


def test_periodic_rejects_higher_dimension():
    with pytest.raises(ValueError):
        PeriodicPotential(cell=(1.0,)).values([(1, 2)])


def test_random_decaying_seed_determinism():
    pot = RandomDecayingPotential(coupling=1.0, seed=42)
    v1 = halfline_values(pot, 1000)
    v2 = halfline_values(pot, 1000)
    assert np.array_equal(v1, v2)
    # evaluation of a subset matches, in any order
    sites = np.array([[10], [500], [3]])
    sub = pot.values(sites)
    assert sub[0] == v1[9] and sub[1] == v1[499] and sub[2] == v1[2]
    # a different seed gives a different realization
    assert np.max(np.abs(v1 - halfline_values(pot.with_seed(43), 1000))) > 0.01


def test_random_decaying_envelope_bound():
    pot = RandomDecayingPotential(coupling=1.3, seed=9)
    n = np.arange(1, 20001)
    v = halfline_values(pot, 20000)
    assert np.all(np.abs(v) <= 1.3 * SQRT3 * n ** -0.5 + 1e-15)
    # spec'd example scale: |v(1e4)| <= sqrt(3) * 1e-2 at unit coupling
    v4 = RandomDecayingPotential(1.0, 7).value((10 ** 4,))
    assert abs(v4) <= SQRT3 * 1e-2


def test_random_decaying_zero_left_of_halfline():
    pot = RandomDecayingPotential(coupling=1.0, seed=1)
    assert pot.value((0,)) == 0.0
    assert pot.value((-5,)) == 0.0


def test_amplitude_moments_within_three_sigma():
    pot = RandomDecayingPotential(coupling=1.0, seed=123)
    n = 10 ** 5
    a = pot.amplitudes(np.arange(1, n + 1))
    # uniform on [-sqrt3, sqrt3]: mean 0, variance 1, Var(a^2) = 4/5
    mean_tol = 3.0 / math.sqrt(n)
    second_tol = 3.0 * math.sqrt(0.8 / n)
    assert abs(a.mean()) < mean_tol
    assert abs((a ** 2).mean() - 1.0) < second_tol
    assert np.all(np.abs(a) <= SQRT3)


def test_anderson_range_and_dimension():
    pot = AndersonPotential(width=8.0, seed=5)
    dom_sites = np.array([(i, j) for i in range(-20, 21) for j in range(-20, 21)])
    v = pot.values(dom_sites)
    assert np.all(np.abs(v) <= 4.0)
    assert v.std() > 1.0  # actually random
    # keyed by site, not by evaluation order
    assert pot.value((3, 4)) == v[(20 + 3) * 41 + (20 + 4)]


def test_table_potential_missing_site():
    pot = TablePotential({(1,): 0.5})
    assert pot.value((1,)) == 0.5
    with pytest.raises(KeyError):
        pot.value((2,))


def test_config_roundtrip():
    pots = [
        FreePotential(),
        PeriodicPotential(cell=(0.3, -0.1, 2.0)),
        RandomDecayingPotential(coupling=0.5, seed=11),
        AndersonPotential(width=2.0, seed=3),
        TablePotential({(1,): 1.0, (2,): -1.0}),
    ]
    sites = np.array([[1], [2], [1]])
    for pot in pots:
        clone = potential_from_config(pot.to_config())
        assert np.array_equal(clone.values(sites[:2]), pot.values(sites[:2]))
