import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kickedrotor.classical import (
    ClassicalEnsemble,
    detect_transporting_island,
    disk_seeds,
    evolve_with_energy,
    find_periodic_orbit,
    jacobian_determinant,
    mean_energy,
    mkr_map_evolve,
    poincare_section,
    std_map_step,
    uniform_ensemble,
)

TWO_PI = 2 * np.pi


def test_free_rotor():
    ens = ClassicalEnsemble([0.1, 1.0], [0.5, 2.0])
    out = std_map_step(ens, 0.0)
    assert np.array_equal(out.unwrapped_L, ens.unwrapped_L)
    assert np.allclose(out.theta, np.mod(ens.theta + ens.unwrapped_L, TWO_PI))
    assert out.kick_index == 1


def test_two_pi_kick_accelerates_exactly():
    ens = ClassicalEnsemble.from_points([(0.0, np.pi / 2)])
    for n in range(1, 1001):
        ens = std_map_step(ens, TWO_PI)
        assert abs(ens.unwrapped_L[0] - TWO_PI * n) < 1e-9
    # L is accumulated in floating point, so the angle picks up ~1e-8 over 1000 kicks
    assert abs(ens.theta[0] - np.pi / 2) < 1e-7


def test_angles_stay_folded():
    out = mkr_map_evolve(uniform_ensemble(500, seed=3), 7.0, 2, 50)
    assert np.all((out.theta >= 0) & (out.theta < TWO_PI))


def test_area_preservation():
    rng = np.random.default_rng(0)
    L = rng.uniform(-20, 20, 1000)
    th = rng.uniform(0, TWO_PI, 1000)
    for kappa, sign in [(5.0, 1), (10.0, -1), (8.0, 1)]:
        det = jacobian_determinant(L, th, kappa, sign)
        assert np.max(np.abs(det - 1)) < 1e-8


def test_infinite_period_is_standard_map():
    ens = uniform_ensemble(200, seed=5)
    a = mkr_map_evolve(ens, 5.0, None, 30)
    b = ens
    for _ in range(30):
        b = std_map_step(b, 5.0, +1)
    assert np.array_equal(a.unwrapped_L, b.unwrapped_L)
    assert np.array_equal(a.theta, b.theta)


def test_sign_follows_global_kick_count():
    ens = uniform_ensemble(50, seed=6)
    whole = mkr_map_evolve(ens, 5.0, 3, 20)
    split = mkr_map_evolve(mkr_map_evolve(ens, 5.0, 3, 7), 5.0, 3, 13)
    assert np.array_equal(whole.unwrapped_L, split.unwrapped_L)


def test_odd_pi_kick_shifts_by_pi():
    ens = ClassicalEnsemble.from_points([(np.pi, np.pi / 2)])
    for n in range(1, 1001):
        ens = mkr_map_evolve(ens, np.pi, 2, 1)
        assert abs(ens.unwrapped_L[0] - np.pi - np.pi * n) < 1e-9


@pytest.mark.parametrize("l1, l2", [(0, 1), (1, 1), (2, 3)])
def test_exact_transport_families(l1, l2):
    kr = ClassicalEnsemble.from_points([(TWO_PI * l1, np.pi / 2)])
    out = mkr_map_evolve(kr, TWO_PI * l2, None, 1000)
    assert abs(out.unwrapped_L[0] - TWO_PI * l1 - TWO_PI * l2 * 1000) < 1e-9
    kappa = (2 * l2 + 1) * np.pi
    mkr = ClassicalEnsemble.from_points([((2 * l1 + 1) * np.pi, np.pi / 2)])
    out = mkr_map_evolve(mkr, kappa, 2, 1000)
    assert abs(out.unwrapped_L[0] - (2 * l1 + 1) * np.pi - kappa * 1000) < 1e-9


@settings(max_examples=20, deadline=None)
@given(st.floats(-10, 10), st.floats(0, TWO_PI), st.floats(0.5, 12), st.integers(-3, 3))
def test_map_commutes_with_momentum_cell_shift(L, theta, kappa, shift):
    a = mkr_map_evolve(ClassicalEnsemble([theta], [L]), kappa, 2, 5)
    b = mkr_map_evolve(ClassicalEnsemble([theta], [L + TWO_PI * shift]), kappa, 2, 5)
    assert abs(b.unwrapped_L[0] - a.unwrapped_L[0] - TWO_PI * shift) < 1e-9
    dt = np.mod(b.theta[0] - a.theta[0] + np.pi, TWO_PI) - np.pi
    assert abs(dt) < 1e-9


def test_partitioning_does_not_change_trajectories():
    ens = uniform_ensemble(300, seed=9)
    whole = mkr_map_evolve(ens, 5.0, 2, 200)
    parts = [mkr_map_evolve(ClassicalEnsemble(ens.theta[s], ens.unwrapped_L[s]), 5.0, 2, 200)
             for s in (slice(0, 17), slice(17, 300))]
    assert np.array_equal(np.concatenate([p.unwrapped_L for p in parts]), whole.unwrapped_L)
    assert np.array_equal(np.concatenate([p.theta for p in parts]), whole.theta)


def test_seeded_ensembles_are_reproducible():
    a, b = uniform_ensemble(10, seed=4), uniform_ensemble(10, seed=4)
    assert np.array_equal(a.theta, b.theta)


def test_free_rotor_section_is_horizontal_lines():
    pts = poincare_section(0.0, None, [(0.3, 1.0), (2.0, 4.0)], 50)
    assert set(np.round(pts[:, 0], 12)) == {0.3, 2.0}


def test_island_section_stays_near_centre():
    centre = find_periodic_orbit(5.0, 2, (np.pi, 2.46), jump=4 * np.pi)
    pts = poincare_section(5.0, 2, disk_seeds(centre, 0.03, 20), 400)
    # the island is an elongated ellipse, wider in L than in theta
    assert np.max(np.abs(pts[:, 0] - np.pi)) < 0.5
    assert np.max(np.abs(pts[:, 1] - centre[1])) < 0.5
    assert len(pts) == 20 * 100


def test_section_window():
    pts = poincare_section(5.0, 2, uniform_ensemble(50, seed=2), 40, window=(1.0, 2.0, 0.0, 3.0))
    assert len(pts) > 0
    assert np.all((pts[:, 0] >= 1) & (pts[:, 0] <= 2) & (pts[:, 1] <= 3))


def test_strong_kicks_fill_the_cell():
    pts = poincare_section(10.0, None, uniform_ensemble(20, seed=1, L_spread=3), 500)
    h, _, _ = np.histogram2d(pts[:, 0], pts[:, 1], bins=20, range=[[0, TWO_PI], [0, TWO_PI]])
    assert np.count_nonzero(h) / h.size > 0.95


def test_mean_energy_of_resting_ensemble():
    assert mean_energy(ClassicalEnsemble(np.zeros(5), np.zeros(5))) == 0.0
    with pytest.raises(ValueError):
        mean_energy(ClassicalEnsemble(np.zeros(0), np.zeros(0)))


def test_strong_chaos_grows_linearly():
    _, ks, es = evolve_with_energy(uniform_ensemble(20000, seed=1), 8.0, None, [0, 100, 200, 500, 1000])
    rate = es[1:] / ks[1:]
    assert np.max(rate) / np.min(rate) < 1.1


@pytest.mark.xfail(strict=True, reason="kick correlations raise the kappa=8 rate about 1.7x "
                   "above the uncorrelated estimate kappa^2/4")
def test_strong_chaos_rate_near_uncorrelated_estimate():
    _, ks, es = evolve_with_energy(uniform_ensemble(20000, seed=1), 8.0, None, [0, 500])
    assert es[-1] / (8.0 ** 2 / 4 * ks[-1]) == pytest.approx(1.0, rel=0.3)


def test_sign_flips_give_superlinear_growth():
    ks = np.unique(np.round(np.logspace(2, 4, 15)).astype(int))
    _, ks, es = evolve_with_energy(uniform_ensemble(20000, seed=2), 5.0, 2, ks)
    slope = np.polyfit(np.log(ks), np.log(es), 1)[0]
    assert slope > 1.0


def test_kr_island_is_not_transporting():
    centre = find_periodic_orbit(5.0, None, (-2.26, 2.01), period=2)
    rep = detect_transporting_island(5.0, None, centre, 1000)
    assert abs(rep.drift_per_kick) < 1e-6 and not rep.is_transporting


def test_chaotic_orbit_is_not_transporting():
    rep = detect_transporting_island(5.0, 2, (0.3, 0.1), 1000)
    assert not rep.is_transporting


def test_island_detection_needs_enough_kicks():
    with pytest.raises(ValueError):
        detect_transporting_island(5.0, 2, (0.0, 0.0), 50)
