import numpy as np
import pytest

from _instances import random_instance
from tsvf_lab.errors import GridTooNarrow, VanishingPostSelection
from tsvf_lab.pointer import (
    GridSpec, PointerConfig, PointerDensity, auto_grid, coupling_sweep,
    distribution_center, peak_areas, pointer_distribution,
)
from tsvf_lab.qcore import SZ, StateVector, basis_state, identity, spectral
from tsvf_lab.scenarios import all_plus_tsv, scenario_observable
from tsvf_lab.tsvf import TwoStateVector, abl, weak_value

SQRT3_2 = np.sqrt(3) / 2


@pytest.fixture(scope="module")
def s_xi_case():
    return all_plus_tsv(), scenario_observable("all-plus", "s_xi")


def test_grid_and_config_validation():
    with pytest.raises(ValueError):
        GridSpec(1.0, 0.0)
    with pytest.raises(ValueError):
        GridSpec(0.0, 1.0, 10)
    with pytest.raises(ValueError):
        PointerConfig(0.0)
    with pytest.raises(ValueError):
        PointerConfig(1.0, 0.0)


def test_density_must_integrate_to_one():
    grid = GridSpec(-1, 1, 101)
    with pytest.raises(ValueError):
        PointerDensity(grid, np.ones(101), 1.0)


def test_strong_regime_two_peaks_match_abl():
    g = 1.0
    tsv = TwoStateVector(StateVector([1, 0.3 + 0.2j]), StateVector([0.4, 1j]))
    d = pointer_distribution(tsv, SZ, PointerConfig(0.01 * g, g))
    areas = peak_areas(d, [-g / 2, g / 2])
    dist = abl(tsv, SZ)
    np.testing.assert_allclose(areas, [dist.prob(-0.5), dist.prob(0.5)], atol=1e-6)


def test_identity_observable_is_single_gaussian():
    rng = np.random.default_rng(1)
    tsv, _ = random_instance(3, rng)
    g = 2.0
    d = pointer_distribution(tsv, identity(3), PointerConfig(0.3, g))
    assert distribution_center(d) == pytest.approx(g, abs=1e-9)
    assert d.post_selection_probability == pytest.approx(abs(tsv.overlap()) ** 2, abs=1e-9)


def test_symmetric_density_centers_at_zero():
    up_x = StateVector([1, 1])
    d = pointer_distribution(TwoStateVector(up_x, up_x), SZ, PointerConfig(0.05))
    assert distribution_center(d) == pytest.approx(0.0, abs=1e-12)


def test_weak_regime_center_outside_eigenvalue_range(s_xi_case):
    tsv, op = s_xi_case
    g = 1.0
    d = pointer_distribution(tsv, op, PointerConfig(20 * g, g), n_points=4096)
    center = distribution_center(d)
    assert abs(center - g * SQRT3_2) <= 0.02 * g * SQRT3_2
    assert center > 0.5 * g


def test_weak_regime_scales_with_coupling(s_xi_case):
    tsv, op = s_xi_case
    for g in (0.5, 3.0, -2.0):
        d = pointer_distribution(tsv, op, PointerConfig(20 * abs(g), g))
        assert distribution_center(d) == pytest.approx(g * SQRT3_2, rel=0.02)


def test_grid_too_narrow():
    tsv = TwoStateVector(StateVector([1, 1]), StateVector([1, 0]))
    with pytest.raises(GridTooNarrow):
        pointer_distribution(tsv, SZ, PointerConfig(1.0), GridSpec(-2, 2))


def test_vanishing_post_selection():
    tsv = TwoStateVector(basis_state(2, 0), basis_state(2, 1))
    with pytest.raises(VanishingPostSelection):
        pointer_distribution(tsv, SZ, PointerConfig(0.1))


def test_sweep_endpoints(s_xi_case):
    tsv, op = s_xi_case
    sweep = coupling_sweep(tsv, op, [0.01, 0.1, 1, 10, 50])
    assert len(sweep) == 5
    assert -0.5 <= sweep[0].center <= 0.5
    # strong end is the ABL mixture mean
    dist = abl(tsv, op)
    assert sweep[0].center == pytest.approx(float(dist.eigenvalues @ dist.probabilities), abs=1e-6)
    assert sweep[-1].center == pytest.approx(weak_value(tsv, op).real, rel=0.01)


def test_sweep_single_width_matches_distribution(s_xi_case):
    tsv, op = s_xi_case
    (entry,) = coupling_sweep(tsv, op, [3.0])
    d = pointer_distribution(tsv, op, PointerConfig(3.0))
    assert entry.center == distribution_center(d)
    assert entry.post_selection_probability == d.post_selection_probability


def test_sweep_parallel_is_identical_to_serial(s_xi_case):
    tsv, op = s_xi_case
    widths = [0.05, 0.5, 5, 50]
    assert coupling_sweep(tsv, op, widths) == coupling_sweep(tsv, op, widths, max_workers=4)


def test_post_selection_probability_tends_to_overlap():
    rng = np.random.default_rng(2)
    for _ in range(5):
        tsv, op = random_instance(3, rng)
        scale = np.ptp(spectral(op).eigenvalues)
        (entry,) = coupling_sweep(tsv, op, [1000 * scale])
        assert entry.post_selection_probability == pytest.approx(abs(tsv.overlap()) ** 2, rel=1e-5)


def test_weak_limit_error_decreases_quadratically(s_xi_case):
    tsv, op = s_xi_case
    target = weak_value(tsv, op).real
    errors = [abs(e.center - target) for e in coupling_sweep(tsv, op, [4, 8, 16, 32])]
    ratios = [a / b for a, b in zip(errors, errors[1:])]
    assert all(r >= 3.5 for r in ratios), ratios


def test_strong_limit_equivalence_random():
    rng = np.random.default_rng(3)
    for _ in range(10):
        dim = int(rng.integers(2, 4))
        tsv, op = random_instance(dim, rng)
        dec = spectral(op)
        gap = np.min(np.diff(dec.eigenvalues))
        width = gap / 13.0
        d = pointer_distribution(tsv, op, PointerConfig(width, 1.0))
        np.testing.assert_allclose(peak_areas(d, dec.eigenvalues), abl(tsv, op).probabilities, atol=1e-6)


def test_mass_conservation_and_refinement(s_xi_case):
    tsv, op = s_xi_case
    for width in (0.05, 1.0, 20.0):
        cfg = PointerConfig(width)
        grid = auto_grid(spectral(op).eigenvalues, width, 1.0)
        coarse = pointer_distribution(tsv, op, cfg, grid)
        fine = pointer_distribution(tsv, op, cfg, grid.refined())
        assert np.trapezoid(coarse.density, coarse.x) == pytest.approx(1.0, abs=1e-6)
        span = grid.x_max - grid.x_min
        assert abs(distribution_center(coarse) - distribution_center(fine)) < 1e-6 * span
