import math

import numpy as np
import pytest
from scipy.integrate import quad

from conftest import offset_grid_1d, offset_points
from llt_lab import (InvalidParameterError, SmoothedModel, admissible_T,
                     bernoulli_noise, convergence_study, cos_power_window_transform,
                     density, distance_to_gaussian, exact_mixture_density,
                     gaussian_window_deficit, grid_1d, make_fejer, make_gaussian,
                     make_laplace, make_uniform, monte_carlo_density, product,
                     smoothed_cf, uniform_noise)
from llt_lab.inversion import GridDensity

UNIFORM = make_uniform(1.0)
LAPLACE = make_laplace(1.0)
GAUSSIAN = make_gaussian(1.0)
BERN = bernoulli_noise(1)
SQRT2PI = math.sqrt(2.0 * math.pi)


# ---------------------------------------------------------------------------
# smoothed characteristic function
# ---------------------------------------------------------------------------

def test_smoothed_cf_at_origin():
    model = SmoothedModel(UNIFORM, BERN)
    assert smoothed_cf(model, 4, 0.0) == 1.0


def test_smoothed_cf_n1_is_plain_product():
    model = SmoothedModel(LAPLACE, BERN)
    t = 0.83
    assert smoothed_cf(model, 1, t) == pytest.approx(
        LAPLACE.cf(t) * math.cos(t), rel=1e-14)


def test_smoothed_cf_cosine_power_exact():
    # at t = sqrt(n) * pi the noise factor is cos(pi)^n = +-1 exactly
    model = SmoothedModel(LAPLACE, BERN)
    val = smoothed_cf(model, 100, math.sqrt(100) * math.pi)
    assert val == pytest.approx(1.0 / (1.0 + math.pi ** 2), rel=1e-13)


def test_smoothed_cf_no_underflow_large_n():
    model = SmoothedModel(GAUSSIAN, BERN)
    v = smoothed_cf(model, 10_000, 37.0)
    assert math.isfinite(v)


# ---------------------------------------------------------------------------
# window transform of cos^n
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n,w", [(1, 0.0), (2, 1.3), (7, 4.2), (64, 11.0)])
def test_cos_power_window_matches_quadrature(n, w):
    ref_re, _ = quad(lambda s: math.cos(s) ** n * math.cos(s * w),
                     -math.pi / 2, math.pi / 2, limit=200)
    assert cos_power_window_transform(n, w) == pytest.approx(ref_re, abs=1e-12)


# ---------------------------------------------------------------------------
# densities vs the exact mixture oracle
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("src", [UNIFORM, LAPLACE, GAUSSIAN], ids=lambda d: d.label)
@pytest.mark.parametrize("n", [1, 2, 20])
def test_density_matches_mixture(src, n):
    model = SmoothedModel(src, BERN)
    grid = offset_grid_1d()
    gd = density(model, n, grid)
    ref = exact_mixture_density(src, n, offset_points())
    assert float(np.max(np.abs(gd.values - ref))) <= 1e-7


def test_density_hand_values():
    model = SmoothedModel(UNIFORM, BERN)
    g = grid_1d(-5.0, 5.0, 1001)
    gd = density(model, 1, g)
    x = g.axes[0].points()
    i = int(np.argmin(np.abs(x - 1.0)))
    assert gd.values[i] == pytest.approx(0.25, abs=1e-9)
    gd2 = density(model, 2, g)
    assert gd2.values[500] == pytest.approx(math.sqrt(2.0) / 4.0, abs=1e-9)


def test_density_symmetric():
    model = SmoothedModel(LAPLACE, BERN)
    gd = density(model, 9, grid_1d(-5, 5, 501))
    assert float(np.max(np.abs(gd.values - gd.values[::-1]))) <= 1e-10


def test_density_mass_conserved():
    model = SmoothedModel(GAUSSIAN, BERN)
    gd = density(model, 16, grid_1d(-6, 6, 1201))
    assert gd.mass() == pytest.approx(1.0, abs=1e-4)


@pytest.mark.parametrize("src", [LAPLACE, GAUSSIAN], ids=lambda d: d.label)
def test_parseval_consistency(src):
    # squared L2 norm of p_n equals (2 pi)^-1 integral of |f_n|^2; the
    # uniform source is excluded here because its mixture is a staircase
    # whose grid trapezoid loses O(step * jump) and cannot meet 1e-5
    model = SmoothedModel(src, BERN)
    n = 20
    gd = density(model, n, grid_1d(-7, 7, 2801))
    lhs = float(np.trapezoid(gd.values ** 2, dx=gd.axes[0].step))
    rt = math.sqrt(n)
    rhs, _ = quad(lambda t: abs(smoothed_cf(model, n, t)) ** 2,
                  -60.0 * rt, 60.0 * rt, limit=4000)
    rhs /= 2.0 * math.pi
    assert lhs == pytest.approx(rhs, abs=1e-5)


def test_general_noise_density_compact_cf_regime():
    model = SmoothedModel(make_fejer(0.7), uniform_noise())
    gd = density(model, 64)
    assert gd.meta["engine"] == "invert-compact"
    assert gd.meta["truncation_radius"] == pytest.approx(0.7 * 8.0)
    # cross-check against the seeded Monte Carlo oracle at probe points
    xs = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    est = monte_carlo_density(model, 64, xs, samples=200_000, bandwidth=0.05,
                              seed=11)
    x = gd.axes[0].points()
    for j, xx in enumerate(xs):
        i = int(np.argmin(np.abs(x - xx)))
        assert abs(gd.values[i] - est.values[j]) <= 3.0 * est.stderr[j]


def test_density_2d_product_matches_mixture():
    from llt_lab import exact_mixture_density_2d
    from llt_lab.inversion import Axis, Grid
    p2 = product([UNIFORM, UNIFORM])
    model = SmoothedModel(p2, bernoulli_noise(2))
    lo = offset_points()[0]
    g = Grid((Axis(lo, 0.5, 21), Axis(lo, 0.5, 21)))
    gd = density(model, 16, g)
    X, Y = np.meshgrid(g.axes[0].points(), g.axes[1].points(), indexing="ij")
    ref = exact_mixture_density_2d(p2, 16, np.stack([X, Y], axis=-1))
    assert float(np.max(np.abs(gd.values - ref))) <= 1e-5


# ---------------------------------------------------------------------------
# distances
# ---------------------------------------------------------------------------

def _phi_grid_density(grid):
    x = grid.axes[0].points()
    vals = np.exp(-0.5 * x * x) / SQRT2PI
    return GridDensity(dim=1, axes=grid.axes, values=vals, meta={})


def test_distance_of_phi_to_itself():
    gd = _phi_grid_density(grid_1d(-5, 5, 1001))
    assert distance_to_gaussian(gd, "sup") <= 1e-12
    assert distance_to_gaussian(gd, "l1") <= 1e-6


def test_distance_of_doubled_phi():
    gd = _phi_grid_density(grid_1d(-5, 5, 1001))
    gd.values = 2.0 * gd.values
    assert distance_to_gaussian(gd, "sup") == pytest.approx(1.0 / SQRT2PI, abs=1e-6)


def test_laplace_l1_floor():
    model = SmoothedModel(LAPLACE, BERN)
    gd = density(model, 50)
    assert distance_to_gaussian(gd, "l1") >= 0.01


def test_window_deficit():
    assert gaussian_window_deficit(grid_1d(-5, 5, 101)) == pytest.approx(
        5.733e-7, rel=1e-3)


# ---------------------------------------------------------------------------
# convergence studies
# ---------------------------------------------------------------------------

def test_study_uniform_sup_decreasing():
    model = SmoothedModel(UNIFORM, BERN)
    rep = convergence_study(model, (4, 16, 64), "sup")
    sups = rep.distances["sup"]
    assert sups[0] > sups[1] > sups[2]
    assert rep.fitted_log_slope < -0.3
    assert rep.condition_max_abs <= 1e-12


def test_study_laplace_l2_does_not_vanish():
    model = SmoothedModel(LAPLACE, BERN)
    rep = convergence_study(model, (16, 64, 256), "l2")
    l2 = rep.distances["l2"]
    assert min(l2) >= 0.05 * l2[0]
    assert rep.condition_max_abs > 0.05
    assert rep.even_slope is not None and rep.fitted_log_slope is None or \
        rep.fitted_log_slope is not None


def test_study_parity_split_when_condition_fails():
    model = SmoothedModel(LAPLACE, BERN)
    rep = convergence_study(model, (15, 16, 63, 64), "l2")
    assert rep.fitted_log_slope is None
    assert rep.even_slope is not None
    assert rep.odd_slope is not None


def test_study_grid_step_precondition_for_sup():
    model = SmoothedModel(UNIFORM, BERN)
    with pytest.raises(InvalidParameterError):
        convergence_study(model, (4, 4096), "sup", grid_1d(-5, 5, 101))


def test_study_schedule_must_increase():
    model = SmoothedModel(UNIFORM, BERN)
    with pytest.raises(InvalidParameterError):
        convergence_study(model, (16, 16), "l2")


def test_necessity_floor_matches_condition():
    # a visibly nonzero pi-lattice value comes with a bounded-below l2 curve
    model = SmoothedModel(LAPLACE, BERN)
    rep = convergence_study(model, (16, 64, 256), "l2")
    assert rep.condition_max_abs >= 0.05
    assert min(rep.distances["l2"]) >= 0.05 * rep.distances["l2"][0]


# ---------------------------------------------------------------------------
# admissible support radius
# ---------------------------------------------------------------------------

def test_admissible_bernoulli():
    rep = admissible_T(BERN)
    assert rep.rationale == "beta3"
    assert rep.t_value == pytest.approx(1.0)


def test_admissible_uniform_prefers_larger_window():
    noise = uniform_noise()
    auto = admissible_T(noise)
    assert auto.rationale == "remark41"
    assert auto.t_value == pytest.approx(math.pi)
    b3 = admissible_T(noise, prefer="beta3")
    assert b3.t_value == pytest.approx(4.0 / (3.0 * math.sqrt(3.0)))


def test_admissible_bernoulli_remark_refused():
    rep = admissible_T(BERN, prefer="remark41")
    assert rep.rationale == "unsupported"
    assert rep.t_value is None


def test_density_2d_generic_path_matches_mixture():
    # hide the product structure so the generic two-dimensional inversion
    # runs, and check it against the exact mixture
    import dataclasses
    from llt_lab import exact_mixture_density_2d
    from llt_lab.inversion import Axis, Grid
    p2 = product([GAUSSIAN, GAUSSIAN])
    hidden = dataclasses.replace(p2, components=None)
    model = SmoothedModel(hidden, bernoulli_noise(2))
    g = Grid((Axis(-2.1, 0.42, 11), Axis(-2.1, 0.42, 11)))
    gd = density(model, 6, g, tol=1e-8)
    assert gd.meta["engine"] == "invert"
    X, Y = np.meshgrid(g.axes[0].points(), g.axes[1].points(), indexing="ij")
    ref = exact_mixture_density_2d(p2, 6, np.stack([X, Y], axis=-1))
    assert float(np.max(np.abs(gd.values - ref))) <= 1e-6
