import numpy as np
import pytest

from vicseklab.errors import InsufficientSamplesError, WindowError
from vicseklab.fitting import (
    clip_to_window,
    decay_rate,
    fit_line,
    fit_loglog,
    make_t_grid,
    stability_ratio,
)


def test_fit_loglog_recovers_power_law():
    t = np.geomspace(1e-4, 1e-1, 30)
    y = 2.5 * t ** -0.75
    fit = fit_loglog(t, y)
    assert fit.slope == pytest.approx(-0.75, abs=1e-12)
    assert fit.intercept == pytest.approx(np.log(2.5), abs=1e-10)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.window == (pytest.approx(1e-4), pytest.approx(1e-1))
    assert fit.sample_count == 30


def test_fit_constant_has_zero_slope():
    t = np.geomspace(1e-3, 1.0, 20)
    fit = fit_loglog(t, np.ones_like(t))
    assert fit.slope == pytest.approx(0.0, abs=1e-14)


def test_fit_line_r_squared():
    x = np.linspace(0, 1, 40)
    rng = np.random.default_rng(0)
    y = 3 * x + 1 + 0.01 * rng.standard_normal(40)
    fit = fit_line(x, y)
    assert fit.slope == pytest.approx(3.0, abs=0.05)
    assert fit.r_squared > 0.99


def test_decay_rate():
    t = np.linspace(1, 3, 12)
    y = 7.0 * np.exp(-2.5 * t)
    fit = decay_rate(t, y)
    assert -fit.slope == pytest.approx(2.5, abs=1e-10)


def test_insufficient_samples():
    with pytest.raises(InsufficientSamplesError):
        fit_loglog(np.array([1.0, 2.0]), np.array([1.0, 2.0]))
    with pytest.raises(InsufficientSamplesError):
        fit_loglog(np.geomspace(1, 10, 20), -np.ones(20))  # nothing positive


def test_clip_to_window():
    grid = np.geomspace(1e-6, 1.0, 40)
    kept = clip_to_window(grid, (1e-4, 1e-2))
    assert kept.min() >= 1e-4 and kept.max() <= 1e-2
    with pytest.raises(WindowError):
        clip_to_window(grid, (10.0, 20.0))


def test_make_t_grid():
    g = make_t_grid(1e-3, 1.0, 7, "log")
    assert g.size == 7 and g[0] == pytest.approx(1e-3) and g[-1] == pytest.approx(1.0)
    lin = make_t_grid(1.0, 2.0, 5, "linear")
    assert np.allclose(np.diff(lin), 0.25)
    with pytest.raises(ValueError):
        make_t_grid(1.0, 0.5, 5)
    with pytest.raises(ValueError):
        make_t_grid(1e-3, 1.0, 5, "cubic")


def test_stability_ratio():
    assert stability_ratio(np.array([1.0, 2.0, 5.0])) == pytest.approx(5.0)
    assert stability_ratio(np.array([0.0, 0.0])) == np.inf
