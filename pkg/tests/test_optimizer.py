import math

import numpy as np
import pytest

from artifact.dynamics import TimeGrid, default_grid, integrate
from artifact.errors import OptimizationError
from artifact.optimizer import DEFAULT_BOUNDS, PARAMS, OptimizationSpec, golden_section_max, optimize_against, optimize_pulse
from artifact.photonics import donor_photon, ion_photon, overlap
from artifact.pulse import mhz

from cases import DONOR, ION


def _weak_ion():
    ion = ION.with_pulse(ION.pulse.replace(omega_max=ION.pulse.omega_max * 0.55))
    grid = default_grid(ion)
    ph = ion_photon(integrate(ion, grid), ion)
    return ion, grid, ph


def test_golden_section_finds_peak():
    x, fx = golden_section_max(lambda x: -(x - 0.3) ** 2, -1.0, 2.0, tol=1e-8)
    assert x == pytest.approx(0.3, abs=1e-6)


def test_self_overlap_is_a_fixed_point():
    ion, grid, ref = _weak_ion()
    assert 0.03 < ref.p_emit < 0.08
    spec = OptimizationSpec("ion", ion.pulse, target_p1=ref.p_emit, max_evaluations=60)
    res = optimize_against(ion, ref, free_is_bra=True, grid=grid, spec=spec)
    assert res.re_overlap == pytest.approx(1.0, abs=1e-9)
    for k in PARAMS:
        assert getattr(res.pulse, k) == pytest.approx(getattr(ion.pulse, k), abs=1e-9)


def _short_spec(**kw):
    return OptimizationSpec("donor", ION.pulse, target_p1=0.05, **{"max_evaluations": 12, **kw})


def test_short_run_properties():
    spec = _short_spec()
    res = optimize_pulse(spec, DONOR, ION)
    # bounds and p1 target
    for k in PARAMS:
        lo, hi = spec.bounds[k]
        assert lo <= getattr(res.pulse, k) <= hi
    assert abs(res.p1 - 0.05) <= spec.p1_tolerance
    assert res.evaluations <= spec.max_evaluations
    # incumbent never decreases
    inc = [row["incumbent"] for row in res.history if not math.isnan(row["incumbent"])]
    assert all(b >= a for a, b in zip(inc, inc[1:]))
    assert res.re_overlap >= inc[0]
    # the returned pulse reproduces the reported overlap with zero phase
    g = default_grid(DONOR, ION)
    pad = 2 * max(DONOR.pulse.sigma1, DONOR.pulse.sigma2)
    grid = TimeGrid(g.t_start - pad, g.t_end + pad)
    o = overlap(ion_photon(integrate(ION, grid), ION), donor_photon(integrate(DONOR.with_pulse(res.pulse), grid), DONOR))
    assert abs(math.atan2(o.imag, o.real)) < 1e-6
    assert o.real == pytest.approx(res.re_overlap, abs=1e-9)


def test_deterministic():
    a = optimize_pulse(_short_spec(max_evaluations=6, restarts=1, seed=5), DONOR, ION)
    b = optimize_pulse(_short_spec(max_evaluations=6, restarts=1, seed=5), DONOR, ION)
    assert a.pulse == b.pulse and a.re_overlap == b.re_overlap and a.history == b.history


def test_theta0_offset_restored_in_one_evaluation():
    base = optimize_pulse(_short_spec(max_evaluations=4), DONOR, ION)
    flipped = DONOR.with_pulse(base.pulse.replace(theta0=base.pulse.theta0 + math.pi))
    res = optimize_pulse(_short_spec(max_evaluations=2), flipped, ION)
    assert res.re_overlap >= base.re_overlap - 1e-8
    first = res.history[0]
    assert first["re_overlap"] == pytest.approx(base.re_overlap, abs=1e-8)
    assert math.remainder(first["theta0"] - base.pulse.theta0, 2 * math.pi) == pytest.approx(0.0, abs=1e-6)


def test_unreachable_target_raises():
    bounds = {"omega_max": (0.0, mhz(1.0))}
    spec = OptimizationSpec("donor", ION.pulse, target_p1=0.05, bounds=bounds, max_evaluations=3)
    with pytest.raises(OptimizationError):
        optimize_pulse(spec, DONOR, ION)


def test_log_written(tmp_path):
    res = optimize_pulse(_short_spec(max_evaluations=3), DONOR, ION)
    res.write_log(tmp_path / "log.csv")
    lines = (tmp_path / "log.csv").read_text().splitlines()
    assert lines[0].split(",") == ["iteration", *PARAMS, "re_overlap", "p1", "incumbent_re_overlap"]
    assert len(lines) == len(res.history) + 1


@pytest.mark.parametrize("kwargs", [dict(target_p1=0.2), dict(target_p1=0.0), dict(free_side="both"),
                                    dict(bounds={"sigma1": (5.0, 1.0)}), dict(bounds={"alpha": (0, 1)})])
def test_spec_validation(kwargs):
    base = dict(free_side="donor", fixed_pulse=ION.pulse, target_p1=0.05)
    with pytest.raises(ValueError):
        OptimizationSpec(**{**base, **kwargs})


def test_default_bounds_cover_printed_pulses():
    for p in (DONOR.pulse, ION.pulse):
        for k in ("sigma1", "sigma2", "tau", "t_hold", "omega_max", "theta1"):
            lo, hi = DEFAULT_BOUNDS[k]
            assert lo <= getattr(p, k) <= hi
