"""Torus-grid quadrature: FFT rows against direct summation, band-limited
exactness, refinement, and minor-arc restriction."""

import math
import random

import numpy as np
import pytest

from wmvlab import torusgrid
from wmvlab.arcs import classify
from wmvlab.counting import moment_count
from wmvlab.phase import FixedPhase, eval_g
from wmvlab.torusgrid import (
    GridSpec,
    amplitude_row,
    arc_mask,
    auto_spec_even,
    auto_spec_start,
    even_moment_exact,
    load_row,
    moment_estimate,
    restricted_moment,
    restricted_profile,
    save_row,
)


def test_gridspec_floors():
    GridSpec(17, 5, 2)  # the smallest legal grid for X=2
    with pytest.raises(ValueError):
        GridSpec(16, 5, 2)
    with pytest.raises(ValueError):
        GridSpec(17, 4, 2)
    with pytest.raises(ValueError):
        GridSpec(17, 5, 0)


def test_amplitude_row_small_example():
    spec = GridSpec(17, 5, 2)
    row = amplitude_row(2, spec, 0)
    assert row[0] == pytest.approx(2.0, abs=1e-12)
    for i in range(17):
        want = abs(np.exp(2j * np.pi * i / 17) + np.exp(2j * np.pi * 8 * i / 17))
        assert row[i] == pytest.approx(want, abs=1e-12)


def test_amplitude_row_at_origin_is_x():
    for X in (1, 3, 7):
        spec = auto_spec_even(X, 2)
        assert amplitude_row(X, spec, 0)[0] == pytest.approx(float(X), rel=1e-12)


def test_amplitude_row_matches_eval_g():
    rng = random.Random(83)
    X = 6
    spec = auto_spec_even(X, 2)
    for j in (0, 1, spec.Mbeta // 2, spec.Mbeta - 1):
        row = amplitude_row(X, spec, j)
        beta = FixedPhase.from_rational(j, spec.Mbeta)
        for _ in range(40):
            i = rng.randrange(spec.Malpha)
            alpha = FixedPhase.from_rational(i, spec.Malpha)
            assert abs(row[i] - abs(eval_g(alpha, beta, X))) < 1e-8


def test_amplitude_row_guards():
    spec = GridSpec(17, 5, 2)
    with pytest.raises(ValueError):
        amplitude_row(3, spec, 0)
    with pytest.raises(ValueError):
        amplitude_row(2, spec, 5)
    big = GridSpec(1 << 29, 5, 2)
    with pytest.raises(ValueError):
        amplitude_row(2, big, 0)


def test_even_moment_exact_examples():
    assert even_moment_exact(5, 2).value == pytest.approx(5.0, rel=1e-9)
    assert even_moment_exact(2, 6).value == pytest.approx(20.0, rel=1e-9)
    assert even_moment_exact(8, 4).value == pytest.approx(120.0, rel=1e-9)
    est = even_moment_exact(5, 2)
    assert est.exact and est.err_est == 0.0


def test_even_moment_agrees_with_counts():
    # the acceptance suite runs the full {2,4,8,12,16} x {2,4,6} table
    for X in (2, 4, 8):
        for s in (2, 4, 6):
            want = moment_count(X, s)
            got = even_moment_exact(X, s).value
            assert got == pytest.approx(float(want), rel=1e-9)


def test_even_moment_guards():
    with pytest.raises(ValueError):
        even_moment_exact(5, 3)
    with pytest.raises(ValueError):
        even_moment_exact(500, 6)  # 3X^3 past the 2^28 guard


def test_doubling_past_nyquist_is_stable():
    from wmvlab.torusgrid import _grid_mean
    X, s = 6, 4
    base = auto_spec_even(X, s)
    v1 = _grid_mean(X, s, base)
    v2 = _grid_mean(X, s, GridSpec(base.Malpha * 2, base.Mbeta * 2, X))
    assert abs(v2 - v1) <= 1e-9 * abs(v1)


def test_moment_estimate_even_converges_immediately():
    est = moment_estimate(5, 2, 1e-6)
    assert est.value == pytest.approx(5.0, abs=1e-6 * 5)
    assert est.exact and est.converged
    est6 = moment_estimate(2, 6, 1e-6)
    assert est6.value == pytest.approx(20.0, rel=1e-6)


def test_moment_estimate_odd_reproducible_and_close_to_fine_grid():
    est1 = moment_estimate(2, 3, 1e-4)
    est2 = moment_estimate(2, 3, 1e-4)
    assert est1.value == est2.value  # bit-for-bit rerun
    assert not est1.exact
    # independent fine-grid quadrature oracle at X=2
    Ma, Mb = 8192, 64
    i = np.arange(Ma)
    cube = np.exp(2j * np.pi * i / Ma)[None, :]  # x=1 alpha factor
    cube8 = np.exp(2j * np.pi * (8 * i % Ma) / Ma)[None, :]
    j = np.arange(Mb)
    lin1 = np.exp(2j * np.pi * j / Mb)[:, None]
    lin2 = np.exp(2j * np.pi * (2 * j % Mb) / Mb)[:, None]
    g = np.abs(cube * lin1 + cube8 * lin2)
    oracle = float((g ** 3).mean())
    assert est1.value == pytest.approx(oracle, rel=5e-4)


def test_moment_estimate_guards():
    with pytest.raises(ValueError):
        moment_estimate(4, 0, 1e-3)
    with pytest.raises(ValueError):
        moment_estimate(4, 3, 0.0)


def test_refine_reports_nonconvergence(monkeypatch):
    # shrink the memory guard so the doubling loop must give up
    monkeypatch.setattr(torusgrid, "MALPHA_GUARD", 256)
    est = moment_estimate(2, 3, 1e-12)
    assert not est.converged
    assert est.err_est > 0.0


def test_cauchy_schwarz_chain_at_x4():
    vals = {}
    for s in (2, 3, 4, 5, 6):
        vals[s] = moment_estimate(4, s, 1e-6).value
    for s in (3, 4, 5):
        assert vals[s] ** 2 <= vals[s - 1] * vals[s + 1] * (1 + 1e-6)


def test_arc_mask_examples():
    X = 6
    spec = GridSpec(2048, 16, X)
    mask = arc_mask(spec, 2, X)
    assert not mask[0]  # alpha = 0 is major
    assert not mask[1024]  # alpha = 1/2, q = 2 <= Q
    assert mask[341]  # 341/2048, far from every low-q rational
    # bulk of the grid stays minor at small Q
    assert mask.sum() > 0.8 * 2048


def test_arc_mask_matches_classify_everywhere():
    X, Q = 6, 5
    spec = GridSpec(2048, 16, X)
    mask = arc_mask(spec, Q, X)
    for i in range(spec.Malpha):
        is_minor = not classify(FixedPhase.from_rational(i, spec.Malpha), Q, X).major
        assert mask[i] == is_minor


def test_arc_mask_guards():
    spec = GridSpec(2048, 16, 6)
    with pytest.raises(ValueError):
        arc_mask(spec, 0.5, 6)
    with pytest.raises(ValueError):
        arc_mask(spec, 15, 6)  # above X^1.5 = 14.7


def test_restricted_le_unrestricted():
    for X, s, Q in ((4, 4, 2), (8, 4, 1), (6, 6, 3)):
        full = even_moment_exact(X, s).value
        part = restricted_moment(X, s, Q, 1e-3).value
        assert part <= full * (1 + 1e-9)


def test_restricted_monotone_on_shared_grid():
    ests = restricted_profile(8, 4, [2, 4, 8], 1e-3)
    vals = [e.value for e in ests]
    assert vals[0] >= vals[1] >= vals[2]
    # shared final grid across cutoffs
    assert len({e.spec for e in ests}) == 1


def test_restricted_against_masked_direct_oracle():
    """Q=1, X=8, s=4: direct masked quadrature on the final grid."""
    est = restricted_moment(8, 4, 1, 1e-3)
    spec = est.spec
    X = 8
    x = np.arange(1, X + 1)
    i = np.arange(spec.Malpha)
    alpha_part = np.exp(2j * np.pi * np.outer((x ** 3) % spec.Malpha, i) / spec.Malpha)
    keep = np.flatnonzero(arc_mask(spec, 1, X))
    total = 0.0
    for j in range(spec.Mbeta):
        w = np.exp(2j * np.pi * ((j * x) % spec.Mbeta) / spec.Mbeta)
        g = np.abs(w @ alpha_part[:, keep])
        total += float((g ** 4).sum())
    oracle = total / (spec.Malpha * spec.Mbeta)
    assert est.value == pytest.approx(oracle, rel=1e-9)
    assert est.boundary_bound is not None and est.boundary_bound > 0
    assert est.converged and not est.exact


def test_restricted_profile_guards():
    with pytest.raises(ValueError):
        restricted_profile(8, 4, [9], 1e-3)  # Q > X
    with pytest.raises(ValueError):
        restricted_profile(8, 4, [0.5], 1e-3)
    with pytest.raises(ValueError):
        restricted_profile(8, 0, [2], 1e-3)


def test_boundary_bound_formula():
    from wmvlab.torusgrid import _arc_count
    est = restricted_moment(6, 4, 3, 1e-3)
    want = _arc_count(3) * (2 * 3.0 / 6 ** 3) * 6.0 ** 4 / est.spec.Malpha
    assert est.boundary_bound == pytest.approx(want, rel=1e-12)


def test_auto_spec_choices():
    even = auto_spec_even(4, 6)
    assert even.Malpha >= 3 * 64 + 1 and even.Mbeta >= 3 * 4 + 1
    assert even.Malpha & (even.Malpha - 1) == 0
    start = auto_spec_start(4, 9)
    assert start.Malpha >= 2 * 64 + 1 and start.Mbeta >= 2 * 4 + 1


def test_row_dump_roundtrip(tmp_path):
    spec = GridSpec(32, 8, 2)
    row = amplitude_row(2, spec, 3)
    path = str(tmp_path / "row.bin")
    save_row(row, path)
    back = load_row(path)
    assert np.array_equal(back, row)
    raw = open(path, "rb").read()
    assert raw[:7] == b"WMVROW1"
    open(path, "wb").write(b"XXXXXXX" + raw[7:])
    with pytest.raises(ValueError):
        load_row(path)
    open(path, "wb").write(raw[:-4])
    with pytest.raises(ValueError):
        load_row(path)
