"""Dyadic partition of unity: exact support arithmetic and spectral action."""

import math

import numpy as np
import pytest

from stokesbesov import (DEFAULT_PARTITION, SpectralField, active_bands,
                         apply_band, apply_window, build_basis, zero_field)

J01 = 2.404825557695773


def test_eta_branches():
    eta = DEFAULT_PARTITION.eta
    assert eta(0.9) == 1.0
    assert eta(2.5) == 0.0
    assert eta(1.5) == pytest.approx(0.5, abs=1e-15)


def test_phi_telescoping_sum():
    total = sum(DEFAULT_PARTITION.phi(j, 3.0) for j in range(-30, 31))
    assert abs(total - 1.0) < 1e-15


def test_phi_plateau_and_support_points():
    assert DEFAULT_PARTITION.phi(2, 4.0) == 1.0
    assert DEFAULT_PARTITION.phi(5, 3.0) == 0.0


def test_phi_range_and_support_property():
    rng = np.random.default_rng(99)
    x = np.exp(rng.uniform(math.log(1e-3), math.log(1e4), size=4000))
    for j in (-4, 0, 3, 9):
        vals = DEFAULT_PARTITION.phi(j, x)
        assert np.all(vals >= 0.0) and np.all(vals <= 1.0)
        outside = (x <= math.ldexp(1.0, j - 1)) | (x >= math.ldexp(1.0, j + 1))
        assert np.all(vals[outside] == 0.0)


def test_phi_rejects_nonpositive():
    with pytest.raises(ValueError):
        DEFAULT_PARTITION.phi(0, 0.0)
    with pytest.raises(ValueError):
        DEFAULT_PARTITION.phi(0, np.array([1.0, -2.0]))


def test_window_covers_band_support():
    rng = np.random.default_rng(100)
    for j in (-2, 1, 6):
        lo, hi = math.ldexp(1.0, j - 1), math.ldexp(1.0, j + 1)
        x = np.exp(rng.uniform(math.log(lo * 1.0001), math.log(hi * 0.9999), 500))
        on_support = DEFAULT_PARTITION.phi(j, x) > 0.0
        window = DEFAULT_PARTITION.window(j, x)
        assert np.all(window[on_support] == 1.0)


def test_apply_band_empty_band(basis_88):
    f = SpectralField(basis_88, np.ones(basis_88.n_modes))
    out = apply_band(f, -20)
    assert not np.any(out.coeffs)


def test_apply_band_single_low_mode(basis_88):
    # sqrt(lambda) = j_{0,1} = 2.4048 sits in the supports of bands 1 and 2 only
    f = zero_field(basis_88)
    f.coeffs[0] = 1.0
    assert abs(math.sqrt(basis_88.lam[0]) - J01) < 1e-12
    hot = [j for j in range(-10, 12) if np.any(apply_band(f, j).coeffs)]
    assert hot and set(hot) <= {1, 2}


def test_apply_band_partition_of_unity(basis_88):
    rng = np.random.default_rng(7)
    f = SpectralField(basis_88, rng.standard_normal(basis_88.n_modes))
    total = np.zeros(basis_88.n_modes)
    for j in active_bands(basis_88):
        total += apply_band(f, j).coeffs
    assert np.max(np.abs(total - f.coeffs)) < 1e-14 * np.max(np.abs(f.coeffs))


def test_apply_window_is_identity_on_band(basis_88):
    rng = np.random.default_rng(8)
    f = SpectralField(basis_88, rng.standard_normal(basis_88.n_modes))
    for j in active_bands(basis_88):
        banded = apply_band(f, j)
        again = apply_window(banded, j)
        assert np.max(np.abs(again.coeffs - banded.coeffs)) < 1e-16


def test_active_bands_default_truncation(basis_3232):
    # sqrt(lambda) spans [2.4048, ~146.5] at (32, 32)
    rng = active_bands(basis_3232)
    assert (rng.j_lo, rng.j_hi) == (1, 8)
    assert len(rng) == 8
    assert 3 in rng and 0 not in rng


def test_active_bands_outside_range_kills_basis(basis_88):
    rng = active_bands(basis_88)
    f = SpectralField(basis_88, np.ones(basis_88.n_modes))
    for j in (rng.j_lo - 1, rng.j_hi + 1):
        assert not np.any(apply_band(f, j).coeffs)


def test_active_bands_plateau_eigenvalue():
    # a basis whose only frequency is exactly 2^2: phi_2 = 1 there and the
    # neighbors vanish, so the range collapses to [2, 2]
    basis = build_basis(0, 1)
    basis.lam[0] = 16.0          # synthetic plateau eigenvalue, sqrt = 4
    rng = active_bands(basis)
    assert (rng.j_lo, rng.j_hi) == (2, 2)
    assert DEFAULT_PARTITION.phi(2, 4.0) == 1.0
    assert DEFAULT_PARTITION.phi(1, 4.0) == 0.0
    assert DEFAULT_PARTITION.phi(3, 4.0) == 0.0


def test_active_bands_empty_basis_errors():
    basis_like = type("Stub", (), {"n_modes": 0, "lam": np.array([])})()
    with pytest.raises(ValueError):
        active_bands(basis_like)
