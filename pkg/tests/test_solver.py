"""Graded mesh, Duhamel machinery, Picard iteration, and the ETD oracle."""

import math

import numpy as np
import pytest

from stokesbesov import (BesovIndex, SolverConfig, SpectralField, besov_norm,
                         critical_index, duhamel_apply, etd_timestep,
                         evaluate_at, heat_apply, linear_trajectory,
                         picard_solve, residual, trajectory_norm, zero_field)
from stokesbesov.semigroup import loglog_slope
from stokesbesov.solver import Trajectory

from oracles import quad_duhamel

LAMBDA_MIN = 5.783185962946785


def _cfg(basis, grid, mesh=16, T=0.5, **kw):
    return SolverConfig(basis=basis, grid=grid, p=4.0, T=T, mesh_count=mesh,
                        **kw)


def _mode_index(basis, n, parity, k):
    for i, m in enumerate(basis.modes):
        if (m.n, m.parity, m.k) == (n, parity, k):
            return i
    raise LookupError((n, parity, k))


def _two_mode(basis, eps):
    u = zero_field(basis)
    u.coeffs[_mode_index(basis, 0, "cos", 1)] = eps
    u.coeffs[_mode_index(basis, 1, "cos", 1)] = eps
    return u


def test_mesh_grading(basis_88, grid_small):
    cfg = _cfg(basis_88, grid_small, mesh=10, T=2.0)
    mesh = cfg.mesh()
    assert mesh[0] == 0.0
    assert mesh[-1] == 2.0
    i = np.arange(11, dtype=float)
    assert np.array_equal(mesh, 2.0 * (i / 10.0) ** 3.0)


def test_config_validation(basis_88, grid_small):
    with pytest.raises(ValueError):
        SolverConfig(basis=basis_88, grid=grid_small, p=2.0, T=0.5,
                     mesh_count=8)
    with pytest.raises(ValueError):
        _cfg(basis_88, grid_small, T=0.0)
    with pytest.raises(ValueError):
        _cfg(basis_88, grid_small, mesh=0)
    with pytest.raises(ValueError):
        _cfg(basis_88, grid_small, gamma=0.5)
    with pytest.raises(ValueError):
        _cfg(basis_88, grid_small, q=0.5)


def test_linear_trajectory_zero_data(basis_88, grid_small):
    cfg = _cfg(basis_88, grid_small)
    traj = linear_trajectory(zero_field(basis_88), cfg)
    assert trajectory_norm(traj, cfg.p, grid=grid_small) == 0.0


def test_linear_bound_mesh_stable(basis_88, grid_small):
    # Y-norm of the heat flow against the critical block norm of the data;
    # the constant must not move when the mesh doubles twice
    rng = np.random.default_rng(61)
    u0 = SpectralField(basis_88, rng.standard_normal(basis_88.n_modes))
    idx = BesovIndex(critical_index(4.0), 4.0, math.inf)
    denom = besov_norm(u0, idx, grid_small).value
    ratios = []
    for mesh in (16, 32, 64):
        cfg = _cfg(basis_88, grid_small, mesh=mesh)
        ratios.append(trajectory_norm(linear_trajectory(u0, cfg), 4.0,
                                      grid=grid_small) / denom)
    assert abs(ratios[-1] - ratios[0]) / ratios[0] <= 0.25


def test_duhamel_zero_forcing(basis_88, grid_small):
    cfg = _cfg(basis_88, grid_small)
    traj = linear_trajectory(zero_field(basis_88), cfg)
    out = duhamel_apply(traj, cfg.mesh_count, cfg)
    assert not out.coeffs.any()


def test_duhamel_constant_forcing(basis_88, grid_small):
    """Constant one-mode forcing has the closed form c (1 - e^{-t lam})/lam,
    which the exponential cell moments reproduce to machine accuracy; an
    adaptive quadrature of the same integral agrees independently."""
    cfg = _cfg(basis_88, grid_small, mesh=12, T=0.8)
    times = cfg.mesh()
    c = 0.7
    fields = []
    for _ in times:
        f = zero_field(basis_88)
        f.coeffs[0] = c
        fields.append(f)
    forcing = Trajectory(times, tuple(fields), basis_88, grid_small, "test")
    for idx in (1, 5, 12):
        t = times[idx]
        got = duhamel_apply(forcing, idx, cfg).coeffs[0]
        closed = c * -math.expm1(-t * LAMBDA_MIN) / LAMBDA_MIN
        assert got == pytest.approx(closed, rel=1e-13)
        assert got == pytest.approx(quad_duhamel(lambda s: c, t, LAMBDA_MIN),
                                    rel=1e-10)


def test_duhamel_linear_forcing(basis_88, grid_small):
    # g(s) = s is reproduced exactly by the piecewise-linear moments
    cfg = _cfg(basis_88, grid_small, mesh=12, T=0.8)
    times = cfg.mesh()
    fields = []
    for t in times:
        f = zero_field(basis_88)
        f.coeffs[0] = t
        fields.append(f)
    forcing = Trajectory(times, tuple(fields), basis_88, grid_small, "test")
    t = times[9]
    got = duhamel_apply(forcing, 9, cfg).coeffs[0]
    lam = LAMBDA_MIN
    closed = t / lam - -math.expm1(-t * lam) / lam ** 2
    assert got == pytest.approx(closed, rel=1e-12)
    assert got == pytest.approx(quad_duhamel(lambda s: s, t, lam), rel=1e-10)


def test_duhamel_rejects_foreign_mesh(basis_88, grid_small):
    cfg = _cfg(basis_88, grid_small, mesh=12)
    other = _cfg(basis_88, grid_small, mesh=10)
    traj = linear_trajectory(zero_field(basis_88), other)
    with pytest.raises(ValueError):
        duhamel_apply(traj, 5, cfg)


def test_picard_zero_data(basis_88, grid_small):
    traj, report = picard_solve(zero_field(basis_88), _cfg(basis_88, grid_small))
    assert report.converged
    assert report.iterations == 1
    assert not any(f.coeffs.any() for f in traj.fields)


def test_picard_single_mode_immediate(basis_88, grid_small):
    """One eigenmode is a steady shape: its convection term projects to
    zero, so the heat flow is already the fixed point and the first update
    is pure roundoff."""
    u0 = zero_field(basis_88)
    u0.coeffs[0] = 1e-3
    cfg = _cfg(basis_88, grid_small)
    traj, report = picard_solve(u0, cfg)
    assert report.converged
    assert report.iterations <= 2
    assert report.final_residual <= cfg.picard_tol
    for t, f in traj:
        assert f.coeffs[0] == pytest.approx(1e-3 * math.exp(-t * LAMBDA_MIN),
                                            rel=1e-9)


def test_picard_contraction_scales_with_data(basis_88, grid_small):
    """The first contraction quotient is linear in the data size: fitting
    ratio against eps across two decades gives slope 1.  Needs genuinely
    interacting modes, a single mode produces no quotient at all."""
    cfg = _cfg(basis_88, grid_small, mesh=24)
    eps = np.array([1e-3, 1e-2, 1e-1])
    quotients = []
    for e in eps:
        _, report = picard_solve(_two_mode(basis_88, e), cfg)
        assert report.converged
        quotients.append(report.ratios[0])
    slope = loglog_slope(eps, np.array(quotients))
    assert slope == pytest.approx(1.0, abs=0.15)


def test_etd_linear_decay(basis_88, grid_small):
    u0 = zero_field(basis_88)
    u0.coeffs[0] = 1.0
    cfg = _cfg(basis_88, grid_small)
    traj = etd_timestep(u0, 0.01, 20, cfg)
    assert traj.blowup_time is None
    assert traj.times[-1] == pytest.approx(0.2, rel=1e-12)
    for t, f in traj:
        assert f.coeffs[0] == pytest.approx(math.exp(-t * LAMBDA_MIN),
                                            rel=1e-12)


def test_etd_validation(basis_88, grid_small):
    cfg = _cfg(basis_88, grid_small)
    with pytest.raises(ValueError):
        etd_timestep(zero_field(basis_88), 0.0, 5, cfg)
    with pytest.raises(ValueError):
        etd_timestep(zero_field(basis_88), 0.01, 0, cfg)


def test_etd_matches_picard(basis_88, grid_small):
    # two independent discretizations of the mild equation meet at t = 0.1
    u0 = _two_mode(basis_88, 1e-2)
    cfg = _cfg(basis_88, grid_small, mesh=64)
    traj, report = picard_solve(u0, cfg)
    assert report.converged
    via_picard = evaluate_at(traj, u0, 0.1, cfg)
    via_etd = etd_timestep(u0, 0.1 / 256, 256, cfg).fields[-1]
    num = np.linalg.norm(via_picard.coeffs - via_etd.coeffs)
    den = np.linalg.norm(via_etd.coeffs)
    assert num / den < 1e-6


def test_evaluate_at_nodes_and_origin(basis_88, grid_small):
    u0 = _two_mode(basis_88, 1e-3)
    cfg = _cfg(basis_88, grid_small, mesh=24)
    traj, report = picard_solve(u0, cfg)
    assert report.converged
    at0 = evaluate_at(traj, u0, 0.0, cfg)
    assert np.array_equal(at0.coeffs, u0.coeffs)
    times = cfg.mesh()
    for i in (1, 12, 24):
        got = evaluate_at(traj, u0, times[i], cfg)
        assert np.max(np.abs(got.coeffs - traj.fields[i].coeffs)) < 1e-8


def test_evaluate_at_validation(basis_88, grid_small):
    cfg = _cfg(basis_88, grid_small, mesh=12)
    u0 = zero_field(basis_88)
    traj = linear_trajectory(u0, cfg)
    with pytest.raises(ValueError):
        evaluate_at(traj, u0, cfg.T + 0.1, cfg)
    with pytest.raises(ValueError):
        evaluate_at(traj, u0, -0.1, cfg)
    with pytest.raises(ValueError):
        evaluate_at(traj, u0, 0.1, _cfg(basis_88, grid_small, mesh=10))


def test_residual_linear_single_mode(basis_88, grid_small):
    # no nonlinearity to defect against: the heat flow plugs in exactly
    u0 = zero_field(basis_88)
    u0.coeffs[0] = 1.0
    cfg = _cfg(basis_88, grid_small)
    traj = linear_trajectory(u0, cfg)
    assert residual(traj, u0, cfg) < 1e-12


def test_residual_converged_and_perturbed(basis_88, grid_small):
    u0 = _two_mode(basis_88, 1e-2)
    cfg = _cfg(basis_88, grid_small, mesh=24)
    traj, report = picard_solve(u0, cfg)
    assert report.converged
    base = residual(traj, u0, cfg)
    assert base <= 10.0 * cfg.picard_tol

    bent = list(traj.fields)
    bent[8] = SpectralField(basis_88, 1.01 * bent[8].coeffs)
    bad = Trajectory(traj.times, tuple(bent), basis_88, grid_small, "bent")
    worse = residual(bad, u0, cfg)
    assert worse > 100.0 * max(base, 1e-12)
    assert worse > 1e-6


def test_residual_rejects_foreign_mesh(basis_88, grid_small):
    cfg = _cfg(basis_88, grid_small, mesh=12)
    traj = linear_trajectory(zero_field(basis_88), cfg)
    with pytest.raises(ValueError):
        residual(traj, zero_field(basis_88), _cfg(basis_88, grid_small, mesh=8))
