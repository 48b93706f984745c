import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hsfm.fan import FanGrid, build_fan
from hsfm.hgroup import GroupFunction, GroupGrid, GroupPoint, inner, left_translate, lp_norm
from hsfm.sft import (SpectralFunction, forward, forward_many, inverse, inverse_many, mixed_norm,
                      plancherel_norm, project, projection_residual, spectral_inner, twisted_convolve)
from hsfm.specfun import c_norm_float, laguerre_fn
from hsfm.verify import gaussian

from conftest import shifted_spectrum


def random_function(grid, seed, real=False):
    r = np.random.default_rng(seed)
    v = r.normal(size=grid.shape)
    if not real:
        v = v + 1j * r.normal(size=grid.shape)
    return GroupFunction(grid, v)


def test_twisted_convolve_lambda_zero_is_periodic_convolution():
    grid = GroupGrid(1, 2.0, 8, 1.0, 4)
    r = np.random.default_rng(0)
    a, b = r.normal(size=64) + 1j * r.normal(size=64), r.normal(size=64)
    got = twisted_convolve(a, b, 0.0, grid)
    # arrays index (y, x) with x fastest; circular convolution about the centre sample
    A, B = a.reshape(8, 8), b.reshape(8, 8)
    conv = np.fft.ifft2(np.fft.fft2(np.fft.ifftshift(A)) * np.fft.fft2(B)) * grid.dV
    np.testing.assert_allclose(got, conv.ravel(), atol=1e-12)


def test_twisted_convolve_delta_and_bruteforce():
    grid = GroupGrid(1, 2.0, 4, 1.0, 4)
    r = np.random.default_rng(1)
    f1 = r.normal(size=16) + 1j * r.normal(size=16)
    delta = np.zeros(16)
    delta[grid.origin_index] = 1 / grid.dV
    np.testing.assert_allclose(twisted_convolve(f1, delta, 1.7, grid), f1, atol=1e-14)
    f1 = np.zeros(16, complex)
    f2 = np.zeros(16, complex)
    f1[[3, 9]] = [1.5, -2j]
    f2[[0, 13]] = [0.5 + 1j, 2.0]
    lam = 0.9
    z = grid.z[:, 0]
    brute = np.zeros(16, complex)
    for a in range(16):
        for b in range(16):
            d = z[a] - z[b]
            dr = (d.real + grid.Lz) % (2 * grid.Lz) - grid.Lz
            di = (d.imag + grid.Lz) % (2 * grid.Lz) - grid.Lz
            idx = grid.locate(np.array([dr + 1j * di]))
            brute[a] += f1[idx] * f2[b] * np.exp(0.5j * lam * np.imag(z[a] * np.conj(z[b]))) * grid.dV
    np.testing.assert_allclose(twisted_convolve(f1, f2, lam, grid), brute, atol=1e-13)


def test_forward_of_delta(small):
    grid, fan = small
    F = forward(GroupFunction.delta(grid), fan)
    for k in range(fan.Kmax + 1):
        for i, lam in enumerate(fan.lambdas):
            expect = c_norm_float(1, k) * laguerre_fn(k, 1, lam, grid.z)
            np.testing.assert_allclose(F.values[k, i], expect, atol=1e-12)


def test_forward_of_delta_n2():
    grid = GroupGrid(2, 3.0, 6, 2.0, 8)
    fan = build_fan(grid, 3)
    F = forward(GroupFunction.delta(grid), fan)
    for k in range(4):
        np.testing.assert_allclose(F.values[k, 2], c_norm_float(2, k) * laguerre_fn(k, 2, fan.lambdas[2], grid.z),
                                   atol=1e-12)


def test_single_mode():
    grid = GroupGrid(1, 8.0, 48, 4.0, 16)
    fan = build_fan(grid, 6)
    k0, i0 = 2, fan.node_index(2 * fan.dlambda)
    lam0 = fan.lambdas[i0]
    f = GroupFunction.from_callable(grid, lambda z, t: np.exp(1j * lam0 * t) * laguerre_fn(k0, 1, lam0, z))
    F = forward(f, fan)
    expect = 2 * grid.Lt * 2 * math.pi / abs(lam0) * laguerre_fn(k0, 1, lam0, grid.z)
    peak = np.abs(expect).max()
    np.testing.assert_allclose(F.values[k0, i0], expect, atol=1e-6 * peak)
    mask = np.ones(fan.shape, bool)
    mask[k0, i0] = False
    assert np.abs(F.values[mask]).max() < 1e-6 * peak


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1), st.booleans())
def test_l1_to_sup_bound(seed, real):
    grid = GroupGrid(1, 3.0, 8, 2.0, 8)
    f = random_function(grid, seed, real)
    F = forward(f, build_fan(grid, 8))
    assert np.abs(F.values).max() <= lp_norm(f, 1) * (1 + 1e-12)


def test_forward_linear_and_zero(small):
    grid, fan = small
    f, g = random_function(grid, 1), random_function(grid, 2)
    assert not np.any(forward(GroupFunction.zeros(grid), fan).values)
    lhs = forward(f * 2.0 + g * (1 - 3j), fan).values
    rhs = 2.0 * forward(f, fan).values + (1 - 3j) * forward(g, fan).values
    np.testing.assert_allclose(lhs, rhs, atol=1e-10 * np.abs(rhs).max())


def test_inverse_linear_and_zero(small):
    grid, fan = small
    r = np.random.default_rng(3)
    shape = fan.shape + (grid.n_spatial,)
    F = SpectralFunction(fan, grid, r.normal(size=shape) + 1j * r.normal(size=shape))
    G = SpectralFunction(fan, grid, r.normal(size=shape))
    assert not np.any(inverse(SpectralFunction.zeros(fan, grid)).values)
    lhs = inverse(F * 0.5 + G * 2j).values
    rhs = 0.5 * inverse(F).values + 2j * inverse(G).values
    np.testing.assert_allclose(lhs, rhs, atol=1e-12 * np.abs(rhs).max())


def test_batched_matches_single(small):
    grid, fan = small
    fs = [random_function(grid, s) for s in range(3)]
    for F, f in zip(forward_many(fs, fan), fs):
        np.testing.assert_allclose(F.values, forward(f, fan).values, rtol=0, atol=1e-12)
    Fs = forward_many(fs, fan)
    for g, F in zip(inverse_many(Fs), Fs):
        np.testing.assert_allclose(g.values, inverse(F).values, rtol=0, atol=1e-12)


def test_threads_do_not_change_bits(small):
    grid, fan = small
    f = random_function(grid, 9)
    a = forward(f, fan, threads=1)
    b = forward(f, fan, threads=3)
    np.testing.assert_array_equal(a.values, b.values)
    np.testing.assert_array_equal(inverse(a, 1).values, inverse(a, 3).values)


def test_conjugation_symmetry(small):
    grid, fan = small
    F = forward(random_function(grid, 4, real=True), fan)
    J = fan.Nt // 2
    for j in range(1, J):
        pos, neg = J - 1 + j, J - j
        np.testing.assert_allclose(F.values[:, neg], np.conj(F.values[:, pos]), atol=1e-12)


def test_plancherel_norm_single_point(small):
    grid, fan = small
    v = np.zeros(fan.shape + (grid.n_spatial,), complex)
    v[3, 5, 17] = 2 - 1j
    F = SpectralFunction(fan, grid, v)
    assert plancherel_norm(SpectralFunction.zeros(fan, grid)) == 0
    expect = abs(2 - 1j) * math.sqrt(fan.weights("nu2")[3, 5] * grid.dV)
    assert plancherel_norm(F) == pytest.approx(expect, rel=1e-14)
    assert mixed_norm(F, 3, 1.5, "mu", weight=2.0) == pytest.approx(
        abs(2 - 1j) * grid.dV ** (1 / 3) * (2 * fan.weights("mu")[3, 5]) ** (1 / 1.5), rel=1e-13)


def test_mixed_norm_reduces_to_plancherel(small):
    grid, fan = small
    F = forward(gaussian(grid, 0.5, 0.5), fan)
    assert mixed_norm(F, 2, 2) == pytest.approx(plancherel_norm(F), rel=1e-12)
    w = np.abs(fan.lambdas)[None, :] ** fan.n * np.ones((fan.Kmax + 1, 1))
    assert mixed_norm(F, 2, 2, "mu", w) == pytest.approx(plancherel_norm(F), rel=1e-12)
    with pytest.raises(ValueError):
        mixed_norm(F, 0.5, 2)
    with pytest.raises(ValueError):
        mixed_norm(F, 2, 2, weight=-np.ones(fan.shape))


def test_plancherel_and_polarization(default, frozen):
    grid, fan = default
    tol = frozen["plancherel"]["threshold"]
    f = gaussian(grid, 0.6, 0.8, omega=2.0)
    g = gaussian(grid, 0.9, 0.5, z0=np.array([0.5 - 0.5j]), omega=1.5)
    F, G = forward_many([f, g], fan)
    assert abs(plancherel_norm(F) / lp_norm(f, 2) - 1) <= tol
    ip = inner(f, g)
    assert abs(spectral_inner(F, G) - ip) <= tol * lp_norm(f, 2) * lp_norm(g, 2)


def test_projection_residual_discriminates(small):
    grid, fan = small
    r = np.random.default_rng(5)
    shape = fan.shape + (grid.n_spatial,)
    noise = SpectralFunction(fan, grid, r.normal(size=shape) + 1j * r.normal(size=shape))
    assert projection_residual(noise) > 0.5
    assert projection_residual(SpectralFunction.zeros(fan, grid)) == 0


def test_projection_residual_refines():
    res = []
    for Nz in (24, 48):
        grid = GroupGrid(1, 6.0, Nz, 3.0, 16)
        F = forward(gaussian(grid, 0.5, 0.5, omega=2.0), build_fan(grid, 3))
        res.append(projection_residual(F))
    assert res[1] < 0.5 * res[0]
    assert res[1] < 0.2


def test_projection_residual_single_mode_refines():
    # the box, not the step, limits a single mode at small lambda
    out = []
    for Nz, Lz in ((16, 4.0), (32, 8.0)):
        grid = GroupGrid(1, Lz, Nz, 4.0, 8)
        fan = build_fan(grid, 2)
        v = np.zeros(fan.shape + (grid.n_spatial,), complex)
        i = fan.node_index(fan.dlambda)
        v[1, i] = laguerre_fn(1, 1, fan.lambdas[i], grid.z)
        out.append(projection_residual(SpectralFunction(fan, grid, v)))
    assert out[1] < 1e-3 < out[0]


def test_translation_covariance(small):
    grid, fan = small
    assert grid.heisenberg_periodic
    f = gaussian(grid, 0.7, 0.6, z0=np.array([1 - 1j]), omega=1.0)
    F = forward(f, fan)
    r = np.random.default_rng(8)
    for _ in range(3):
        u = complex(*r.integers(-5, 6, 2))
        s = float(r.integers(-12, 12)) * grid.dt
        G = forward(left_translate(f, GroupPoint(np.array([u]), s)), fan)
        expect = shifted_spectrum(F, u, s)
        assert np.abs(G.values - expect).max() <= 1e-10 * np.abs(F.values).max()


def test_near_idempotency(default, frozen):
    grid, fan = default
    pf = project(gaussian(grid, 0.5, 0.5, omega=2.0), fan)
    ppf = project(pf, fan)
    assert lp_norm(ppf - pf, 2) / lp_norm(pf, 2) <= frozen["band_limited"]["threshold"]


def test_roundtrip_refines(frozen):
    s = frozen["sample_roundtrip"]
    assert s["refined"] < s["default"] <= s["threshold"]


def test_spectral_function_checks(small):
    grid, fan = small
    with pytest.raises(ValueError):
        SpectralFunction(fan, grid, np.zeros(5))
    with pytest.raises(ValueError):
        SpectralFunction(FanGrid(1, 2, 9.0, 24), grid, np.zeros((3, 23, grid.n_spatial)))
