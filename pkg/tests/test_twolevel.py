import math
import warnings

import numpy as np
import pytest

from instanton1d import (kay_factor, overlap_even, overlap_odd, propagator_2x2,
                         resolvent_even, resolvent_odd, simplex_term_odd,
                         two_level_energies, wavefunction_amplitudes)
from instanton1d.errors import ResolventPoleError
from instanton1d.twolevel import laplace_overlap_numeric, simplex_term_even


def random_systems(n, seed=11):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        e_i = rng.uniform(0.2, 1.0)
        e_f = e_i + rng.uniform(0.0, 1.0)
        hbar = rng.uniform(0.5, 2.0)
        k = rng.uniform(1e-4, 0.4)
        g = int(rng.integers(1, 3))
        out.append(two_level_energies(e_i, e_f, hbar, k, g))
    return out


def test_trace_and_determinant_identities():
    for sys_ in random_systems(50):
        assert sys_.E_plus + sys_.E_minus == pytest.approx(
            sys_.e_i + sys_.e_f, rel=1e-14)
        det = sys_.e_i * sys_.e_f - sys_.degeneracy * (sys_.hbar * sys_.big_k) ** 2
        assert sys_.E_plus * sys_.E_minus == pytest.approx(det, rel=1e-12)
        assert sys_.E_minus <= min(sys_.e_i, sys_.e_f)
        assert sys_.E_plus >= max(sys_.e_i, sys_.e_f)


def test_equal_level_limit():
    sys_ = two_level_energies(0.5, 0.5, 1.0, 0.01, 1)
    assert sys_.E_plus == pytest.approx(0.5 + 0.01, rel=1e-14)
    assert sys_.E_minus == pytest.approx(0.5 - 0.01, rel=1e-14)
    assert sys_.small_k is None
    g2 = two_level_energies(0.5, 0.5, 1.0, 0.01, 2)
    assert g2.E_plus - g2.E_minus == pytest.approx(2 * math.sqrt(2) * 0.01,
                                                   rel=1e-14)


def test_decoupled_limit():
    sys_ = two_level_energies(0.4, 0.9, 1.0, 1e-12, 1)
    assert sys_.E_minus == pytest.approx(0.4, abs=1e-12)
    assert sys_.E_plus == pytest.approx(0.9, abs=1e-12)


def test_triple_well_gap_structure():
    # gap = (hbar om_m / 2) sqrt(1 + 8 k^2), k = 2K/om_m, from the g=2 machinery
    om_m, hbar, k_big = 1.0, 0.25, 0.11
    sys_ = two_level_energies(hbar * om_m / 2, hbar * om_m, hbar, k_big, 2)
    k_paper = 2.0 * k_big / om_m
    gap = 0.5 * hbar * om_m * math.sqrt(1.0 + 8.0 * k_paper**2)
    assert sys_.E_plus - sys_.E_minus == pytest.approx(gap, rel=1e-13)
    assert sys_.small_k == pytest.approx(math.sqrt(2) * k_paper, rel=1e-14)


def test_overlap_boundary_values():
    for sys_ in random_systems(10, seed=5):
        assert overlap_odd(sys_, 0.0) == 0.0
        assert overlap_even(sys_, 0.0) == pytest.approx(1.0, rel=1e-14)


def test_symmetric_limit_coefficient_half():
    sys_ = two_level_energies(0.5, 0.5, 1.0, 0.02, 1)
    tau = 3.0
    want = 0.5 * (math.exp(-sys_.E_minus * tau) - math.exp(-sys_.E_plus * tau))
    assert overlap_odd(sys_, tau) == pytest.approx(want, rel=1e-14)
    want = 0.5 * (math.exp(-sys_.E_minus * tau) + math.exp(-sys_.E_plus * tau))
    assert overlap_even(sys_, tau) == pytest.approx(want, rel=1e-14)


def test_overlaps_match_matrix_exponential():
    rng = np.random.default_rng(2)
    for sys_ in random_systems(25, seed=13):
        for tau in rng.uniform(0.0, 8.0, size=4):
            mat = propagator_2x2(sys_.e_i, sys_.e_f, sys_.hbar, sys_.big_k,
                                 sys_.degeneracy, float(tau))
            assert overlap_odd(sys_, float(tau)) == pytest.approx(
                mat[1, 0], rel=1e-12, abs=1e-300)
            assert overlap_even(sys_, float(tau)) == pytest.approx(
                mat[0, 0], rel=1e-12)


def test_overlap_slopes_at_zero():
    sys_ = two_level_energies(0.4, 0.7, 1.3, 0.05, 2)
    h = 1e-6
    even_slope = (overlap_even(sys_, h) - overlap_even(sys_, 0.0)) / h
    assert even_slope == pytest.approx(-sys_.e_i / sys_.hbar, rel=1e-5)
    odd_slope = (overlap_odd(sys_, h) - overlap_odd(sys_, 0.0)) / h
    assert odd_slope == pytest.approx(
        math.sqrt(sys_.degeneracy) * sys_.big_k, rel=1e-5)
    # same slopes from the truncated instanton series
    even_series = (simplex_term_even(0, sys_, h) + simplex_term_even(1, sys_, h)
                   - simplex_term_even(0, sys_, 0.0)) / h
    assert even_series == pytest.approx(-sys_.e_i / sys_.hbar, rel=1e-5)
    odd_series = simplex_term_odd(0, sys_, h) / h
    assert odd_series == pytest.approx(
        sys_.big_k * math.exp(-(sys_.e_i + sys_.e_f) * h / (2 * sys_.hbar)),
        rel=1e-4)


def test_resolvent_poles_and_duality():
    sys_ = two_level_energies(0.45, 0.85, 1.0, 0.06, 1)
    with pytest.raises(ResolventPoleError):
        resolvent_odd(sys_, sys_.E_minus)
    for j in range(1, 6):
        energy = sys_.E_minus - j * 0.12
        num = laplace_overlap_numeric(sys_, energy, odd=True)
        assert num == pytest.approx(resolvent_odd(sys_, energy), rel=1e-8)
        num = laplace_overlap_numeric(sys_, energy, odd=False)
        assert num == pytest.approx(resolvent_even(sys_, energy), rel=1e-8)


def test_resolvent_decoupled_limit():
    sys_ = two_level_energies(0.4, 0.9, 1.0, 1e-9, 1)
    energy = 0.1
    assert resolvent_even(sys_, energy) == pytest.approx(
        1.0 / (sys_.e_i - energy), rel=1e-12)


def test_simplex_term_elementary_integral():
    sys_ = two_level_energies(0.4, 0.9, 1.0, 0.05, 1)
    tau = 2.5
    want = (sys_.big_k * sys_.hbar / sys_.e_split
            * (math.exp(-sys_.e_i * tau) - math.exp(-sys_.e_f * tau)))
    assert simplex_term_odd(0, sys_, tau) == pytest.approx(want, rel=1e-11)
    # e_fi -> 0 limit: K tau e^{-e tau/hbar}
    tight = two_level_energies(0.5, 0.5 + 1e-9, 1.0, 0.05, 1)
    want = tight.big_k * tau * math.exp(-0.5 * tau)
    assert simplex_term_odd(0, tight, tau) == pytest.approx(want, rel=1e-6)


def test_partial_sums_converge_to_overlap():
    sys_ = two_level_energies(0.45, 0.8, 1.0, 0.12, 1)
    tau = 4.0
    total = sum(simplex_term_odd(n, sys_, tau) for n in range(9))
    assert total == pytest.approx(float(overlap_odd(sys_, tau)), rel=1e-10)
    total = sum(simplex_term_even(n, sys_, tau) for n in range(9))
    assert total == pytest.approx(float(overlap_even(sys_, tau)), rel=1e-10)


def test_partial_sums_with_degeneracy_normalization():
    # for g = 2 the resummed odd overlap is the symmetric-combination one:
    # sqrt(g) times the per-well path sum
    sys_ = two_level_energies(0.5, 1.0, 1.0, 0.09, 2)
    tau = 3.0
    total = sum(simplex_term_odd(n, sys_, tau) for n in range(10))
    assert math.sqrt(2.0) * total == pytest.approx(
        float(overlap_odd(sys_, tau)), rel=1e-10)


def test_wavefunction_amplitudes_tables():
    # symmetric double well, k -> infinity: both wells at 1/sqrt(2)
    sys_ = two_level_energies(0.5, 0.5, 1.0, 0.02, 1)
    rows = {(r["level"], r["well"]): r["mixing"]
            for r in wavefunction_amplitudes(sys_)}
    for key in rows:
        assert rows[key] == pytest.approx(math.sqrt(0.5), rel=1e-12)
    # triple well table: ground 0-well value sqrt((1 + (1+8k^2)^{-1/2})/2)
    om_m, hbar, k_big = 1.0, 0.2, 0.15
    sys3 = two_level_energies(hbar * om_m / 2, hbar * om_m, hbar, k_big, 2)
    k_paper = 2.0 * k_big / om_m
    q = (1.0 + 8.0 * k_paper**2) ** -0.5
    rows = {(r["level"], r["well"]): r["mixing"]
            for r in wavefunction_amplitudes(sys3)}
    assert rows[("ground", "initial")] == pytest.approx(
        math.sqrt((1 + q) / 2), rel=1e-12)
    assert rows[("ground", "final")] == pytest.approx(
        math.sqrt(1 - q) / 2, rel=1e-12)
    assert rows[("excited", "final")] == pytest.approx(
        math.sqrt(1 + q) / 2, rel=1e-12)
    assert rows[("excited", "initial")] == pytest.approx(
        math.sqrt((1 - q) / 2), rel=1e-12)
    assert rows[("parity", "initial")] == 0.0
    assert rows[("parity", "final")] == pytest.approx(math.sqrt(0.5), rel=1e-12)
    # k -> infinity limit of the triple ground state at the middle well
    sys_inf = two_level_energies(hbar * om_m / 2, hbar * om_m, hbar, 500.0, 2)
    rows = {(r["level"], r["well"]): r["mixing"]
            for r in wavefunction_amplitudes(sys_inf)}
    assert rows[("ground", "initial")] == pytest.approx(math.sqrt(0.5), rel=1e-3)


def test_kay_factor_forms_and_prefactor(sym10_solution, tri_solution):
    # omega_i = omega_f: prefactor is exactly 1
    k0 = 2.0 * math.sqrt(3.0)
    k = kay_factor(sym10_solution, k0, 1.0)
    want = math.sqrt(10.0 / (2.0 * math.pi)) * math.exp(-10.0) * k0
    assert k == pytest.approx(want, rel=1e-9)
    # triple well: prefactor (2 sqrt(2)/3)^{1/2}, pure arithmetic
    pref = (0.5 * (math.sqrt(2.0) + math.sqrt(0.5))) ** -0.5
    assert pref == pytest.approx((2.0 * math.sqrt(2.0) / 3.0) ** 0.5, rel=1e-14)
    hbar = 0.02
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        k3 = kay_factor(tri_solution, k0, hbar)
    want = pref * math.sqrt(0.25 / (2 * math.pi * hbar)) * math.exp(-0.25 / hbar) * k0
    assert k3 == pytest.approx(want, rel=1e-9)


def test_kay_factor_guards(sym10_solution):
    with pytest.raises(ValueError):
        kay_factor(sym10_solution, 1.0, hbar=20.0)  # S/hbar = 0.5
    with pytest.warns(UserWarning):
        kay_factor(sym10_solution, 2.0 * math.sqrt(3.0), hbar=4.0)  # S/hbar = 2.5


def test_branch_convention_enforced():
    with pytest.raises(ValueError):
        two_level_energies(0.9, 0.4, 1.0, 0.1, 1)
    with pytest.raises(ValueError):
        two_level_energies(0.4, 0.9, 1.0, -0.1, 1)
