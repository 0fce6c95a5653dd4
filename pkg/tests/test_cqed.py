import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.constants import hbar

from qthesis.cqed import (JCParams, TransmonParams, dispersive_params, excitation_numbers, jc_hamiltonian,
                          jc_spectrum, ladder, lc_mode, one_excitation_splitting, qubit_shift,
                          transmon_from_spectrum, transmon_spectrum)


def test_ladder_operator():
    a = ladder(4)
    assert np.allclose(np.diag(a.T @ a), np.arange(5))
    assert np.allclose((a @ a.T - a.T @ a)[:4, :4], np.eye(4))


def test_truncation_bounds():
    JCParams(5.0, 5.0, 0.1, n_max=2)
    JCParams(5.0, 5.0, 0.1, n_max=50)
    for n in (1, 51):
        with pytest.raises(ValueError):
            JCParams(5.0, 5.0, 0.1, n_max=n)
    with pytest.raises(ValueError):
        JCParams(5.0, 5.0, -0.1)


def test_hamiltonian_is_hermitian_and_conserves_excitations_in_rwa():
    p = JCParams(5.0, 5.3, 0.1, n_max=6)
    h = jc_hamiltonian(p)
    assert np.allclose(h, h.T)
    nex = excitation_numbers(p.n_max)
    assert np.allclose(h[nex[:, None] != nex[None, :]], 0.0)
    full = jc_hamiltonian(p, rwa=False)
    assert np.allclose(full, full.T)
    assert not np.allclose(full[nex[:, None] != nex[None, :]], 0.0)


def test_ground_state_energy():
    p = JCParams(5.0, 5.3, 0.1, n_max=6)
    spec = jc_spectrum(p)
    assert spec.energies[0] == pytest.approx(0.5 * 5.0 - 0.5 * 5.3, abs=1e-14)
    assert spec.excitations[0] == 0


def test_resonant_vacuum_rabi_splitting():
    for g in (0.01, 0.05, 0.2):
        p = JCParams(5.0, 5.0, g, n_max=8)
        assert one_excitation_splitting(p) == pytest.approx(2 * g, rel=1e-9)


@given(st.integers(1, 7), st.floats(0.001, 0.3))
def test_resonant_manifold_splitting_grows_as_root_n(n, g):
    p = JCParams(5.0, 5.0, g, n_max=8)
    spec = jc_spectrum(p)
    e = spec.energies[spec.excitations == n]
    assert e.max() - e.min() == pytest.approx(2 * g * np.sqrt(n), rel=1e-9)


def test_dispersive_shift_at_large_detuning():
    g = 0.01
    p = JCParams(5.0, 5.0 + 20 * g, g, n_max=6)
    chi, _ = dispersive_params(g, p.delta)
    assert qubit_shift(p) == pytest.approx(chi, rel=0.02)


def test_critical_photon_number():
    g = 0.01
    _, n_crit = dispersive_params(g, 10 * g)
    assert n_crit == pytest.approx(25.0, rel=1e-12)
    assert dispersive_params(0.0, 1.0)[1] == np.inf
    with pytest.raises(ValueError):
        dispersive_params(g, 0.0)


def test_transmon_values():
    f01, f12, alpha = transmon_spectrum(TransmonParams(20.0, 0.2))
    assert f01 == pytest.approx(5.45685, abs=1e-5)
    assert f12 == pytest.approx(5.25685, abs=1e-5)
    assert alpha == pytest.approx(-0.2)


def test_transmon_warns_below_ratio_and_validates():
    with pytest.warns(RuntimeWarning):
        transmon_spectrum(TransmonParams(1.0, 0.2))
    with pytest.raises(ValueError):
        TransmonParams(0.0, 0.2)
    with pytest.raises(ValueError):
        transmon_from_spectrum(5.0, 5.1)


@given(st.floats(5.0, 100.0), st.floats(0.05, 0.5))
def test_transmon_inverse_roundtrip(ej, ec):
    ratio_ok = ej / ec >= 20
    if not ratio_ok:
        ej = 20 * ec
    f01, f12, _ = transmon_spectrum(TransmonParams(ej, ec))
    back = transmon_from_spectrum(f01, f12)
    assert back.e_j == pytest.approx(ej, rel=1e-10)
    assert back.e_c == pytest.approx(ec, rel=1e-10)


def test_lc_mode():
    omega, z, phi_zpf, q_zpf = lc_mode(1e-8, 1e-12)
    assert omega == pytest.approx(1e10, rel=1e-12)
    assert z == pytest.approx(100.0, rel=1e-12)
    assert phi_zpf * q_zpf == pytest.approx(hbar / 2, rel=1e-12)
    with pytest.raises(ValueError):
        lc_mode(0.0, 1e-12)
