"""Circuit-QED spectra: truncated Jaynes-Cummings, dispersive parameters, transmon and LC modes.

Basis ordering is ``qubit (x) Fock`` with ``|e> = (1, 0)``, so ``sigma_z|e> = +|e>``.
The qubit-cavity detuning is ``delta = omega_q - omega_c``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.constants import hbar

TRANSMON_RATIO_WARN = 20.0


@dataclass(frozen=True)
class JCParams:
    omega_c: float
    omega_q: float
    g: float
    n_max: int = 5

    def __post_init__(self):
        if self.n_max < 2 or self.n_max > 50:
            raise ValueError("n_max must lie in [2, 50]")
        if self.g < 0:
            raise ValueError("g must be non-negative")

    @property
    def delta(self) -> float:
        return self.omega_q - self.omega_c


def ladder(n_max: int) -> np.ndarray:
    """Annihilation operator on Fock states ``0..n_max``: ``a|n> = sqrt(n)|n-1>``."""
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), k=1)


def jc_hamiltonian(params: JCParams, rwa: bool = True) -> np.ndarray:
    """``omega_c (a^dag a + 1/2) + omega_q sigma_z / 2 + g (a sigma^+ + a^dag sigma^-)``.

    With ``rwa=False`` the counter-rotating terms ``g (a sigma^- + a^dag sigma^+)`` are added.
    """
    n = params.n_max + 1
    a = ladder(params.n_max)
    i_c, i_q = np.eye(n), np.eye(2)
    sz = np.diag([1.0, -1.0])
    sp = np.array([[0.0, 1.0], [0.0, 0.0]])   # |e><g|
    sm = sp.T
    h = params.omega_c * np.kron(i_q, a.T @ a + 0.5 * i_c) + 0.5 * params.omega_q * np.kron(sz, i_c)
    h = h + params.g * (np.kron(sp, a) + np.kron(sm, a.T))
    if not rwa:
        h = h + params.g * (np.kron(sm, a) + np.kron(sp, a.T))
    return h


def excitation_numbers(n_max: int) -> np.ndarray:
    """Total excitation number of each basis state in ``qubit (x) Fock`` order."""
    fock = np.arange(n_max + 1)
    return np.concatenate([fock + 1, fock])


@dataclass(frozen=True, eq=False)
class JCSpectrum:
    energies: np.ndarray
    excitations: np.ndarray
    vectors: np.ndarray


def jc_spectrum(params: JCParams) -> JCSpectrum:
    """Sorted RWA eigenvalues labelled by total excitation number.

    Each excitation block is diagonalized on its own, so labels are exact
    even where levels of different blocks cross.
    """
    h = jc_hamiltonian(params, rwa=True)
    nex = excitation_numbers(params.n_max)
    energies, labels, vecs = [], [], []
    for k in np.unique(nex):
        idx = np.flatnonzero(nex == k)
        w, v = np.linalg.eigh(h[np.ix_(idx, idx)])
        full = np.zeros((h.shape[0], idx.size))
        full[idx, :] = v
        energies.extend(w)
        labels.extend([k] * idx.size)
        vecs.append(full)
    energies = np.array(energies)
    order = np.argsort(energies, kind="stable")
    return JCSpectrum(energies[order], np.array(labels)[order], np.hstack(vecs)[:, order])


def one_excitation_splitting(params: JCParams) -> float:
    spec = jc_spectrum(params)
    e1 = spec.energies[spec.excitations == 1]
    return float(e1.max() - e1.min())


def qubit_shift(params: JCParams) -> float:
    """Shift of the dressed level with largest ``|e, 0>`` weight from its bare energy."""
    spec = jc_spectrum(params)
    k = int(np.argmax(np.abs(spec.vectors[0, :])))      # basis index 0 is |e, 0>
    bare = 0.5 * params.omega_c + 0.5 * params.omega_q
    return float(spec.energies[k] - bare)


def dispersive_params(g: float, delta: float):
    """``(chi, n_crit)`` with ``chi = g^2 / delta`` and ``n_crit = delta^2 / (4 g^2)``."""
    if delta == 0 or not np.isfinite(delta):
        raise ValueError("dispersive limit needs nonzero finite detuning")
    # squaring the ratio keeps integer ratios exact (10 g gives 25, not 25 + 4e-15)
    n_crit = np.inf if g == 0 else (delta / (2 * g)) ** 2
    return g**2 / delta, n_crit


@dataclass(frozen=True)
class TransmonParams:
    e_j: float
    e_c: float

    def __post_init__(self):
        if self.e_j <= 0 or self.e_c <= 0:
            raise ValueError("E_J and E_C must be positive")


def transmon_spectrum(p: TransmonParams):
    """``(f01, f12, alpha)`` from the quartic expansion: ``f01 = sqrt(8 E_J E_C) - E_C``, ``alpha = -E_C``."""
    if p.e_j / p.e_c < TRANSMON_RATIO_WARN:
        warnings.warn(f"E_J/E_C = {p.e_j / p.e_c:.3g} is below {TRANSMON_RATIO_WARN:g}; "
                      "the transmon expansion is unreliable", RuntimeWarning, stacklevel=2)
    f01 = np.sqrt(8 * p.e_j * p.e_c) - p.e_c
    alpha = -p.e_c
    return float(f01), float(f01 + alpha), float(alpha)


def transmon_from_spectrum(f01: float, f12: float) -> TransmonParams:
    """Recover ``(E_J, E_C)`` from measured transition frequencies."""
    e_c = f01 - f12
    if e_c <= 0:
        raise ValueError("f12 must lie below f01 for a transmon")
    return TransmonParams((f01 + e_c) ** 2 / (8 * e_c), e_c)


def lc_mode(l: float, c: float):
    """``(omega, Z, phi_zpf, q_zpf)`` of an LC oscillator in SI units."""
    if l <= 0 or c <= 0:
        raise ValueError("L and C must be positive")
    z = np.sqrt(l / c)
    return 1 / np.sqrt(l * c), z, np.sqrt(hbar * z / 2), np.sqrt(hbar / (2 * z))
