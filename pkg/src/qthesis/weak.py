"""Gaussian weak measurement of a qubit observable.

Strength convention: for measurement strength ``s`` the record ``j`` of an
eigenstate with eigenvalue ``+1`` (``-1``) is distributed as ``N(+1, 1/s)``
(``N(-1, 1/s)``). The matching Kraus operator is

    K_j = (s / 2 pi)^(1/4) exp(-s (j I - A)^2 / 4)

and the Bloch coordinate along ``A`` updates as ``z = tanh(s j + arctanh z0)``.

Finite quantum efficiency ``eta`` is modelled as a record with strength
``s * eta`` (variance ``1 / (s eta)``) plus extra dephasing
``exp(-(1 - eta) s / 2)`` in the eigenbasis of ``A``, so that the
ensemble-averaged dephasing is always that of the full strength ``s``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .quantum import IDENTITY, MeasurementAxis, QubitState, SIGMA_X, SIGMA_Y, SIGMA_Z, ry

DEFAULT_BINS = 52
DEFAULT_RANGE = (-8.0, 8.0)


@dataclass(frozen=True)
class MeasurementStrength:
    """Dimensionless strength ``s = dt / tau`` and quantum efficiency ``eta``."""

    s: float
    eta: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.s) and self.s > 0):
            raise ValueError(f"measurement strength must be > 0, got {self.s!r}")
        if not (0 < self.eta <= 1):
            raise ValueError(f"efficiency must be in (0, 1], got {self.eta!r}")

    @property
    def record_strength(self) -> float:
        return self.s * self.eta

    @property
    def record_variance(self) -> float:
        return 1.0 / (self.s * self.eta)


def as_strength(s) -> MeasurementStrength:
    return s if isinstance(s, MeasurementStrength) else MeasurementStrength(float(s))


def as_theta(axis) -> float:
    return axis.theta if isinstance(axis, MeasurementAxis) else float(axis)


@dataclass(frozen=True, eq=False)
class KrausOperator:
    j: float
    strength: MeasurementStrength
    axis: MeasurementAxis
    matrix: np.ndarray

    def apply(self, state: QubitState) -> QubitState:
        """Normalized post-measurement state ``K rho K^dag / Tr``."""
        m = self.matrix @ state.matrix @ self.matrix.conj().T
        return QubitState(m / np.trace(m).real)

    def probability_density(self, state: QubitState) -> float:
        return float(np.trace(self.matrix @ state.matrix @ self.matrix.conj().T).real)


def kraus_operator(j: float, s, axis=0.0) -> KrausOperator:
    """Gaussian Kraus operator for record ``j`` along ``axis``.

    Built as ``R K_z R^dag`` where ``R`` rotates +Z onto the axis direction.
    """
    if not np.isfinite(j):
        raise ValueError("record value j must be finite")
    st = as_strength(s)
    theta = as_theta(axis)
    pref = (st.s / (2 * np.pi)) ** 0.25
    kz = pref * np.diag([np.exp(-st.s * (j - 1) ** 2 / 4), np.exp(-st.s * (j + 1) ** 2 / 4)]).astype(complex)
    r = ry(theta)
    return KrausOperator(float(j), st, MeasurementAxis(theta), r @ kz @ r.conj().T)


def _gauss(x, mean, var):
    return np.exp(-((x - mean) ** 2) / (2 * var)) / np.sqrt(2 * np.pi * var)


def axis_component(bloch, theta):
    """Bloch component along the X-Z axis ``theta`` (works on ``(..., 3)`` arrays)."""
    b = np.asarray(bloch, dtype=float)
    return np.cos(theta) * b[..., 2] + np.sin(theta) * b[..., 0]


def record_density(j, state_or_a, s, axis=0.0):
    """Outcome pdf ``p(j) = p+ N(j; 1, 1/(s eta)) + p- N(j; -1, 1/(s eta))``."""
    st = as_strength(s)
    theta = as_theta(axis)
    a = state_or_a
    if isinstance(a, QubitState):
        a = axis_component(a.bloch, theta)
    var = st.record_variance
    return 0.5 * (1 + a) * _gauss(j, 1.0, var) + 0.5 * (1 - a) * _gauss(j, -1.0, var)


def _branch_log_weights(a, j, se):
    """``ln[(1 +- a)/2] - se (j -+ 1)^2 / 2``: log weights of the two eigen-branches."""
    with np.errstate(divide="ignore"):
        lp = np.log1p(a) + np.log(0.5) - se * (j - 1) ** 2 / 2
        lm = np.log1p(-a) + np.log(0.5) - se * (j + 1) ** 2 / 2
    return lp, lm


def log_record_density(j, a, s):
    """``ln p(j)`` for axis component ``a``, evaluated without underflow."""
    st = as_strength(s)
    se = st.record_strength
    lp, lm = _branch_log_weights(np.asarray(a, dtype=float), np.asarray(j, dtype=float), se)
    return np.logaddexp(lp, lm) + 0.5 * np.log(se / (2 * np.pi))


def update_bloch(bloch, j, s, axis=0.0):
    """Vectorized post-measurement Bloch vectors.

    ``bloch`` has shape ``(..., 3)`` and ``j`` broadcasts against ``bloch[..., 0]``.
    The update is done in log space so large ``s |j|`` cannot underflow.
    """
    st = as_strength(s)
    theta = as_theta(axis)
    b = np.asarray(bloch, dtype=float)
    j = np.asarray(j, dtype=float)
    c, sn = np.cos(theta), np.sin(theta)
    a = c * b[..., 2] + sn * b[..., 0]          # along the axis
    perp = -sn * b[..., 2] + c * b[..., 0]      # in-plane, orthogonal to the axis
    y = b[..., 1]
    lp, lm = _branch_log_weights(a, j, st.record_strength)
    lt = np.logaddexp(lp, lm)
    with np.errstate(invalid="ignore"):
        a_new = np.tanh(0.5 * (lp - lm))
    # Coherences scale by sqrt(w+ w-) / (w+ + w-) relative to sqrt(p+ p-); writing them
    # through the normalized ratio keeps every factor bounded, poles included.
    den = np.sqrt((1 - a) * (1 + a))
    safe = np.where(den > 0, den, 1.0)
    shrink = 2 * np.exp(0.5 * (lp + lm) - lt - (1 - st.eta) * st.s / 2)
    perp_new = np.where(den > 0, perp / safe, 0.0) * shrink
    y_new = np.where(den > 0, y / safe, 0.0) * shrink
    out = np.empty(np.broadcast(a_new, b[..., 0]).shape + (3,))
    out[..., 0] = sn * a_new + c * perp_new
    out[..., 1] = y_new
    out[..., 2] = c * a_new - sn * perp_new
    return out


def sample_records(a, s, rng: np.random.Generator, size=None):
    """Draw records for states with axis component ``a`` (scalar or array).

    One uniform picks the eigen-branch by inverse CDF, one normal adds the
    Gaussian spread, so the number of variates consumed is fixed.
    """
    st = as_strength(s)
    a = np.asarray(a, dtype=float)
    shape = a.shape if size is None else size
    u = rng.random(shape)
    g = rng.standard_normal(shape)
    branch = np.where(u < 0.5 * (1 + a), 1.0, -1.0)
    return branch + g / np.sqrt(st.record_strength)


def weak_measure(state: QubitState, s, axis, rng: np.random.Generator):
    """Sample a record from ``Tr[K_j rho K_j^dag]`` and return ``(j, post_state)``."""
    theta = as_theta(axis)
    a = axis_component(state.bloch, theta)
    j = float(sample_records(a, s, rng, size=()))
    x, y, z = update_bloch(state.bloch, j, s, theta)
    return j, QubitState.from_bloch(x, y, z)


def outcome_probability(state: QubitState, s, axis, interval) -> float:
    """Probability that the record lands in ``[a, b]`` (infinite ends allowed)."""
    lo, hi = interval
    if lo > hi:
        raise ValueError("interval lower end exceeds upper end")
    st = as_strength(s)
    a = axis_component(state.bloch, as_theta(axis))
    sd = np.sqrt(st.record_strength)

    def mass(mu):
        return ndtr((hi - mu) * sd) - ndtr((lo - mu) * sd)

    return float(0.5 * (1 + a) * mass(1.0) + 0.5 * (1 - a) * mass(-1.0))


def bayesian_update(z0: float, j: float, s: float, gamma: float = 0.0, dt: float = 0.0):
    """Bloch ``(z, x)`` after a z-axis record ``j`` for a pure X-Z state starting at ``z0``.

    ``z = tanh(s j + arctanh z0)`` and ``x = sqrt(1 - z^2) exp(-gamma dt)``, the latter
    evaluated as a hyperbolic secant.
    Poles ``|z0| = 1`` are fixed points.
    """
    if not -1 <= z0 <= 1:
        raise ValueError("z0 must lie in [-1, 1]")
    if abs(z0) == 1.0:
        return float(z0), 0.0
    u = s * j + np.arctanh(z0)
    z = float(np.tanh(u))
    x = float(np.exp(-gamma * dt) / np.cosh(u))   # sech(u) keeps precision where tanh(u) rounds to 1
    return z, x


@dataclass(frozen=True)
class CalibrationRecord:
    chi: float
    kappa: float
    nbar: float
    eta: float
    gamma_m: float
    stark: float
    inv_tau: float
    S: float


def calibration(chi: float, kappa: float, nbar: float, eta: float, dt: float) -> CalibrationRecord:
    """Dispersive-readout rates; all angular rates in rad/s.

    ``gamma_m = 8 chi^2 nbar / kappa``, ``stark = 2 chi nbar``,
    ``1/tau = gamma_m * eta`` and ``S = 8 dt eta / tau`` (evaluated as written,
    which folds ``eta`` in twice).
    """
    if kappa <= 0 or not np.isfinite(kappa):
        raise ValueError("kappa must be positive")
    if nbar < 0 or dt < 0 or not (0 < eta <= 1):
        raise ValueError("nbar and dt must be non-negative and eta in (0, 1]")
    gamma_m = 8 * chi**2 * nbar / kappa
    inv_tau = gamma_m * eta
    return CalibrationRecord(chi, kappa, nbar, eta, gamma_m, 2 * chi * nbar, inv_tau, 8 * dt * eta * inv_tau)


def nbar_from_rate(inv_tau: float, chi: float, kappa: float, eta: float) -> float:
    """Photon number that produces measurement rate ``1/tau`` (inverse of :func:`calibration`)."""
    if chi == 0 or kappa <= 0 or eta <= 0:
        raise ValueError("chi must be nonzero, kappa and eta positive")
    return inv_tau * kappa / (8 * chi**2 * eta)


@dataclass(frozen=True)
class ReadoutModel:
    """Record digitization: ``bins`` equal bins over ``bin_range``."""

    s: float = 0.375
    v_gnd: float = 1.0
    v_ex: float = -1.0
    bins: int = DEFAULT_BINS
    bin_range: tuple = DEFAULT_RANGE

    def __post_init__(self):
        if self.bins < 2:
            raise ValueError("need at least 2 bins")
        if not self.v_gnd > self.v_ex:
            raise ValueError("v_gnd must exceed v_ex")
        if not self.bin_range[0] < self.bin_range[1]:
            raise ValueError("empty bin range")

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.bin_range[0], self.bin_range[1], self.bins + 1)

    @property
    def centers(self) -> np.ndarray:
        e = self.edges
        return 0.5 * (e[1:] + e[:-1])

    @property
    def width(self) -> float:
        return (self.bin_range[1] - self.bin_range[0]) / self.bins

    def to_unit(self, v):
        """Map raw voltages onto the +-1 record scale."""
        mid = 0.5 * (self.v_gnd + self.v_ex)
        half = 0.5 * (self.v_gnd - self.v_ex)
        return (np.asarray(v, dtype=float) - mid) / half

    def digitize(self, j) -> np.ndarray:
        """Bin indices with out-of-range samples clamped to the edge bins."""
        idx = np.floor((np.asarray(j, dtype=float) - self.bin_range[0]) / self.width).astype(np.int64)
        return np.clip(idx, 0, self.bins - 1)

    def edge_masses(self, mean: float, s_eff: float) -> np.ndarray:
        """Exact bin probabilities of ``N(mean, 1/s_eff)`` with clamped tails."""
        cdf = ndtr((self.edges - mean) * np.sqrt(s_eff))
        cdf[0], cdf[-1] = 0.0, 1.0
        return np.diff(cdf)


@dataclass(frozen=True, eq=False)
class BinnedRecord:
    counts: np.ndarray
    probabilities: np.ndarray
    edges: np.ndarray
    centers: np.ndarray
    n: int
    occupied: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "occupied", int(np.count_nonzero(self.counts)))

    @property
    def occupancy_baseline(self) -> float:
        """``log2`` of the number of occupied bins (entropy of a flat fill)."""
        return float(np.log2(self.occupied))


def bin_record(samples, model: ReadoutModel | None = None) -> BinnedRecord:
    model = model or ReadoutModel()
    j = np.asarray(samples, dtype=float).ravel()
    if j.size == 0:
        raise ValueError("no samples to bin")
    counts = np.bincount(model.digitize(j), minlength=model.bins)
    return BinnedRecord(counts, counts / j.size, model.edges, model.centers, int(j.size))


def decay_channel(state: QubitState, t: float, t1: float, gamma_phi: float = 0.0) -> QubitState:
    """Amplitude damping toward the ground state followed by pure dephasing."""
    if not t1 > 0:
        raise ValueError("t1 must be positive")
    if t < 0:
        raise ValueError("t must be non-negative")
    gam = -np.expm1(-t / t1) if np.isfinite(t1) else 0.0
    k0 = np.array([[1, 0], [0, np.sqrt(1 - gam)]], dtype=complex)
    k1 = np.array([[0, np.sqrt(gam)], [0, 0]], dtype=complex)
    r = state.matrix
    m = k0 @ r @ k0.conj().T + k1 @ r @ k1.conj().T
    d = np.exp(-gamma_phi * t) if gamma_phi > 0 else 1.0
    m = m.copy()
    m[0, 1] *= d
    m[1, 0] *= d
    return QubitState(m)


@dataclass(frozen=True, eq=False)
class TomographyTable:
    centers: np.ndarray
    counts: np.ndarray
    predicted_z: np.ndarray       # Bayesian prediction at the bin center
    predicted_x: np.ndarray
    predicted_z_avg: np.ndarray   # prediction averaged over the bin
    predicted_x_avg: np.ndarray
    sampled_z: np.ndarray
    sampled_x: np.ndarray
    sampled_y: np.ndarray
    err_z: np.ndarray
    err_x: np.ndarray
    err_y: np.ndarray
    valid: np.ndarray             # bins with >= min_counts in each tomography axis

    def agreement(self, n_sigma: float = 4.0) -> bool:
        v = self.valid
        ok_z = np.abs(self.sampled_z - self.predicted_z_avg)[v] <= n_sigma * self.err_z[v]
        ok_x = np.abs(self.sampled_x - self.predicted_x_avg)[v] <= n_sigma * self.err_x[v]
        ok_y = np.abs(self.sampled_y)[v] <= n_sigma * self.err_y[v]
        return bool(np.all(ok_z) and np.all(ok_x) and np.all(ok_y))


def correlated_tomography(shots: int, s, axis, rng: np.random.Generator, prepared=(1.0, 0.0, 0.0),
                          model: ReadoutModel | None = None, min_counts: int = 100) -> TomographyTable:
    """Weak record followed by projective tomography, binned by record value.

    Each shot picks one of Z, X, Y tomography at random. Sampled averages per
    bin are compared against the Kraus-updated Bloch vector, averaged over
    the bin with the record density as weight.
    """
    if shots < 10_000:
        raise ValueError("correlated tomography needs at least 1e4 shots")
    st = as_strength(s)
    theta = as_theta(axis)
    model = model or ReadoutModel(s=st.s)
    b0 = np.asarray(prepared, dtype=float)
    a0 = axis_component(b0, theta)
    j = sample_records(np.full(shots, a0), st, rng)
    post = update_bloch(b0[None, :], j, st, theta)
    which = rng.integers(0, 3, shots)          # 0: z, 1: x, 2: y
    comp = post[np.arange(shots), np.array([2, 0, 1])[which]]
    u = rng.random(shots)
    outcome = np.where(u < 0.5 * (1 + comp), 1.0, -1.0)
    idx = model.digitize(j)
    nb = model.bins

    def stats(k):
        sel = which == k
        n = np.bincount(idx[sel], minlength=nb)
        tot = np.bincount(idx[sel], weights=outcome[sel], minlength=nb)
        with np.errstate(invalid="ignore", divide="ignore"):
            mean = np.where(n > 0, tot / np.maximum(n, 1), np.nan)
            err = np.where(n > 1, np.sqrt(np.maximum(1 - mean**2, 1.0 / np.maximum(n, 1)) / np.maximum(n, 1)), np.nan)
        return n, mean, err

    nz, mz, ez = stats(0)
    nx, mx, ex = stats(1)
    ny, my, ey = stats(2)
    centers = model.centers
    pc = update_bloch(b0[None, :], centers, st, theta)
    # bin-averaged prediction: sum_j p(j) b(j) / sum_j p(j) on a fine sub-grid
    sub = 64
    fine = (model.edges[:-1, None] + (np.arange(sub)[None, :] + 0.5) * model.width / sub)
    w = record_density(fine, a0, st, theta)
    fb = update_bloch(b0[None, None, :], fine, st, theta)
    avg = (w[..., None] * fb).sum(axis=1) / w.sum(axis=1)[:, None]
    valid = (nz >= min_counts) & (nx >= min_counts) & (ny >= min_counts)
    return TomographyTable(centers, nz + nx + ny, pc[:, 2], pc[:, 0], avg[:, 2], avg[:, 0],
                           mz, mx, my, ez, ex, ey, valid)


def kraus_update_matrix(rho: np.ndarray, j: float, s, axis=0.0) -> np.ndarray:
    """Reference Kraus update on a raw matrix (used as an oracle in tests)."""
    k = kraus_operator(j, s, axis).matrix
    m = k @ rho @ k.conj().T
    return m / np.trace(m).real


__all__ = [
    "MeasurementStrength", "KrausOperator", "kraus_operator", "weak_measure", "outcome_probability",
    "bayesian_update", "CalibrationRecord", "calibration", "nbar_from_rate", "ReadoutModel",
    "BinnedRecord", "bin_record", "decay_channel", "correlated_tomography", "TomographyTable",
    "update_bloch", "sample_records", "record_density", "log_record_density", "axis_component", "kraus_update_matrix",
    "IDENTITY", "SIGMA_X", "SIGMA_Y", "SIGMA_Z",
]
