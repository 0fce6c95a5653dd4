"""Josephson-junction fabrication models: Josephson relations, oxide growth, tunneling, loss budgets."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import e as E_CHARGE
from scipy.constants import epsilon_0, h, hbar, m_e
from scipy.optimize import brentq, curve_fit
from scipy.special import exp1

PHI0_REDUCED = hbar / (2 * E_CHARGE)   # Wb, 3.29106e-16
R0 = h / (2 * E_CHARGE**2)             # Ohm, inverse conductance quantum
DEFAULT_SEED_NM = 0.1
JUNCTION_MODELS = ("ab", "simmons", "multilayer", "cabrera")


class InductanceSingularityError(ValueError):
    """Phase at which cos(delta) vanishes, so the Josephson inductance diverges."""


class FitFailureError(RuntimeError):
    pass


class InconsistentBudgetError(ValueError):
    """Known losses already exceed the measured total."""


@dataclass(frozen=True)
class JunctionSpec:
    i0: float
    area: float
    oxide_thickness: float
    barrier_height: float

    def __post_init__(self):
        if min(self.i0, self.area, self.oxide_thickness, self.barrier_height) <= 0:
            raise ValueError("junction parameters must be positive")


def josephson(delta: float, delta_dot: float, i0: float):
    """``(I, V, L)``: ``I = I0 sin delta``, ``V = Phi0 delta_dot``, ``L = Phi0 / (I0 cos delta)`` with ``Phi0 = hbar/2e``."""
    if i0 <= 0:
        raise ValueError("critical current must be positive")
    c = np.cos(delta)
    if abs(c) < 1e-12:
        raise InductanceSingularityError("cos(delta) = 0: Josephson inductance diverges")
    return float(i0 * np.sin(delta)), float(PHI0_REDUCED * delta_dot), float(PHI0_REDUCED / (i0 * c))


def wkb_log_probability(e: float, phi: float, fermi: float, x_nm: float | None = None) -> float:
    """Natural log of the WKB tunneling probability.

    Without ``x_nm`` this is the bare expression ``-(4 pi / h) sqrt(Phi + eps_F - E)``
    evaluated in SI units (energies converted from eV to J). That expression
    lacks the ``sqrt(2 m)`` and barrier-width factors needed for a
    dimensionless exponent, so its magnitude is not physical; only its
    functional form is. Passing ``x_nm`` restores the missing factors,
    giving ``-(4 pi x / h) sqrt(2 m (Phi + eps_F - E))``.
    """
    barrier = phi + fermi - e
    if not barrier > 0:
        raise ValueError("energy lies above the barrier; the classically allowed case is not tunneling")
    u = barrier * E_CHARGE
    if x_nm is None:
        return float(-(4 * np.pi / h) * np.sqrt(u))
    return float(-(4 * np.pi * x_nm * 1e-9 / h) * np.sqrt(2 * m_e * u))


def wkb_tunneling(e: float, phi: float, fermi: float, x_nm: float | None = None) -> float:
    """WKB tunneling probability; see :func:`wkb_log_probability` for units."""
    return float(np.exp(wkb_log_probability(e, phi, fermi, x_nm)))


def simmons_k(phi_ev: float) -> float:
    """``K = sqrt(2 m Phi) / hbar`` in 1/nm."""
    return float(np.sqrt(2 * m_e * phi_ev * E_CHARGE) / hbar * 1e-9)


def simmons_resistance(x: float, phi: float, variant: str = "corrected") -> float:
    """Simmons tunnel resistance with ``X`` in nm and ``Phi`` in eV.

    ``printed``: ``16 pi R0 X^2 / [(1 + 2KX) exp(2KX)]``, which falls with
    thickness. ``corrected``: ``16 pi R0 X^2 exp(2KX) / (1 + 2KX)``, which
    grows exponentially with thickness and is the form used for fits.
    """
    if x <= 0 or phi <= 0:
        raise ValueError("thickness and barrier height must be positive")
    kx2 = 2 * simmons_k(phi) * x
    pre = 16 * np.pi * R0 * x**2
    if variant == "printed":
        return float(pre / ((1 + kx2) * np.exp(kx2)))
    if variant == "corrected":
        return float(pre * np.exp(kx2) / (1 + kx2))
    raise ValueError("variant must be 'printed' or 'corrected'")


def ambegaokar_baratoff(r_n: float, gap: float) -> float:
    """Critical current ``(pi/2)(Delta/e)/R_N`` with ``Delta = h * gap`` (gap in Hz)."""
    if r_n <= 0:
        raise ValueError("normal resistance must be positive")
    return float(0.5 * np.pi * h * gap / E_CHARGE / r_n)


def mott_potential(n0: float, x: float, eps_r: float) -> float:
    """Mott potential in volts from the charge-sheet capacitor ``2 e n0 X / (eps_r eps0)``.

    ``n0`` is in ions/nm^2 and ``X`` in nm; the vacuum permittivity makes
    the expression SI-consistent.
    """
    if n0 < 0 or x < 0 or eps_r <= 0:
        raise ValueError("n0 and x must be non-negative and eps_r positive")
    return float(2 * E_CHARGE * (n0 * 1e18) * (x * 1e-9) / (eps_r * epsilon_0))


@dataclass(frozen=True)
class OxidationParams:
    """Cabrera-Mott constants: ``d`` in nm^2/s, ``a`` and ``x_max`` in nm, ``t_span`` in s."""

    d: float
    a: float
    x_max: float
    t_span: float = 1800.0
    x_seed: float = DEFAULT_SEED_NM

    def __post_init__(self):
        if self.x_seed <= 0:
            raise ValueError("seed thickness must be positive: the growth rate is singular at X = 0")
        if min(self.d, self.a, self.x_max, self.t_span) <= 0:
            raise ValueError("oxidation constants must be positive")

    @classmethod
    def from_mott(cls, d: float, a: float, delta_phi: float, temperature: float, **kw) -> "OxidationParams":
        """Build with ``x_max = e a dPhi / (k T)``."""
        from scipy.constants import k as k_b
        return cls(d, a, E_CHARGE * a * delta_phi / (k_b * temperature), **kw)

    def rate(self, x):
        return self.d / self.a * np.exp(self.x_max / np.asarray(x, dtype=float))


# Constants tuned so that a 30-minute oxidation saturates near 1.5 nm, with
# 90% of that thickness grown in under three minutes.
FITTED_OXIDATION = OxidationParams(d=0.4 * 8.6e-14, a=0.4, x_max=30.0)


def _growth_time(x: float, p: OxidationParams) -> float:
    """Time to grow from the seed to ``x``: ``(a/D) int exp(-x_max/u) du``, via exponential integrals."""
    def prim(u):
        # int exp(-c/u) du = u exp(-c/u) - c E1(c/u)
        c = p.x_max
        return u * np.exp(-c / u) - c * exp1(c / u)

    return float(p.a / p.d * (prim(x) - prim(p.x_seed)))


@dataclass(frozen=True, eq=False)
class OxideCurve:
    t: np.ndarray
    x: np.ndarray
    params: OxidationParams

    def thickness_at(self, t: float) -> float:
        return float(cabrera_thickness(t, self.params))

    def time_to_fraction(self, frac: float) -> float:
        target = frac * self.thickness_at(self.params.t_span)
        return _growth_time(target, self.params)


def cabrera_thickness(t: float, p: OxidationParams) -> float:
    """Thickness after time ``t`` by inverting the exact growth-time integral."""
    if t <= 0:
        return p.x_seed
    hi = max(p.x_seed * 2, p.x_max)
    while _growth_time(hi, p) < t:
        hi *= 2
    return float(brentq(lambda x: _growth_time(x, p) - t, p.x_seed, hi, xtol=1e-14, rtol=1e-13))


def cabrera_mott(params: OxidationParams, n_points: int = 400) -> OxideCurve:
    """Thickness curve ``X(t)`` on a log-spaced grid over ``[0, t_span]``.

    ``dX/dt = (D/a) exp(x_max / X)`` is extremely stiff at a sub-nanometre
    seed, so instead of stepping the ODE the curve inverts the closed-form
    growth time ``t(X) = (a/D) int_{seed}^{X} exp(-x_max/u) du``.
    """
    t = np.concatenate([[0.0], np.geomspace(params.t_span * 1e-9, params.t_span, n_points - 1)])
    x = np.array([cabrera_thickness(ti, params) for ti in t])
    return OxideCurve(t, x, params)


def cabrera_inverse_log(t, params: OxidationParams, iterations: int = 80):
    """Asymptotic thickness for ``X << x_max``: ``X = x_max / ln(a X^2 / (D x_max t))``.

    Integrating the growth law gives ``t ~ (a/D)(X^2/x_max) exp(-x_max/X)``;
    solving for ``X`` yields the inverse-logarithmic law ``X ~ 1 / (c - ln t)``.
    The weak ``X^2`` dependence inside the logarithm is resolved by fixed-point iteration.
    """
    t = np.asarray(t, dtype=float)
    x = np.full_like(t, params.x_max / 20)
    for _ in range(iterations):
        x = params.x_max / np.log(params.a * x**2 / (params.d * params.x_max * t))
    return x


def multilayer_resistance(n_layers: int, r_side: float, r_top_base: float, growth_factor: float = 2.0,
                          mode: str = "two_junction") -> float:
    """Resistance of a junction with ``n_layers`` filler oxide layers.

    The top face grows as ``r_top_base * growth_factor**n``. In the
    two-junction geometry it sits in parallel with a fixed side-face
    junction; the single-junction geometry returns the top face alone.
    """
    if n_layers < 0 or min(r_side, r_top_base, growth_factor) <= 0:
        raise ValueError("resistances and growth factor must be positive")
    r_top = r_top_base * growth_factor**n_layers
    if mode == "single":
        return float(r_top)
    if mode != "two_junction":
        raise ValueError("mode must be 'two_junction' or 'single'")
    return float(r_top * r_side / (r_top + r_side))


def tls_count_model(g, sigma: float, g_max: float, area: float, freq_span: float = 1.0):
    """Expected number of TLS with splitting at least ``g``: ``A sigma df sqrt(1/g^2 - 1/g_max^2)``.

    This is the standard cumulative form as usually printed, with ``g`` and
    ``g_max`` in GHz, ``area`` in um^2 and ``sigma`` in TLS/(GHz um^2). The
    form is not dimensionless; the leftover 1/GHz is carried by the unit
    convention of ``g``. ``freq_span`` scales the count linearly for spectra
    covering more than one GHz. Zero for ``g >= g_max``.
    """
    g = np.asarray(g, dtype=float)
    return area * sigma * freq_span * np.sqrt(np.clip(1 / g**2 - 1 / g_max**2, 0.0, None))


def sample_tls_splittings(n: int, g_max: float, g_min: float, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` splittings in ``[g_min, g_max]`` from the model's distribution by inverse CDF."""
    u = rng.random(n)
    return g_max / np.sqrt(1 + u**2 * (g_max**2 / g_min**2 - 1))


@dataclass(frozen=True)
class TLSFit:
    sigma: float
    g_max: float
    sigma_err: float
    g_max_err: float
    residuals: np.ndarray


def tls_density_fit(splittings, area: float, freq_span: float, p0=None) -> TLSFit:
    """Fit the cumulative count ``N(>= g)`` to :func:`tls_count_model`, Poisson-weighted."""
    g = np.sort(np.asarray(splittings, dtype=float))[::-1]
    if g.size < 3:
        raise ValueError("need at least 3 splittings")
    if np.ptp(g) <= 1e-12 * abs(g[0]):
        raise FitFailureError("all splittings are equal; the model is unconstrained")
    counts = np.arange(1, g.size + 1, dtype=float)
    if p0 is None:
        gm0 = g[0] * 1.05
        s0 = counts[-1] / (area * freq_span * np.sqrt(1 / g[-1] ** 2 - 1 / gm0**2))
        p0 = (s0, gm0)

    def model(x, sigma, g_max):
        return tls_count_model(x, sigma, g_max, area, freq_span)

    try:
        popt, pcov = curve_fit(model, g, counts, p0=p0, sigma=np.sqrt(counts), absolute_sigma=True,
                               bounds=([0, g[0] * (1 + 1e-9)], [np.inf, np.inf]), maxfev=20000)
    except (RuntimeError, ValueError) as exc:
        raise FitFailureError(str(exc)) from exc
    err = np.sqrt(np.diag(pcov))
    return TLSFit(float(popt[0]), float(popt[1]), float(err[0]), float(err[1]), counts - model(g, *popt))


@dataclass(frozen=True)
class LossContribution:
    label: str
    p: float
    tan_delta: float

    def __post_init__(self):
        if not 0 <= self.p <= 1 or self.tan_delta < 0:
            raise ValueError("participation must be in [0, 1] and tan_delta non-negative")


def loss_budget(q_total: float, contributions, unknown_p: float) -> float:
    """Upper bound on an unknown loss tangent: ``(1/Q - sum p_i tan_i) / p_unknown``."""
    if q_total <= 0 or unknown_p <= 0:
        raise ValueError("Q and the unknown participation must be positive")
    known = sum(c.p * c.tan_delta for c in contributions)
    residual = 1 / q_total - known
    if residual < 0:
        raise InconsistentBudgetError(f"known losses {known:.3g} exceed 1/Q = {1 / q_total:.3g}")
    return float(residual / unknown_p)


def quality_factor(freq: float, t1: float) -> float:
    """``Q = 2 pi f T1``."""
    return float(2 * np.pi * freq * t1)

