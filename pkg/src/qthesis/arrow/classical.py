"""Classical stochastic thermodynamics of a driven few-level system.

Energies are in units of k_B times the temperature unit (k = 1). The bath
drives transitions with Arrhenius-type rates
``k(m -> m') = k0 exp(-beta (E_m' - E_m) / 2)``, which satisfy detailed
balance at every instant. The drive is a piecewise-constant energy
schedule: work is done when the energies switch, heat flows when the system
jumps, so ``dE = W + Q_heat`` holds path by path.

Entropy bookkeeping (Q_heat is energy flowing into the system from the bath):

* ``dS   = ln p_i(m_i) - ln p_f(m_f)``           (surprisal change)
* ``dS_r = Q_heat / T``                          (entropy flow from the bath)
* ``dS_i = dS - dS_r``                           (entropy production)

and ``dS_i = ln(P_F / P_B)`` where the backward process starts from the
forward final distribution.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

DB_TOL = 1e-10


class DetailedBalanceError(ValueError):
    """Chain lacks detailed balance, so the entropy decomposition is unsupported."""


@dataclass(frozen=True, eq=False)
class ClassicalChain:
    """States with energies ``energies`` at temperature ``temperature``.

    ``generator`` (``H[m', m]`` = rate ``m -> m'``, columns summing to 0) is
    built from Arrhenius rates unless supplied explicitly.
    """

    energies: np.ndarray
    temperature: float = 1.0
    k0: float = 1.0
    generator: np.ndarray = field(default=None)
    detailed_balance: bool = True

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        object.__setattr__(self, "energies", e)
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        h = arrhenius_generator(e, self.temperature, self.k0) if self.generator is None \
            else np.asarray(self.generator, dtype=float)
        off = h - np.diag(np.diag(h))
        if np.any(off < 0):
            raise ValueError("negative transition rates")
        if np.max(np.abs(h.sum(axis=0))) > 1e-10 * max(1.0, np.abs(h).max()):
            raise ValueError("generator columns must sum to zero")
        object.__setattr__(self, "generator", h)
        if self.detailed_balance and not self.satisfies_detailed_balance():
            raise DetailedBalanceError("generator violates detailed balance for the stated energies")

    @property
    def beta(self) -> float:
        return 1.0 / self.temperature

    def equilibrium(self, energies=None) -> np.ndarray:
        e = self.energies if energies is None else np.asarray(energies, dtype=float)
        w = np.exp(-self.beta * (e - e.min()))
        return w / w.sum()

    def satisfies_detailed_balance(self) -> bool:
        p = self.equilibrium()
        flux = self.generator * p[None, :]
        off = flux - np.diag(np.diag(flux))
        return bool(np.max(np.abs(off - off.T)) <= DB_TOL)

    def with_energies(self, energies) -> "ClassicalChain":
        return ClassicalChain(energies, self.temperature, self.k0)


def arrhenius_generator(energies, temperature: float, k0: float = 1.0) -> np.ndarray:
    e = np.asarray(energies, dtype=float)
    beta = 1.0 / temperature
    h = k0 * np.exp(-beta * (e[:, None] - e[None, :]) / 2)
    np.fill_diagonal(h, 0.0)
    np.fill_diagonal(h, -h.sum(axis=0))
    return h


@dataclass(frozen=True, eq=False)
class EnergySchedule:
    """Energies ``levels[k]`` hold on ``[times[k], times[k+1])``; ``times[0] = 0``."""

    times: np.ndarray
    levels: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        lv = np.atleast_2d(np.asarray(self.levels, dtype=float))
        if t.ndim != 1 or t.size != lv.shape[0] or t[0] != 0 or np.any(np.diff(t) <= 0):
            raise ValueError("times must start at 0, increase, and match the number of level rows")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "levels", lv)

    @classmethod
    def constant(cls, energies) -> "EnergySchedule":
        return cls([0.0], [energies])

    def segments(self, t_final: float):
        """``(t_start, t_stop, energies)`` for each interval intersecting ``[0, t_final]``."""
        for k, t0 in enumerate(self.times):
            if t0 >= t_final:
                break
            t1 = self.times[k + 1] if k + 1 < self.times.size else t_final
            yield t0, min(t1, t_final), self.levels[k]


@dataclass(frozen=True)
class ThermoRecord:
    dE: float
    W: float
    Q_heat: float
    dS: float = float("nan")
    dS_r: float = float("nan")
    dS_i: float = float("nan")


@dataclass(frozen=True, eq=False)
class JumpTrajectory:
    initial_state: int
    jump_times: np.ndarray
    states: np.ndarray      # state after each jump
    t_final: float
    schedule: EnergySchedule
    W: float
    Q_heat: float
    final_state: int

    @property
    def n_jumps(self) -> int:
        return int(self.jump_times.size)


def classical_simulate(chain: ClassicalChain, drive: EnergySchedule | None, t_final: float,
                       rng: np.random.Generator, initial_state: int | None = None):
    """Gillespie sampling of one path under a piecewise-constant drive.

    The initial state is drawn from equilibrium at the first energies unless
    given. Returns ``(JumpTrajectory, ThermoRecord)`` where the record holds
    the energy terms; entropy terms come from :func:`classical_entropy_production`.
    """
    drive = drive or EnergySchedule.constant(chain.energies)
    if t_final <= 0:
        raise ValueError("t_final must be positive")
    e0 = drive.levels[0]
    m = int(rng.choice(e0.size, p=chain.equilibrium(e0))) if initial_state is None else int(initial_state)
    m0 = m
    W = Q = 0.0
    times, states = [], []
    prev_e = None
    for t0, t1, e in drive.segments(t_final):
        if prev_e is not None:
            W += e[m] - prev_e[m]
        h = arrhenius_generator(e, chain.temperature, chain.k0)
        t = t0
        while True:
            rate = -h[m, m]
            dt = rng.exponential(1 / rate) if rate > 0 else np.inf
            if t + dt >= t1:
                break
            t += dt
            p = h[:, m].copy()
            p[m] = 0.0
            m2 = int(rng.choice(e.size, p=p / p.sum()))
            Q += e[m2] - e[m]
            m = m2
            times.append(t)
            states.append(m)
        prev_e = e
    e_start, e_end = drive.levels[0], prev_e
    traj = JumpTrajectory(m0, np.array(times), np.array(states, dtype=int), float(t_final), drive, W, Q, m)
    return traj, ThermoRecord(float(e_end[m] - e_start[m0]), float(W), float(Q))


def propagate_distribution(chain: ClassicalChain, drive: EnergySchedule, t_final: float, p0=None) -> np.ndarray:
    """Solve the master equation ``dp/dt = H p`` across the schedule."""
    p = chain.equilibrium(drive.levels[0]) if p0 is None else np.asarray(p0, dtype=float)
    for t0, t1, e in drive.segments(t_final):
        p = expm(arrhenius_generator(e, chain.temperature, chain.k0) * (t1 - t0)) @ p
    return p


def path_log_ratio(traj: JumpTrajectory, chain: ClassicalChain, p_initial, p_final) -> float:
    """``ln(P_F / P_B)`` from boundary terms and jump-rate ratios; waiting factors cancel."""
    lr = np.log(p_initial[traj.initial_state]) - np.log(p_final[traj.final_state])
    m = traj.initial_state
    for t, m2 in zip(traj.jump_times, traj.states):
        k = np.searchsorted(traj.schedule.times, t, side="right") - 1
        h = arrhenius_generator(traj.schedule.levels[k], chain.temperature, chain.k0)
        lr += np.log(h[m2, m]) - np.log(h[m, m2])
        m = m2
    return float(lr)


def classical_entropy_production(traj: JumpTrajectory, chain: ClassicalChain, p_initial=None):
    """Full thermodynamic record of a path, checked against the path-probability ratio.

    Returns ``(ThermoRecord, log_ratio)`` where ``log_ratio = ln(P_F / P_B)``
    is computed independently from jump factors; it equals ``dS_i``.
    """
    if not chain.satisfies_detailed_balance():
        raise DetailedBalanceError("entropy production requires detailed balance")
    p_i = chain.equilibrium(traj.schedule.levels[0]) if p_initial is None else np.asarray(p_initial, float)
    p_f = propagate_distribution(chain, traj.schedule, traj.t_final, p_i)
    e_end = list(traj.schedule.segments(traj.t_final))[-1][2]
    dE = float(e_end[traj.final_state] - traj.schedule.levels[0][traj.initial_state])
    dS = float(np.log(p_i[traj.initial_state]) - np.log(p_f[traj.final_state]))
    dS_r = traj.Q_heat / chain.temperature
    rec = ThermoRecord(dE, traj.W, traj.Q_heat, dS, dS_r, dS - dS_r)
    return rec, path_log_ratio(traj, chain, p_i, p_f)


# --- discrete-time chain, exhaustively enumerable --------------------------------------------

def discrete_transition(energies, temperature: float, hop: float = 0.5) -> np.ndarray:
    """Column-stochastic Metropolis matrix ``T[m', m]`` in detailed balance with ``energies``."""
    e = np.asarray(energies, dtype=float)
    n = e.size
    t = hop / (n - 1) * np.minimum(1.0, np.exp(-(e[:, None] - e[None, :]) / temperature))
    np.fill_diagonal(t, 0.0)
    np.fill_diagonal(t, 1.0 - t.sum(axis=0))
    return t


@dataclass(frozen=True)
class EnumeratedPath:
    states: tuple
    p_forward: float
    p_backward: float
    W: float
    Q_heat: float
    dS: float
    dS_i: float


@dataclass(frozen=True, eq=False)
class Enumeration:
    paths: list
    beta: float
    delta_f: float
    p_initial: np.ndarray
    p_final: np.ndarray

    def total_forward(self) -> float:
        return float(np.sum([p.p_forward for p in self.paths]))

    def total_backward(self) -> float:
        return float(np.sum([p.p_backward for p in self.paths]))

    def jarzynski(self) -> float:
        """``<exp(-beta W)>`` over the forward path measure."""
        return float(np.sum([p.p_forward * np.exp(-self.beta * p.W) for p in self.paths]))

    def ft_table(self, decimals: int = 12):
        """``{dS_i: (P_F(dS_i), P_B(-dS_i))}`` grouped by rounded value."""
        tab = {}
        for p in self.paths:
            key = round(p.dS_i, decimals) + 0.0
            f, b = tab.get(key, (0.0, 0.0))
            tab[key] = (f + p.p_forward, b + p.p_backward)
        return tab


def enumerate_paths(level_schedule, temperature: float = 1.0, hop: float = 0.5,
                    reverse_start: str = "final", p0=None) -> Enumeration:
    """All paths of a discrete-time chain with ``len(level_schedule) - 1`` steps.

    ``level_schedule[0]`` are the initial energies; step ``k`` first switches
    to ``level_schedule[k]`` (work) and then makes one Metropolis move
    (heat). The backward process runs the reversed protocol starting from the
    forward final distribution (``reverse_start="final"``) or from
    equilibrium at the final energies (``"equilibrium"``). ``P_B`` of a path
    is the backward-process probability of the reversed path.
    """
    levels = np.atleast_2d(np.asarray(level_schedule, dtype=float))
    steps, n = levels.shape[0] - 1, levels.shape[1]
    beta = 1.0 / temperature

    def eq(e):
        w = np.exp(-beta * (e - e.min()))
        return w / w.sum()

    p_i = eq(levels[0]) if p0 is None else np.asarray(p0, dtype=float)
    mats = [discrete_transition(levels[k], temperature, hop) for k in range(1, steps + 1)]
    p_f = p_i.copy()
    for t in mats:
        p_f = t @ p_f
    if reverse_start == "final":
        p_rev = p_f
    elif reverse_start == "equilibrium":
        p_rev = eq(levels[-1])
    else:
        raise ValueError("reverse_start must be 'final' or 'equilibrium'")
    z = lambda e: np.sum(np.exp(-beta * e))  # noqa: E731
    delta_f = float(-(np.log(z(levels[-1])) - np.log(z(levels[0]))) / beta)
    paths = []
    for seq in itertools.product(range(n), repeat=steps + 1):
        pf = p_i[seq[0]]
        pb = p_rev[seq[-1]]
        W = Q = 0.0
        for k in range(1, steps + 1):
            a, b = seq[k - 1], seq[k]
            W += levels[k][a] - levels[k - 1][a]
            Q += levels[k][b] - levels[k][a]
            pf *= mats[k - 1][b, a]
            pb *= mats[k - 1][a, b]
        dS = float(np.log(p_i[seq[0]]) - np.log(p_f[seq[-1]]))
        paths.append(EnumeratedPath(seq, float(pf), float(pb), float(W), float(Q), dS, dS - beta * Q))
    return Enumeration(paths, beta, delta_f, p_i, p_f)
