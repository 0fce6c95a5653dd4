import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import ks_2samp

from qthesis.arrow import (InsufficientStatisticsError, NoAcceptedTrialsError, Project, ReplayError, Rotate,
                           Trajectory, Weak, detailed_ft_check, exact_fixed_prior_ift, forward_backward_probability,
                           integral_ft_and_second_law, log_ratio_q, rapidity_flat_ensemble, replay,
                           reverse_trajectory, run_feedback_ensemble, single_step_ensemble, single_step_q)
from qthesis.arrow.fluctuation import rapidity_q
from qthesis.quantum import IDENTITY, SIGMA_X, SIGMA_Z
from qthesis.weak import kraus_update_matrix, sample_records


def gauss(j, mu, s):
    return np.sqrt(s / (2 * np.pi)) * np.exp(-s * (j - mu) ** 2 / 2)


def random_trajectory(rng, n_events):
    """Mixed-prior trajectory whose records are drawn from their own forward density."""
    phi = rng.uniform(0, 2 * np.pi)
    r = rng.uniform(0, 0.95)
    initial = (r * np.sin(phi), r * np.cos(phi))
    x, z = initial
    events = []
    for _ in range(n_events):
        if rng.random() < 0.5:
            s, axis = rng.uniform(0.05, 1.0), rng.uniform(0, np.pi)
            a = np.cos(axis) * z + np.sin(axis) * x
            j = float(sample_records(a, s, rng, size=()))
            events.append(Weak(j, s, axis))
        else:
            events.append(Rotate(rng.uniform(-np.pi, np.pi)))
        (x, z), _ = replay((x, z), events[-1:])
    return Trajectory(initial, events)


def test_forward_probability_at_pole():
    pf, pb = forward_backward_probability(Trajectory.single_weak(0.0, 1.0, 1.0, 0.375))
    assert pf == pytest.approx(np.sqrt(0.375 / (2 * np.pi)), abs=1e-12)
    assert pf == pytest.approx(0.24430, abs=1e-5)
    assert np.log(pf / pb) == pytest.approx(0.75, abs=1e-12)
    assert log_ratio_q(Trajectory.single_weak(0.0, 1.0, 1.0, 0.375)) == pytest.approx(0.75, abs=1e-12)


@given(st.floats(-0.99, 0.99), st.floats(-5, 5), st.floats(0.05, 3))
def test_forward_probability_is_two_gaussian_mixture(z0, j, s):
    x0 = np.sqrt(1 - z0**2)
    pf, _ = forward_backward_probability(Trajectory.single_weak(x0, z0, j, s))
    expected = 0.5 * (1 + z0) * gauss(j, 1, s) + 0.5 * (1 - z0) * gauss(j, -1, s)
    assert pf == pytest.approx(expected, rel=1e-12)


def test_symmetric_prior_gives_symmetric_record_density():
    a, _ = forward_backward_probability(Trajectory.single_weak(1.0, 0.0, 0.8, 0.375))
    b, _ = forward_backward_probability(Trajectory.single_weak(1.0, 0.0, -0.8, 0.375))
    assert a == pytest.approx(b)


def test_mixed_prior_with_null_record_has_no_arrow():
    assert log_ratio_q(Trajectory.single_weak(0.0, 0.0, 0.0, 0.375)) == pytest.approx(0.0, abs=1e-15)


def test_sharp_records_stay_finite():
    # P_B is about exp(-2 s) here; evaluated in log space it never underflows to zero.
    assert log_ratio_q(Trajectory.single_weak(0.0, 1.0, 1.0, 2000.0)) == pytest.approx(4000.0)
    assert single_step_q(0.0, 4.0, 3.0) == pytest.approx(rapidity_q(0.0, 4.0, 3.0), rel=1e-14)


def test_pole_prior_uses_fixed_point():
    assert single_step_q(1.0, 1.0, 0.375) == pytest.approx(0.75)
    assert single_step_q(-1.0, 1.0, 0.375) == pytest.approx(-0.75)


def test_replay_mismatch_rejected():
    with pytest.raises(ReplayError):
        Trajectory((1.0, 0.0), (Weak(1.0, 0.375),), final=(1.0, 0.0))


def test_antisymmetry_and_involution_on_random_trajectories():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        t = random_trajectory(rng, rng.integers(0, 5))
        r = reverse_trajectory(t)
        assert log_ratio_q(r) == pytest.approx(-log_ratio_q(t), abs=1e-10)
        rr = reverse_trajectory(r)
        assert np.allclose(rr.initial, t.initial, atol=1e-10)
        assert rr.events == t.events


def test_empty_trajectory_reverses_to_negated_state():
    t = Trajectory((0.3, -0.4))
    assert reverse_trajectory(t).initial == pytest.approx((-0.3, 0.4))


def test_reversal_of_eigenstate_record_reproduces_flipped_initial_state():
    # |0> is unchanged by any z record; the reversed run from the flipped state lands on -|0>.
    j, s = 1.3, 0.375
    t = Trajectory((0.0, 1.0), (Weak(j, s),))
    r = reverse_trajectory(t)
    (x, z), _ = replay(r.initial, r.events)
    rho = (IDENTITY - SIGMA_Z) / 2
    post = kraus_update_matrix(rho, j, s, 0.0)
    assert (x, z) == pytest.approx((np.trace(post @ SIGMA_X).real, np.trace(post @ SIGMA_Z).real))
    assert (x, z) == pytest.approx((0.0, -1.0))


@given(st.floats(-0.999, 0.999), st.floats(-6, 6), st.floats(0.05, 3))
def test_vectorized_single_step_matches_trajectory(z0, j, s):
    x0 = np.sqrt(1 - z0**2)
    assert rapidity_q(np.arctanh(z0), j, s) == pytest.approx(single_step_q(z0, j, s), abs=1e-12)
    # A trajectory stores z itself, so once 1 - |z| approaches the float spacing
    # the reversed density is only known to about 1e-16 / (1 - |z|).
    assert single_step_q(z0, j, s) == pytest.approx(log_ratio_q(Trajectory.single_weak(x0, z0, j, s)),
                                                    rel=1e-6, abs=1e-9)


def test_multi_step_records_multiply():
    t = Trajectory((1.0, 0.0), (Weak(0.5, 0.3), Rotate(0.4), Weak(-1.2, 0.3)))
    (x1, z1), l1 = replay((1.0, 0.0), t.events[:1])
    (_, _), l2 = replay((x1, z1), t.events[1:])
    assert replay(t.initial, t.events)[1] == pytest.approx(l1 + l2)


# ---------------------------------------------------------------- estimators

def test_integral_ft_for_zero_q():
    res = integral_ft_and_second_law(np.zeros(10))
    assert (res.ift, res.mean_q) == (1.0, 0.0)
    assert res.second_law_holds


def test_all_positive_q_is_insufficient():
    with pytest.raises(InsufficientStatisticsError):
        detailed_ft_check(np.abs(np.random.default_rng(0).normal(1, 1, 200_000)) + 0.01, 0.1)


def test_detailed_ft_on_synthetic_symmetric_ensemble():
    # Q ~ N(mu, 2 mu) satisfies P(Q)/P(-Q) = e^Q exactly.
    q = np.random.default_rng(2).normal(0.5, 1.0, 1_000_000)
    table = detailed_ft_check(q, 0.1)
    assert table.slope == pytest.approx(1.0, abs=0.05)


def test_too_few_samples():
    with pytest.raises(InsufficientStatisticsError):
        detailed_ft_check(np.zeros(10), 0.1)


def test_rapidity_flat_ensemble_balances():
    q = rapidity_flat_ensemble(0.375, 1_000_000, half_width=200, seed=1)
    table = detailed_ft_check(q, 0.1)
    assert table.slope == pytest.approx(1.0, abs=0.05)
    ift = integral_ft_and_second_law(q)
    assert ift.ift == pytest.approx(1.0, abs=0.02)
    assert ift.mean_q > 0


def test_fixed_prior_ensemble_matches_quadrature():
    q = single_step_ensemble(1 / np.sqrt(2), 0.375, 400_000, seed=3)
    res = integral_ft_and_second_law(q)
    assert res.ift == pytest.approx(exact_fixed_prior_ift(1 / np.sqrt(2), 0.375), abs=4 * res.ift_err)
    assert res.second_law_holds


def test_fixed_prior_ift_deficit_is_exact_boundary_mass():
    # The reversed process starts from states the forward one never produced,
    # so <exp(-Q)> = P(reversed record lands back on the prior's support) < 1.
    assert exact_fixed_prior_ift(0.0, 0.375) == pytest.approx(0.717639, abs=1e-6)
    assert exact_fixed_prior_ift(1 / np.sqrt(2), 0.375) == pytest.approx(0.804898, abs=1e-5)


def test_ensemble_independent_of_worker_count():
    a = single_step_ensemble(0.3, 0.375, 120_000, seed=9, jobs=1, chunk=25_000)
    b = single_step_ensemble(0.3, 0.375, 120_000, seed=9, jobs=3, chunk=25_000)
    assert np.array_equal(a, b)


# ---------------------------------------------------------------- feedback

@pytest.fixture(scope="module")
def feedback():
    kw = dict(n=400_000, s=0.375, rng_seed=21)
    return {p: run_feedback_ensemble(p, **kw) for p in ("cof", "acof", "none")}


def test_feedback_signs(feedback):
    cof = integral_ft_and_second_law(feedback["cof"].accepted_q)
    acof = integral_ft_and_second_law(feedback["acof"].accepted_q)
    assert cof.mean_q > 5 * cof.mean_q_err
    assert acof.mean_q < -5 * acof.mean_q_err
    assert 0 < feedback["cof"].acceptance < 1


def test_post_selected_cof_deviates_from_integral_ft(feedback):
    res = integral_ft_and_second_law(feedback["cof"].accepted_q)
    assert res.ift < 1 and res.absolute_irreversibility


def test_cof_q_matches_no_feedback_at_matched_records(feedback):
    # Restrict both ensembles to records whose ideal correction lies where the
    # acceptance probability is flat; there the Q distributions must agree.
    cof, none = feedback["cof"], feedback["none"]
    lim = np.pi / 4 - np.pi / 20

    def ideal(j):
        return np.arcsin(np.tanh(0.375 * j))

    a = cof.q[cof.accepted & (np.abs(ideal(cof.j)) <= lim)]
    b = none.q[np.abs(ideal(none.j)) <= lim]
    assert ks_2samp(a, b).pvalue > 0.01


def test_cof_weak_limit_has_no_arrow():
    ens = run_feedback_ensemble("cof", 20_000, 1e-8, rng_seed=4)
    assert np.max(np.abs(ens.q)) < 1e-3


def test_feedback_validation():
    with pytest.raises(ValueError):
        run_feedback_ensemble("sideways", 20_000, 0.375)
    with pytest.raises(ValueError):
        run_feedback_ensemble("cof", 100, 0.375)
    # a zero-width window accepts a continuous angle with probability zero
    with pytest.raises(NoAcceptedTrialsError):
        run_feedback_ensemble("acof", 10_000, 0.375, window=0.0)
