import numpy as np
import pytest

from secest.exceptions import SingularInnovation
from secest.kalman import KalmanState, predict, steady_state_covariance, update
from secest.lti import LtiSystem


def _scalar(a=1.0, c=1.0):
    return LtiSystem(A=[[a]], C=[[c]])


def test_scalar_step_by_hand():
    s = _scalar()
    ks = KalmanState(np.zeros(1), np.eye(1), 0.1 * np.eye(1), np.eye(1))
    ks = update(predict(ks, s), s, [2.0])
    # prior P = 1.1, gain 1.1 / 2.1, posterior P = 1.1 / 2.1
    assert ks.x_hat[0] == pytest.approx(2.0 * 1.1 / 2.1, rel=1e-14)
    assert ks.P[0, 0] == pytest.approx(1.1 / 2.1, rel=1e-14)


def test_scalar_riccati_closed_form():
    q, r = 0.1, 1.0
    prior = (q + np.sqrt(q * q + 4 * q * r)) / 2
    post = prior * r / (prior + r)
    P = steady_state_covariance(_scalar(), q * np.eye(1), r * np.eye(1))
    assert P[0, 0] == pytest.approx(post, rel=1e-12)


def test_iteration_converges_to_riccati(rng):
    A = np.diag([0.9, 0.5, 0.95]) + 0.05 * rng.standard_normal((3, 3))
    s = LtiSystem(A=A, C=rng.standard_normal((2, 3)))
    ks = KalmanState.initial(3, 2, meas_std=0.1, process_var=0.01)
    for _ in range(500):
        ks = update(predict(ks, s), s, np.zeros(2))
    np.testing.assert_allclose(ks.P, steady_state_covariance(s, ks.Qn, ks.Rn), atol=1e-10)
    np.testing.assert_array_equal(ks.P, ks.P.T)


def test_known_input_enters_prediction():
    s = LtiSystem(A=[[1.0]], B=[[2.0]], C=[[1.0]])
    ks = KalmanState.initial(1, 1, x0=[1.0])
    assert predict(ks, s, [3.0]).x_hat[0] == 7.0


def test_singular_innovation():
    s = _scalar()
    ks = KalmanState(np.zeros(1), np.zeros((1, 1)), np.zeros((1, 1)), np.zeros((1, 1)))
    with pytest.raises(SingularInnovation):
        update(ks, s, [1.0])


def test_state_values_are_not_mutated():
    s = _scalar()
    ks = KalmanState.initial(1, 1)
    before = ks.P.copy()
    update(predict(ks, s), s, [1.0])
    np.testing.assert_array_equal(ks.P, before)
