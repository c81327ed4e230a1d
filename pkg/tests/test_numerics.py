import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from tcsum.numerics import AdaGradState, adagrad_step, cosine, grad_check, init_uniform, make_rng, softmax

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)


class TestInitUniform:
    def test_zero_scale_rejected(self):
        with pytest.raises(ValueError):
            init_uniform((2, 2), 0.0, make_rng(0))

    def test_small_scale_tends_to_zero(self):
        w = init_uniform((3, 4), 1e-300, make_rng(0))
        assert np.all(np.abs(w) <= 1e-300)
        np.testing.assert_allclose(w, 0.0, rtol=0, atol=1e-300)

    def test_same_seed_same_tensor(self):
        a = init_uniform((5, 7), 0.1, make_rng(11))
        b = init_uniform((5, 7), 0.1, make_rng(11))
        assert np.array_equal(a, b)

    def test_empirical_mean(self):
        w = init_uniform((100, 100), 0.1, make_rng(4))
        assert abs(w.mean()) < 0.005
        assert w.min() >= -0.1 and w.max() <= 0.1

    def test_zero_dimension_rejected(self):
        with pytest.raises(ValueError):
            init_uniform((0, 3), 0.1, make_rng(0))


class TestAdaGrad:
    def test_first_step_by_hand(self):
        state = AdaGradState([np.zeros((1, 1))], learning_rate=0.1, epsilon=0.0)
        (theta,), state = adagrad_step([np.zeros((1, 1))], [np.ones((1, 1))], state)
        assert theta[0, 0] == pytest.approx(-0.1, abs=1e-15)
        assert state.accumulators[0][0, 0] == 1.0

    def test_second_step_shrinks(self):
        state = AdaGradState([np.zeros((1, 1))], learning_rate=0.1, epsilon=0.0)
        (theta,), state = adagrad_step([np.zeros((1, 1))], [np.ones((1, 1))], state)
        (theta2,), state = adagrad_step([theta], [np.ones((1, 1))], state)
        delta = theta2[0, 0] - theta[0, 0]
        assert delta == pytest.approx(-0.1 / math.sqrt(2), abs=1e-6)
        assert delta == pytest.approx(-0.070711, abs=1e-6)

    def test_zero_gradient_entries_untouched(self):
        p = np.array([[1.0, 2.0]])
        g = np.array([[0.0, 3.0]])
        state = AdaGradState.for_params([p])
        (new,), state2 = adagrad_step([p], [g], state)
        assert new[0, 0] == 1.0 and new[0, 1] != 2.0
        assert state2.accumulators[0][0, 0] == 0.0

    def test_inputs_not_mutated(self):
        p = np.ones((2, 2))
        state = AdaGradState.for_params([p])
        adagrad_step([p], [np.ones((2, 2))], state)
        assert np.array_equal(p, np.ones((2, 2)))
        assert np.array_equal(state.accumulators[0], np.zeros((2, 2)))

    def test_shape_mismatch(self):
        state = AdaGradState.for_params([np.zeros((2, 2))])
        with pytest.raises(ValueError):
            adagrad_step([np.zeros((2, 2))], [np.zeros((2, 3))], state)

    @settings(max_examples=1000, deadline=None)
    @given(hnp.arrays(np.float64, (3, 2), elements=finite), hnp.arrays(np.float64, (3, 2), elements=st.floats(0, 10)))
    def test_zero_gradient_is_identity(self, params, acc):
        state = AdaGradState([acc], learning_rate=0.1)
        (new,), new_state = adagrad_step([params], [np.zeros_like(params)], state)
        assert np.array_equal(new, params)
        assert np.array_equal(new_state.accumulators[0], acc)

    @settings(max_examples=1000, deadline=None)
    @given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=6))
    def test_accumulator_monotone_and_steps_shrink(self, gs):
        """For a repeated constant gradient the step size never grows."""
        state = AdaGradState.for_params([np.zeros((1, 1))])
        theta = np.zeros((1, 1))
        prev_acc = 0.0
        for g in gs:
            (theta, ), state = adagrad_step([theta], [np.full((1, 1), g)], state)
            assert state.accumulators[0][0, 0] >= prev_acc
            prev_acc = state.accumulators[0][0, 0]
        state = AdaGradState.for_params([np.zeros((1, 1))])
        theta = np.zeros((1, 1))
        g = gs[0] if gs[0] != 0 else 1.0
        steps = []
        for _ in range(len(gs)):
            (new,), state = adagrad_step([theta], [np.full((1, 1), g)], state)
            steps.append(abs(new[0, 0] - theta[0, 0]))
            theta = new
        assert all(b <= a + 1e-15 for a, b in zip(steps, steps[1:]))


class TestGradCheck:
    def test_constant_function(self):
        point = [np.ones((2, 3))]
        assert grad_check(lambda p: 4.0, [np.zeros((2, 3))], point) == 0.0

    def test_linear_function(self):
        point = [make_rng(0).normal(size=(3, 3)), make_rng(1).normal(size=4)]
        err = grad_check(lambda p: sum(x.sum() for x in p), [np.ones((3, 3)), np.ones(4)], point)
        assert err < 1e-9

    def test_detects_wrong_gradient(self):
        point = [np.array([1.0, 2.0])]
        err = grad_check(lambda p: float((p[0] ** 2).sum()), [np.array([2.0, 0.0])], point)
        assert err == pytest.approx(1.0)

    def test_point_not_mutated(self):
        x = np.array([0.5, -0.5])
        grad_check(lambda p: float(np.sin(p[0]).sum()), [np.cos(x)], [x])
        assert np.array_equal(x, [0.5, -0.5])

    def test_nonfinite_objective(self):
        with pytest.raises(FloatingPointError):
            grad_check(lambda p: float("nan"), [np.zeros(1)], [np.zeros(1)])


class TestCosineSoftmax:
    def test_cosine_zero_vector(self):
        assert cosine(np.zeros(3), np.ones(3)) == 0.0

    def test_softmax_by_hand(self):
        np.testing.assert_allclose(softmax(np.array([math.log(2), 0.0])), [2 / 3, 1 / 3], atol=1e-12)

    @settings(max_examples=1000, deadline=None)
    @given(hnp.arrays(np.float64, st.integers(1, 12), elements=st.floats(-700, 700)))
    def test_softmax_is_a_distribution(self, z):
        p = softmax(z)
        assert np.all(p >= 0)
        assert abs(p.sum() - 1.0) < 1e-12

    @settings(max_examples=1000, deadline=None)
    @given(hnp.arrays(np.float64, st.integers(2, 8), elements=finite), st.floats(-100, 100))
    def test_softmax_shift_invariance(self, z, c):
        np.testing.assert_allclose(softmax(z + c), softmax(z), atol=1e-12)
        # the argmax claim needs a shift that survives rounding of the inputs
        assume(np.array_equal((z + c) - c, z))
        assert np.argmax(softmax(z + c)) == np.argmax(softmax(z))

    @settings(max_examples=1000, deadline=None)
    @given(hnp.arrays(np.float64, 6, elements=finite), hnp.arrays(np.float64, 6, elements=finite))
    def test_cosine_bounds(self, a, b):
        assert -1.0 <= cosine(a, b) <= 1.0
