import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from reachavoid.dynamics import (ContractError, InputBox, Polynomial, double_integrator, flow_eval, game_2d,
                                 integrator_1d, per_axis_speed_bound, polynomial_affine, zero_dynamics)
from reachavoid.grid import Grid


def test_input_box_validation():
    with pytest.raises(ContractError):
        InputBox((1.0,), (0.0,))
    with pytest.raises(ContractError):
        InputBox((0.0, 0.0), (1.0,))
    assert InputBox.empty().dim == 0


def test_samples_contain_vertices():
    box = InputBox((-1.0, 0.0), (1.0, 2.0))
    s = box.samples(3)
    for v in [(-1, 0), (-1, 2), (1, 0), (1, 2)]:
        assert any(np.allclose(row, v) for row in s)
    assert len(s) == 9


def test_flow_eval_examples():
    assert flow_eval(integrator_1d(1.0, 0.5), [0.0], [1.0], [-0.5])[0] == 0.5
    dyn = game_2d()
    np.testing.assert_array_equal(flow_eval(dyn, [0.3, -0.2], [0, 0], [0, 0]), [0.0, 0.0])


def test_flow_eval_contracts():
    dyn = integrator_1d(1.0, 0.5)
    with pytest.raises(ContractError):
        flow_eval(dyn, [0.0, 1.0], [0.0], [0.0])
    with pytest.raises(ContractError):
        flow_eval(dyn, [0.0], [1.5], [0.0])
    with pytest.raises(ContractError):
        flow_eval(dyn, [0.0], [0.0], [0.6])


def test_double_integrator_flow():
    dyn = double_integrator(1.0, 0.0)
    np.testing.assert_array_equal(flow_eval(dyn, [0.0, 2.0], [0.5], [0.0]), [2.0, 0.5])


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-1, 1), st.floats(-0.5, 0.5))
def test_flow_eval_is_pure(x0, x1, u, v):
    dyn = game_2d()
    a = flow_eval(dyn, [x0, x1], [u, -u], [v, v])
    b = flow_eval(dyn, [x0, x1], [u, -u], [v, v])
    assert a.tobytes() == b.tobytes()


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0, 1),
       st.tuples(st.floats(-1, 1), st.floats(-1, 1)), st.tuples(st.floats(-1, 1), st.floats(-1, 1)),
       st.floats(-0.5, 0.5))
def test_affine_dynamics_linear_in_control(x0, x1, lam, u1, u2, v):
    dyn = polynomial_affine(
        [Polynomial.parse("x1"), Polynomial.parse("-0.5*x0 + x0^2")],
        [[Polynomial.parse("1"), Polynomial.constant(0)], [Polynomial.constant(0), Polynomial.parse("2 + x0")]],
        [[Polynomial.parse("x1")], [Polynomial.constant(1)]],
        InputBox.symmetric([1.0, 1.0]), InputBox.symmetric(0.5))
    assert dyn.affine_in_inputs
    u1, u2 = np.array(u1), np.array(u2)
    mix = flow_eval(dyn, [x0, x1], lam * u1 + (1 - lam) * u2, [v])
    lin = lam * flow_eval(dyn, [x0, x1], u1, [v]) + (1 - lam) * flow_eval(dyn, [x0, x1], u2, [v])
    np.testing.assert_allclose(mix, lin, atol=1e-12)


def test_polynomial_parse_and_format():
    p = Polynomial.parse("1.5*x0^2*x1 - 0.5 + x1")
    x = np.array([[2.0], [3.0]])
    assert p(x)[0] == 1.5 * 4 * 3 - 0.5 + 3
    q = Polynomial.parse(p.format())
    assert q(x)[0] == p(x)[0]
    with pytest.raises(ValueError):
        Polynomial.parse("2*y")


def test_speed_bound_examples():
    g = Grid((-1.0, -1.0), (1.0, 1.0), (5, 5))
    alpha = per_axis_speed_bound(game_2d(1.0, 0.5), g)
    assert np.all(alpha >= 1.5)
    np.testing.assert_allclose(alpha, 1.5 * 1.05)
    assert not per_axis_speed_bound(zero_dynamics(2), g).any()


@given(st.integers(0, 10_000))
def test_speed_bound_dominates_sampled_flow(seed):
    g = Grid((-2.0, -2.0), (2.0, 2.0), (9, 9))
    dyn = double_integrator(1.0, 0.3)
    alpha = per_axis_speed_bound(dyn, g)
    rng = np.random.default_rng(seed)
    x = rng.uniform(-2, 2, size=2)
    u = rng.uniform(-1, 1, size=1)
    v = rng.uniform(-0.3, 0.3, size=1)
    assert np.all(np.abs(flow_eval(dyn, x, u, v)) <= alpha)
