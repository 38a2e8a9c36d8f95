import math

import numpy as np
import pytest

from u2detect.errors import (ConfigurationError, ForwardPassDiverged,
                             ShapeError)
from u2detect.mining import (forward_pass, gradient, induce_network, loss,
                             replication_error, residuals_and_jacobian,
                             validate_step_size)
from u2detect.models import integrate_reference
from u2detect.systems import BergmanParams, generate_scenario
from u2detect.testing import (random_coefficients, random_template,
                              random_trace)
from u2detect.types import InputSchedule, Trace


def test_bergman_wiring(bergman):
    net = induce_network(bergman, 1.0)
    assert len(net.cells) == 3
    assert net.edge_count == 5
    assert net.input_count == 2
    assert net.parameter_count == 7

    delta_i, delta_is, delta_G = net.cells
    assert delta_i.has_self_loop and delta_i.input_name == 'u1'
    assert {src for src, _ in delta_is.connections} == {0, 1}
    assert delta_is.input_name is None
    assert {src for src, _ in delta_G.connections} == {1, 2}
    assert delta_G.input_name == 'u2' and delta_G.observable

    lines = net.describe()
    assert lines[2].startswith('cell delta_G [observable]')
    dot = net.to_dot()
    assert '"delta_is" -> "delta_G"' in dot
    assert '"u1" -> "delta_i"' in dot


def test_smallest_network(scalar_template):
    net = induce_network(scalar_template, 0.1)
    assert len(net.cells) == 1
    assert net.cells[0].has_self_loop
    assert net.cells[0].input_name is None
    assert net.edge_count == 1 and net.input_count == 0


def test_random_wiring():
    rng = np.random.default_rng(7)
    for _ in range(5):
        template = random_template(rng, n=4)
        net = induce_network(template, 0.1)
        a_slots = sum(s.matrix == 'a' for s in template.slots)
        b_slots = sum(s.matrix == 'b' for s in template.slots)
        assert net.edge_count == a_slots
        assert net.input_count == b_slots
        assert net.parameter_count == template.coefficient_count


def test_discrete_integrator(integrator_template):
    omega = integrator_template.bind([0.0, 1.0])
    net = induce_network(integrator_template, 0.5, omega)
    trace = forward_pass(net, InputSchedule.constant(u=1.0), (0.0, ), 4)
    np.testing.assert_array_equal(trace['x'], [0.0, 0.5, 1.0, 1.5, 2.0])


def test_euler_decay(scalar_template):
    omega = scalar_template.bind([-0.1])
    net = induce_network(scalar_template, 0.01, omega)
    trace = forward_pass(net, {}, (1.0, ), 1000)
    assert trace['x'][-1] == pytest.approx(0.999**1000, rel=1e-10)
    assert abs(trace['x'][-1] / math.exp(-1) - 1) < 1e-3


def test_closed_form(rng):
    template = random_template(rng, n=3, density=0.6)
    omega = random_coefficients(template, rng)
    tau, N = 0.1, 20
    net = induce_network(template, tau, omega)
    u = {name: rng.uniform(size=N + 1) for name in template.active_inputs}
    x0 = rng.uniform(-1, 1, size=template.n)
    trace = forward_pass(net, u, x0, N)

    A, B = template.matrices(omega)
    M = np.eye(template.n) + tau * A
    U = np.zeros((N + 1, template.n))
    for i, name in enumerate(template.input_names):
        if name in u:
            U[:, i] = u[name]
    for k in (1, 7, N):
        expected = np.linalg.matrix_power(M, k) @ x0
        for m in range(k):
            expected += tau * np.linalg.matrix_power(M, k - 1 - m) @ B @ U[m]
        np.testing.assert_allclose(
            trace.to_array(template.variable_names)[k], expected, atol=1e-10)


def test_forward_pass_divergence(scalar_template):
    net = induce_network(scalar_template, 1.0, scalar_template.bind([50.0]))
    with pytest.raises(ForwardPassDiverged):
        forward_pass(net, {}, (1.0, ), 1000)
    with pytest.raises(ShapeError):
        forward_pass(net, {}, (1.0, 0.0), 10)


def test_validate_step_size(bergman):
    assert validate_step_size([-0.1, -0.028], 5e-5) == pytest.approx(0.1)
    assert validate_step_size([-1.0], 0.5) == pytest.approx(1.0)
    assert validate_step_size([0.0, 0.0], 0.1) == math.inf
    # Zero entries impose no bound.
    assert validate_step_size([0.0, -1.0], 0.5) == pytest.approx(1.0)

    bounds = [validate_step_size([-0.5], psi) for psi in np.logspace(-1, -8)]
    assert all(a > b for a, b in zip(bounds, bounds[1:]))

    omega = BergmanParams().coefficients()
    bound = validate_step_size(omega, 1e-4, bergman)
    assert bound == pytest.approx(math.sqrt(2e-4) / 199.6)
    with pytest.raises(ConfigurationError):
        validate_step_size(omega, 1e-4)
    with pytest.raises(ConfigurationError):
        validate_step_size([-1.0], 1.5)


def test_substeps_follow_step_bound(bergman):
    omega = BergmanParams().coefficients()
    net = induce_network(bergman, 1.0, omega, psi=1e-4)
    bound = validate_step_size(omega, 1e-4, bergman)
    assert net.substeps == math.ceil(1.0 / bound - 1e-9)
    assert net.step <= bound
    assert induce_network(bergman, 1.0, omega, substeps=10).substeps == 10


def test_bergman_euler_bound(bergman):
    psi = 1e-4
    truth = generate_scenario(7.5, 20.0).truth
    net = induce_network(
        bergman, 1.0, BergmanParams().coefficients(), psi=psi)
    errors = replication_error(net, truth)
    assert errors['delta_G'] <= 2 * psi


def _self_generated(template, omega, tau, N, amplitude=0.5):
    net = induce_network(template, tau, omega)
    u = InputSchedule.constant(u=amplitude)
    states = forward_pass(net, u, (1.0, ), N)
    return states.with_signals(u=np.full(N + 1, amplitude))


def test_loss(integrator_template):
    omega = integrator_template.bind([-0.2, 1.0])
    trace = _self_generated(integrator_template, omega, 0.1, 50)
    net = induce_network(integrator_template, 0.1, omega)
    assert loss(net, trace) == 0.0
    np.testing.assert_allclose(gradient(net, trace), 0.0, atol=1e-10)

    shifted = trace.with_signals(x=trace['x'] + 0.3)
    shifted = shifted.with_signals(
        x=np.concatenate([[trace['x'][0]], shifted['x'][1:]]))
    assert loss(net, shifted, normalize=False) == pytest.approx(0.09)

    with pytest.raises(ConfigurationError):
        loss(induce_network(integrator_template, 0.2, omega), trace)
    with pytest.raises(ShapeError):
        loss(net, trace.select(['x']))


def test_scalar_gradient_by_hand(scalar_template):
    a, tau = -0.3, 0.5
    trace = Trace(tau, {'x': [2.0, 1.5, 1.0]})
    net = induce_network(scalar_template, tau, scalar_template.bind([a]))
    y0, y1, y2 = trace['x']
    x1 = (1 + tau * a) * y0
    x2 = (1 + tau * a)**2 * y0
    expected = (x1 - y1) * tau * y0 + (x2 - y2) * 2 * (1 + tau * a) * tau * y0
    assert gradient(net, trace, normalize=False)[0] == pytest.approx(
        expected, abs=1e-12)
    assert loss(net, trace, normalize=False) == pytest.approx(
        ((x1 - y1)**2 + (x2 - y2)**2) / 2, abs=1e-15)


def _finite_differences(net, trace):
    w = net.weights.as_array()
    grad = np.zeros_like(w)
    for i in range(len(w)):
        h = 1e-6 * max(1.0, abs(w[i]))
        values = []
        for sign in (1, -1):
            shifted = w.copy()
            shifted[i] += sign * h
            net.set_weights(shifted)
            values.append(loss(net, trace))
        grad[i] = (values[0] - values[1]) / (2 * h)
    net.set_weights(w)
    return grad


def _assert_gradient(net, trace):
    analytic = gradient(net, trace)
    numeric = _finite_differences(net, trace)
    scale = np.max(np.abs(analytic))
    np.testing.assert_allclose(analytic, numeric, rtol=1e-4, atol=1e-7 * scale)


def test_gradient_scalar(scalar_template):
    trace = integrate_reference(scalar_template, scalar_template.bind([-0.4]),
                                InputSchedule(), (1.0, ), 0.1, 40)
    net = induce_network(
        scalar_template, 0.1, scalar_template.bind([-0.3]), substeps=2)
    _assert_gradient(net, trace)


def test_gradient_random_networks():
    rng = np.random.default_rng(3)
    for _ in range(3):
        template = random_template(rng, n=4, density=0.5, observable=3)
        omega = random_coefficients(template, rng)
        trace = random_trace(template, omega, rng, N=40)
        perturbed = omega.replace(
            [slot.sign.project(v * rng.uniform(0.8, 1.2))
             for slot, v in zip(template.slots, omega.values)])
        net = induce_network(template, 0.1, perturbed, substeps=3)
        _assert_gradient(net, trace)


def test_gradient_bergman(bergman):
    trace = generate_scenario(7.5, 20.0).logged
    nominal = BergmanParams().coefficients()
    perturbed = nominal.replace([v * 1.1 for v in nominal.values])
    net = induce_network(bergman, 1.0, perturbed, substeps=1000)
    _assert_gradient(net, trace)


def _assert_jacobian(net, trace):
    r, J = residuals_and_jacobian(net, trace)
    assert r @ r == pytest.approx(loss(net, trace), rel=1e-10)
    assert J.shape == (len(r), net.parameter_count)
    analytic = gradient(net, trace)
    scale = np.max(np.abs(analytic))
    np.testing.assert_allclose(
        2 * J.T @ r, analytic, rtol=1e-6, atol=1e-9 * scale)


def test_jacobian_matches_backpropagation(bergman):
    rng = np.random.default_rng(5)
    template = random_template(rng, n=4, density=0.5, observable=3)
    omega = random_coefficients(template, rng)
    trace = random_trace(template, omega, rng, N=40)
    perturbed = omega.replace(
        [slot.sign.project(v * rng.uniform(0.8, 1.2))
         for slot, v in zip(template.slots, omega.values)])
    _assert_jacobian(induce_network(template, 0.1, perturbed, substeps=3),
                     trace)

    trace = generate_scenario(7.5, 20.0).logged
    nominal = BergmanParams().coefficients()
    perturbed = nominal.replace([v * 1.1 for v in nominal.values])
    _assert_jacobian(
        induce_network(bergman, 1.0, perturbed, substeps=1000), trace)
