import math

import numpy as np
import pytest

from u2detect.errors import ShapeError, SimulationDiverged
from u2detect.models import integrate_reference, trace_distance
from u2detect.testing import (random_coefficients, random_template,
                              random_trace)
from u2detect.types import InputSchedule, Trace


def _decay(template, a, tau, N, substeps=None):
    omega = template.bind([a])
    return integrate_reference(
        template, omega, InputSchedule(), (1.0, ), tau, N, substeps=substeps)


def test_exponential_decay(scalar_template):
    trace = _decay(scalar_template, -0.1, 0.01, 1000)
    assert len(trace) == 1001
    assert trace.times[-1] == pytest.approx(10.0)
    assert abs(trace['x'][-1] - math.exp(-1)) < 1e-6


def test_fourth_order(scalar_template):
    errors = []
    for tau, N in ((0.5, 4), (0.25, 8)):
        trace = _decay(scalar_template, -1.0, tau, N, substeps=1)
        errors.append(abs(trace['x'][-1] - math.exp(-2.0)))
    assert errors[0] >= 8 * errors[1]


def test_pure_integrator(integrator_template):
    omega = integrator_template.bind([0.0, 1.0])
    trace = integrate_reference(integrator_template, omega,
                                InputSchedule.constant(u=2.0), (0.0, ), 0.1,
                                50)
    np.testing.assert_allclose(trace['x'], 2 * trace.times, atol=1e-12)
    np.testing.assert_array_equal(trace['u'], np.full(51, 2.0))


def test_linearity(rng):
    template = random_template(rng, n=3)
    omega = random_coefficients(template, rng)
    x0 = np.zeros(template.n)

    def schedule():
        return InputSchedule({
            name: ((0.0, rng.uniform()), (float(rng.integers(1, 5)),
                                          rng.uniform()))
            for name in template.active_inputs
        })

    u1, u2 = schedule(), schedule()
    runs = [
        integrate_reference(template, omega, u, x0, 0.1, 60)
        for u in (u1, u2, u1 + u2)
    ]
    for name in template.variable_names:
        np.testing.assert_allclose(
            runs[2][name], runs[0][name] + runs[1][name], atol=1e-9)


def test_drift(scalar_template):
    omega = scalar_template.bind([-0.5])
    trace = integrate_reference(
        scalar_template, omega, InputSchedule(), (0.0, ), 0.1, 200,
        drift=(1.0, ))
    # Settles at -c / a.
    assert trace['x'][-1] == pytest.approx(2.0, rel=1e-3)


def test_divergence(scalar_template):
    omega = scalar_template.bind([-1000.0])
    with pytest.raises(SimulationDiverged) as e:
        integrate_reference(scalar_template, omega, InputSchedule(), (1.0, ),
                            1.0, 100, substeps=1)
    assert e.value.step > 0


def test_invalid_arguments(scalar_template):
    omega = scalar_template.bind([-1.0])
    with pytest.raises(ShapeError):
        integrate_reference(scalar_template, omega, InputSchedule(), (1.0, ),
                            0.0, 10)
    with pytest.raises(ShapeError):
        integrate_reference(scalar_template, omega, InputSchedule(),
                            (1.0, 2.0), 0.1, 10)
    with pytest.raises(ShapeError):
        integrate_reference(scalar_template, omega, InputSchedule(),
                            (math.nan, ), 0.1, 10)


def test_trace_distance():
    zeros = Trace(1.0, {'x': np.zeros(5)})
    threes = Trace(1.0, {'x': np.full(5, 3.0)})
    assert trace_distance(zeros, zeros) == 0.0
    assert trace_distance(zeros, threes) == pytest.approx(3.0)
    a = Trace(1.0, {'x': [0.0, 0.0]})
    b = Trace(1.0, {'x': [3.0, 4.0]})
    assert trace_distance(a, b) == pytest.approx(3.5355, abs=1e-4)
    with pytest.raises(ShapeError):
        trace_distance(a, threes)
    with pytest.raises(ShapeError):
        trace_distance(zeros, threes, signals=['y'])


def test_trace_distance_metric(rng):
    template = random_template(rng, n=2)
    traces = [
        random_trace(template, random_coefficients(template, rng), rng, N=30)
        for _ in range(3)
    ]
    names = template.variable_names
    a, b, c = traces
    assert trace_distance(a, b, names) == pytest.approx(
        trace_distance(b, a, names))
    assert trace_distance(a, c, names) <= (
        trace_distance(a, b, names) + trace_distance(b, c, names) + 1e-12)
