import numpy as np
import pytest

from u2detect.errors import ShapeError
from u2detect.types import InputSchedule, Trace, Trajectory, input_matrix


def test_trace_shape():
    trace = Trace(0.5, {'x': [1.0, 2.0, 3.0], 'u': [0.0, 1.0, 0.0]}, t0=1.0)
    assert trace.steps == 2
    assert trace.names == ['x', 'u']
    np.testing.assert_allclose(trace.times, [1.0, 1.5, 2.0])
    assert trace.to_array().shape == (3, 2)
    assert 'x' in trace and 'y' not in trace
    assert trace.select(['u']).names == ['u']

    with pytest.raises(ShapeError):
        Trace(0.5, {'x': [1.0, 2.0], 'u': [0.0, 1.0, 0.0]})
    with pytest.raises(ShapeError):
        Trace(0.5, {'x': [1.0]})
    with pytest.raises(ShapeError):
        Trace(0.0, {'x': [1.0, 2.0]})
    with pytest.raises(ShapeError):
        Trace(1.0, {'x': Trajectory(0.0, 0.5, [1.0, 2.0])})
    with pytest.raises(KeyError, match='Did you mean `x`'):
        trace['xx']


def test_trace_is_read_only():
    trace = Trace(1.0, {'x': [1.0, 2.0]})
    with pytest.raises(ValueError):
        trace['x'][0] = 5.0


def test_csv(tmp_path):
    trace = Trace(
        1.0, {
            'G': [120.0, 119.75, 119.5],
            'u1': [7.5, 0.0, 0.0]
        },
        time_unit='min')
    path = trace.to_csv(tmp_path / 'trace.csv')
    assert open(path).readline().strip() == 'time_min,G,u1'
    loaded = Trace.from_csv(path)
    assert loaded == trace
    assert loaded.time_unit == 'min'

    bad = tmp_path / 'bad.csv'
    bad.write_text('t,x\n0,1\n1,2\n')
    with pytest.raises(ShapeError, match='time_'):
        Trace.from_csv(bad)
    bad.write_text('time_s,x\n0,1\n1,2\n3,4\n')
    with pytest.raises(ShapeError, match='uniformly'):
        Trace.from_csv(bad)


def test_impulses():
    u = InputSchedule.impulses(1.0, u1=[(0.0, 7.5), (3.0, 2.0)])
    np.testing.assert_array_equal(
        u.sample('u1', np.arange(6.0)), [7.5, 0, 0, 2.0, 0, 0])
    # Area equals the dose for any period.
    u = InputSchedule.impulses(0.5, u2=[(0.0, 20.0)])
    samples = u.sample('u2', 0.5 * np.arange(10))
    assert samples.sum() * 0.5 == pytest.approx(20.0)
    assert u.value('u2', 0.25) == 40.0
    assert u.value('missing', 1.0) == 0.0


def test_schedule():
    u = InputSchedule({'u': ((0.0, 1.0), (2.0, 3.0))})
    np.testing.assert_array_equal(
        u.sample('u', np.array([0.0, 1.0, 2.0, 3.0])), [1, 1, 3, 3])
    total = u + InputSchedule.constant(u=1.0)
    assert total.value('u', 2.5) == 4.0
    with pytest.raises(ValueError, match='strictly increasing'):
        InputSchedule({'u': ((1.0, 1.0), (1.0, 2.0))})


def test_input_matrix():
    times = np.arange(4.0)
    U = input_matrix({'b': np.ones(4)}, ('a', 'b'), (False, True), times)
    np.testing.assert_array_equal(U, [[0, 1]] * 4)
    with pytest.raises(ShapeError, match='Missing input'):
        input_matrix({}, ('a', ), (True, ), times)
