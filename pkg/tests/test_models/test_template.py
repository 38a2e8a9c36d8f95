import json

import numpy as np
import pytest

from u2detect.errors import ShapeError, TemplateError
from u2detect.models import CoefficientVector, ModelTemplate, SlotSign
from u2detect.parsers import dump_template, load_template, parse_template


def test_bergman_slots(bergman):
    assert bergman.n == 3
    assert bergman.observables == ['delta_G']
    assert bergman.active_inputs == ['u1', 'u2']
    assert [s.name for s in bergman.slots] == [
        'neg_n', 'p2', 'neg_p1', 'neg_G_b', 'neg_p3', 'p4', 'inv_VoI'
    ]
    assert sum(s.matrix == 'a' for s in bergman.slots) == 5
    assert sum(s.matrix == 'b' for s in bergman.slots) == 2


def test_default_slot_names():
    template = ModelTemplate(
        variable_names=('x', 'y'),
        input_names=('u', 'v'),
        a_pattern=(('-', '0'), ('+', '-')),
        b_pattern=('+', '0'),
        beta=(True, False))
    assert [s.name for s in template.slots
            ] == ['a[x,x]', 'a[y,x]', 'a[y,y]', 'b[x]']
    assert template.required_signals() == ['x', 'u']


def test_invalid_templates():
    with pytest.raises(TemplateError, match='observable'):
        ModelTemplate(('x', ), ('u', ), (('-', ), ), ('+', ), (False, ))
    with pytest.raises(TemplateError, match='no non-zero entry'):
        ModelTemplate(('x', 'y'), ('u', 'v'), (('-', '0'), ('0', '0')),
                      ('+', '0'), (True, True))
    with pytest.raises(TemplateError):
        ModelTemplate(('x', ), ('u', 'v'), (('-', ), ), ('+', ), (True, ))
    with pytest.raises(TemplateError, match='Invalid sign label'):
        ModelTemplate(('x', ), ('u', ), (('?', ), ), ('+', ), (True, ))


def test_sign_labels():
    assert SlotSign.parse('free-negative') is SlotSign.NEGATIVE
    assert SlotSign.parse(0) is SlotSign.ZERO
    assert SlotSign.NEGATIVE.admits(-1.0)
    assert not SlotSign.NEGATIVE.admits(0.5)
    assert SlotSign.POSITIVE.project(-2.0) == 0.0
    assert SlotSign.ANY.project(-2.0) == -2.0


def test_bind_and_matrices(bergman):
    omega = bergman.bind({
        'neg_n': -199.6,
        'p2': 0.1406,
        'neg_p1': -0.098,
        'neg_G_b': -0.035,
        'neg_p3': -0.028,
        'p4': 0.05,
        'inv_VoI': -0.0125,
    })
    assert len(omega) == bergman.coefficient_count
    A, B = bergman.matrices(omega)
    np.testing.assert_array_equal(
        A, [[-199.6, 0, 0], [0.1406, -0.098, 0], [0, -0.035, -0.028]])
    np.testing.assert_array_equal(np.diag(B), [0.05, 0, -0.0125])
    assert bergman.from_matrices(A, B) == omega
    assert omega['p2'] == 0.1406
    with pytest.raises(KeyError, match='p3'):
        omega['p3']


def test_sign_violation(integrator_template):
    bad = ModelTemplate(('x', ), ('u', ), (('-', ), ), ('+', ), (True, ))
    omega = bad.bind([0.1, 1.0])
    with pytest.raises(TemplateError, match='violates'):
        omega.check_binds(bad)
    with pytest.raises(ShapeError):
        integrator_template.bind([1.0]).check_binds(integrator_template)


def test_coefficient_vector_alignment():
    a = CoefficientVector(('p', 'q'), (1.0, 2.0))
    b = CoefficientVector.from_dict({'p': 3.0, 'q': 4.0})
    assert a.aligned_with(b)
    assert list(a) == [('p', 1.0, ''), ('q', 2.0, '')]
    assert CoefficientVector.from_dict(a.to_dict()) == a
    with pytest.raises(ShapeError):
        CoefficientVector(('p', 'p'), (1.0, 2.0))


def test_parse_template_locations():
    doc = dict(
        variables=['x'],
        inputs=['u'],
        a_pattern=[['bad']],
        b_pattern=['+'],
        beta=[True])
    with pytest.raises(TemplateError, match=r'\$\.a_pattern\[0\]\[0\]'):
        parse_template(doc)
    doc = dict(doc, a_pattern=[['-']], beta=[2])
    with pytest.raises(TemplateError, match=r'\$\.beta\[0\]'):
        parse_template(doc)
    with pytest.raises(TemplateError, match=r'\$\.variables'):
        parse_template({'inputs': []})


def test_template_file(tmp_path, bergman):
    path = dump_template(bergman, tmp_path / 'bergman.json')
    assert json.loads(open(path).read())['beta'] == [False, False, True]
    assert load_template(path) == bergman

    broken = tmp_path / 'broken.json'
    broken.write_text('{"variables": [')
    with pytest.raises(TemplateError, match='Malformed JSON'):
        load_template(broken)
