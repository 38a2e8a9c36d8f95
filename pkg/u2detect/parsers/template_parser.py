import json
from pathlib import Path
from typing import Mapping, Union

from ..errors import TemplateError

REQUIRED_KEYS = ('variables', 'inputs', 'a_pattern', 'b_pattern', 'beta')


def parse_template(doc: Mapping):
    """Build a :class:`ModelTemplate` from its JSON document.

    The document is ``{variables, inputs, a_pattern, b_pattern, beta}`` with
    optional ``time_unit`` and ``coefficient_names``. Errors carry the JSON
    path of the offending entry.
    """
    from ..models.template import ModelTemplate, SlotSign

    if not isinstance(doc, Mapping):
        raise TemplateError('The template must be a JSON object.', '$')
    for key in REQUIRED_KEYS:
        if key not in doc:
            raise TemplateError('Missing required key.', f'$.{key}')
    for key in ('variables', 'inputs', 'b_pattern', 'beta', 'a_pattern'):
        if not isinstance(doc[key], list):
            raise TemplateError('Expected a list.', f'$.{key}')

    def sign(value, location):
        if isinstance(value, (list, dict)):
            raise TemplateError('Expected a sign label.', location)
        try:
            return SlotSign.parse(value)
        except TemplateError as e:
            raise TemplateError(str(e), location) from None

    a_pattern = []
    for i, row in enumerate(doc['a_pattern']):
        if not isinstance(row, list):
            raise TemplateError('Expected a list.', f'$.a_pattern[{i}]')
        a_pattern.append(
            [sign(v, f'$.a_pattern[{i}][{j}]') for j, v in enumerate(row)])
    b_pattern = [
        sign(v, f'$.b_pattern[{i}]') for i, v in enumerate(doc['b_pattern'])
    ]
    for i, b in enumerate(doc['beta']):
        if not isinstance(b, (bool, int)) or b not in (0, 1):
            raise TemplateError('Expected a boolean.', f'$.beta[{i}]')
    for key in ('variables', 'inputs'):
        for i, name in enumerate(doc[key]):
            if not isinstance(name, str) or not name:
                raise TemplateError('Expected a non-empty string.',
                                    f'$.{key}[{i}]')

    try:
        return ModelTemplate(
            variable_names=doc['variables'],
            input_names=doc['inputs'],
            a_pattern=a_pattern,
            b_pattern=b_pattern,
            beta=doc['beta'],
            time_unit=doc.get('time_unit', 's'),
            coefficient_names=doc.get('coefficient_names'),
        )
    except TemplateError as e:
        if e.location and not e.location.startswith('$'):
            raise TemplateError(
                str(e).split(': ', 1)[-1], f'$.{e.location}') from None
        raise


def load_template(path: Union[str, Path]):
    try:
        with open(path) as f:
            doc = json.load(f)
    except json.JSONDecodeError as e:
        raise TemplateError(
            f'Malformed JSON ({e.msg})',
            location=f'{path}:{e.lineno}:{e.colno}') from e
    return parse_template(doc)


def dump_template(template, path: Union[str, Path]) -> str:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(template.to_dict(), indent=2) + '\n')
    return str(path)
