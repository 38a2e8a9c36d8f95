import json

import pytest

from u2detect.cli import main


def write_json(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def test_calibrate_residues(tmp_path, capsys):
    out = tmp_path / 'calibration.json'
    code = main([
        'calibrate', '--residues',
        '0.0225,0.0028,0.0011,-0.0168,0.0328,0.0048',
        '--out',
        str(out)
    ])
    assert code == 0
    assert 'k = 4' in capsys.readouterr().out
    doc = json.loads(out.read_text())
    assert doc['interval'] == pytest.approx([-0.0216, 0.0376])
    assert doc['provenance']['residues'][0] == 0.0225


def test_calibrate_errors(tmp_path):
    out = str(tmp_path / 'calibration.json')
    assert main(['calibrate', '--residues', '0.1', '--out', out]) == 2
    assert main(['calibrate', '--residues', 'a,b', '--out', out]) == 2
    assert main(['calibrate', '--out', out]) == 2


def test_induce(tmp_path, capsys):
    dot = tmp_path / 'net.dot'
    assert main(['induce', 'BergmanMinimalModel', '--dot', str(dot)]) == 0
    printed = capsys.readouterr().out
    assert '3 cells / 5 edges / 2 inputs' in printed
    assert 'cell delta_G [observable]' in printed
    assert dot.read_text().startswith('digraph')

    broken = tmp_path / 'broken.json'
    broken.write_text('{"variables": ')
    assert main(['induce', str(broken)]) == 2


def test_usage_errors(tmp_path):
    manifest = write_json(tmp_path / 'empty.json', {
        'system': 'FirstOrderDecay',
        'scenarios': []
    })
    assert main(['simulate', '--manifest', manifest]) == 0
    assert main(['simulate', '--manifest', str(tmp_path / 'none.json')]) == 2
    assert main(['report', str(tmp_path)]) == 2
    assert main(['mine', 'trace.csv', '--out', str(tmp_path)]) == 2
    assert main([
        'mine', str(tmp_path / 'missing.csv'), '--system', 'FirstOrderDecay',
        '--out',
        str(tmp_path)
    ]) == 2


def test_decay_pipeline(tmp_path, capsys):
    manifest = write_json(
        tmp_path / 'decay.json', {
            'system': 'FirstOrderDecay',
            'scenarios': [
                {'amplitude': 0.2},
                {'amplitude': 0.4},
                {'amplitude': 0.3, 'x0': 0.5},
                {'amplitude': 0.5, 'x0': 0.5},
            ]
        })
    sim = tmp_path / 'sim'
    assert main(['simulate', '--manifest', manifest, '--out', str(sim)]) == 0
    traces = sim / 'traces'
    assert (traces / 'decay_u0.2_x1.truth.csv').is_file()
    assert json.loads((sim / 'manifest.json').read_text())['seeds'] == [
        0, 1, 2, 3
    ]

    train = [str(traces / f'decay_u{u}_x1.logged.csv') for u in (0.2, 0.4)]
    test = [str(traces / f'decay_u{u}_x0.5.logged.csv') for u in (0.3, 0.5)]
    mined = tmp_path / 'mined'
    model = ['--system', 'FirstOrderDecay']
    assert main(['mine', *train, *test, *model, '--out', str(mined)]) == 0
    result = json.loads((mined / 'decay_u0.2_x1.mining.json').read_text())
    assert result['source'] == 'decay_u0.2_x1'
    assert result['omega']['names'] == ['a', 'b']

    # Same seed, same bytes.
    again = tmp_path / 'again'
    assert main(['mine', train[0], *model, '--out', str(again)]) == 0
    assert (again / 'decay_u0.2_x1.mining.json').read_bytes() == (
        mined / 'decay_u0.2_x1.mining.json').read_bytes()

    run = tmp_path / 'run'
    calibration = run / 'calibration.json'
    assert main([
        'calibrate', '--train',
        *[str(mined / f'decay_u{u}_x1.mining.json') for u in (0.2, 0.4)],
        '--test',
        *[str(mined / f'decay_u{u}_x0.5.mining.json') for u in (0.3, 0.5)],
        '--reference', 'FirstOrderDecay', '--out',
        str(calibration)
    ]) == 0
    doc = json.loads(calibration.read_text())
    assert doc['k'] == 2
    assert doc['provenance']['system'] == 'FirstOrderDecay'

    capsys.readouterr()
    assert main([
        'detect', *test, '--calibration',
        str(calibration), *model, '--out',
        str(run / 'verdicts.jsonl')
    ]) == 0
    assert 'flagged' in capsys.readouterr().out
    records = [
        json.loads(line)
        for line in (run / 'verdicts.jsonl').read_text().splitlines()
    ]
    assert [r['source'] for r in records] == [
        'decay_u0.3_x0.5', 'decay_u0.5_x0.5'
    ]
    # Test traces sit inside an interval calibrated on themselves.
    assert not any(r['flagged'] for r in records)

    assert main(['report', str(run)]) == 0
    report = (run / 'report.md').read_text()
    assert report.startswith('# Detection report')
    assert 'Accepted residues' in report
    plot = run / 'plots' / 'decay_u0.3_x0.5.csv'
    header = plot.read_text().splitlines()[0]
    assert header == 'time_s,x,x_mined,x_reference'
