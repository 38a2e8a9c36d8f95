import argparse
import functools
import json
import sys
from pathlib import Path
from typing import List, Optional

from tabulate import tabulate

from .apis import list_systems, load_system
from .errors import ManifestError
from .models.integrate import integrate_reference
from .models.template import CoefficientVector, ModelTemplate
from .parsers import dump_template, load_manifest, load_template
from .schema import Calibration, MiningFailure, MiningResult, TrainingConfig
from .types import Trace
from .utils import (dump_json, dump_jsonl, file_digest, get_logger, load_json,
                    track_map)

prog_description = """\
Detect unknown-unknown errors by mining surrogate model coefficients from
operational traces and checking their conformance.
"""

VERDICTS_FILE = 'verdicts.jsonl'


def parse_args(argv: Optional[List[str]] = None):
    parser = argparse.ArgumentParser(
        prog='u2detect', description=prog_description)
    commands = parser.add_subparsers(dest='command', required=True)

    simulate = commands.add_parser(
        'simulate', help='Generate the traces of a run manifest.')
    simulate.add_argument(
        '--manifest', required=True, help='The run manifest file.')
    simulate.add_argument('--out', help='Output directory.')
    simulate.add_argument('--seed', type=int, help='Global seed.')
    simulate.add_argument('--jobs', type=int, help='Worker processes.')
    simulate.set_defaults(func=cmd_simulate)

    induce = commands.add_parser(
        'induce', help='Print the network induced from a template.')
    induce.add_argument(
        'template', help='A template file or a registered system name.')
    induce.add_argument(
        '--tau', type=float, default=1.0, help='The sampling period.')
    induce.add_argument('--dot', help='Write the Graphviz graph here.')
    induce.set_defaults(func=cmd_induce)

    mine = commands.add_parser(
        'mine', help='Mine the coefficients of trace files.')
    mine.add_argument('traces', nargs='+', help='Trace CSV files.')
    _add_model_args(mine)
    mine.add_argument('--seed', type=int, help='Seed of initialization.')
    mine.add_argument(
        '--jobs', type=int, default=1, help='Worker processes.')
    mine.add_argument('--out', required=True, help='Output directory.')
    mine.set_defaults(func=cmd_mine)

    calibrate = commands.add_parser(
        'calibrate', help='Build the conformal acceptance interval.')
    calibrate.add_argument(
        '--train', nargs='+', default=[], help='Train mining results.')
    calibrate.add_argument(
        '--test', nargs='+', default=[], help='Test mining results.')
    calibrate.add_argument(
        '--reference',
        help='A system name or a coefficient JSON file.')
    calibrate.add_argument(
        '--system', help='Map mined coefficients with this system.')
    calibrate.add_argument(
        '--residues',
        help='Comma separated residues, instead of mining results.')
    calibrate.add_argument(
        '--alpha', type=float, default=0.05, help='Miscoverage level.')
    calibrate.add_argument('--out', required=True, help='Output file.')
    calibrate.set_defaults(func=cmd_calibrate)

    detect = commands.add_parser(
        'detect', help='Flag traces that fall outside the calibration.')
    detect.add_argument('traces', nargs='+', help='Trace CSV files.')
    detect.add_argument(
        '--calibration', required=True, help='The calibration file.')
    _add_model_args(detect)
    detect.add_argument(
        '--jobs', type=int, default=1, help='Worker processes.')
    detect.add_argument(
        '--out', required=True, help='Output verdict JSON lines file.')
    detect.set_defaults(func=cmd_detect)

    report = commands.add_parser(
        'report', help='Summarize the verdicts of a run directory.')
    report.add_argument(
        'run_dir', help=f'A directory holding {VERDICTS_FILE}.')
    report.set_defaults(func=cmd_report)

    return parser.parse_args(argv)


def _add_model_args(parser):
    parser.add_argument('--template', help='The template file.')
    parser.add_argument('--system', help='A registered system name.')
    parser.add_argument('--config', help='Training options JSON file.')


def _trace_stem(path: str) -> str:
    name = Path(path).name
    for suffix in ('.csv', '.logged'):
        if name.endswith(suffix):
            name = name[:-len(suffix)]
    return name


def _resolve_template(value: str) -> ModelTemplate:
    if value in list_systems():
        return load_system(value).template()
    return load_template(value)


def _model_setup(args):
    """Template, system, training config and mining start point of the
    ``mine`` and ``detect`` commands."""
    if args.system is None and args.template is None:
        raise ManifestError('Either --template or --system is required.')
    system = load_system(args.system) if args.system else None
    template = (
        load_template(args.template)
        if args.template else system.template())
    config = (
        system.default_training_config() if system else TrainingConfig())
    if args.config:
        config = TrainingConfig.from_dict({
            **config.to_dict(),
            **load_json(args.config)
        })
    config = config.override(seed=getattr(args, 'seed', None))
    nominal = system.reference() if system else None
    return template, system, config, nominal


def _load_traces(paths: List[str], template: ModelTemplate) -> List[Trace]:
    traces = []
    for path in paths:
        trace = Trace.from_csv(path)
        template.check_trace(trace)
        traces.append(trace)
    return traces


def _simulate_one(task, system_name, system_args, noise_sd):
    index, scenario, seed = task
    system = load_system(system_name, **system_args)
    try:
        return index, system.generate(scenario, seed=seed, noise_sd=noise_sd)
    except (ValueError, RuntimeError) as e:
        return index, f'{type(e).__name__}: {e}'


def cmd_simulate(args) -> int:
    logger = get_logger()
    manifest = load_manifest(
        args.manifest, seed=args.seed, jobs=args.jobs, out_dir=args.out)
    if not manifest.scenarios:
        logger.warning('The manifest lists no scenarios; nothing to do.')
        return 0
    system = manifest.load_system()
    template = (
        load_template(manifest.template)
        if manifest.template else system.template())
    tasks = [(i, scenario, manifest.scenario_seed(i))
             for i, scenario in enumerate(manifest.scenarios)]
    worker = functools.partial(
        _simulate_one,
        system_name=manifest.system,
        system_args=manifest.system_args,
        noise_sd=manifest.noise_sd)
    outputs = track_map(worker, tasks, jobs=manifest.jobs, desc='simulate')

    out = Path(manifest.out_dir)
    failures = []
    for (index, scenario, seed), (_, traces) in zip(tasks, outputs):
        if isinstance(traces, str):
            failures.append((scenario.label, traces))
            logger.warning(f'Scenario {scenario.label} failed: {traces}')
            continue
        traces.logged.to_csv(out / 'traces' / f'{traces.name}.logged.csv')
        traces.truth.to_csv(out / 'traces' / f'{traces.name}.truth.csv')
    dump_template(template, out / 'template.json')
    doc = manifest.to_dict()
    doc['seeds'] = [seed for _, _, seed in tasks]
    doc['failures'] = [dict(scenario=s, error=e) for s, e in failures]
    dump_json(doc, out / 'manifest.json')
    print(f'{len(tasks) - len(failures)}/{len(tasks)} scenarios written to '
          f'{out}')
    return 1 if failures else 0


def cmd_induce(args) -> int:
    from .mining import induce_network
    template = _resolve_template(args.template)
    net = induce_network(template, args.tau)
    print(f'{len(net.cells)} cells / {net.edge_count} edges / '
          f'{net.input_count} inputs')
    for line in net.describe():
        print(line)
    if args.dot:
        path = Path(args.dot)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(net.to_dot())
    return 0


def cmd_mine(args) -> int:
    from .mining import mine_trace_sequence
    template, _, config, nominal = _model_setup(args)
    traces = _load_traces(args.traces, template)
    stems = [_trace_stem(p) for p in args.traces]
    results = mine_trace_sequence(
        template, traces, config, nominal, jobs=args.jobs, sources=stems)
    out = Path(args.out)
    failed = 0
    for stem, result in zip(stems, results):
        if isinstance(result, MiningFailure):
            failed += 1
            print(f'{stem}: {result.kind}: {result.message}',
                  file=sys.stderr)
            continue
        dump_json(result.to_dict(), out / f'{stem}.mining.json')
    rows = [[
        r.source, r.final_loss, r.epochs_used,
        'yes' if r.converged else 'no'
    ] for r in results if isinstance(r, MiningResult)]
    print(tabulate(rows, headers=['trace', 'loss', 'epochs', 'converged']))
    return 1 if failed else 0


def _load_results(paths: List[str]) -> List[MiningResult]:
    return [MiningResult.from_dict(load_json(p)) for p in paths]


def cmd_calibrate(args) -> int:
    from .conformance import calibrate, calibrate_residues
    if args.residues is not None:
        try:
            residues = [float(r) for r in args.residues.split(',')]
        except ValueError as e:
            raise ManifestError(f'--residues: {e}') from e
        calibration = calibrate_residues(
            residues, args.alpha, provenance=dict(residues=residues))
    else:
        if not (args.train and args.test and args.reference):
            raise ManifestError(
                'Pass --train, --test and --reference, or --residues.')
        system = load_system(args.system) if args.system else None
        if args.reference in list_systems():
            system = load_system(args.reference)
            omega_ref = system.reference_physical()
        else:
            omega_ref = CoefficientVector.from_dict(load_json(args.reference))
        transform = system.to_physical if system else (lambda omega: omega)
        train, test = _load_results(args.train), _load_results(args.test)
        provenance = dict(
            system=system.name if system else None,
            reference=args.reference,
            train={Path(p).name: file_digest(p)
                   for p in args.train},
            test={Path(p).name: file_digest(p)
                  for p in args.test})
        calibration = calibrate([transform(r.omega) for r in train],
                                [transform(r.omega) for r in test],
                                omega_ref,
                                alpha=args.alpha,
                                provenance=provenance)
    dump_json(calibration.to_dict(), args.out)
    lo, hi = calibration.interval
    print(f'k = {calibration.k}, d = {calibration.d:.6g}, interval = '
          f'[{lo:.6g}, {hi:.6g}]')
    return 0


def _summary_row(source: str, verdict) -> list:
    if isinstance(verdict, MiningFailure):
        return [source, 'failed', '', '', '', '']
    mark = '(D)' if verdict.flagged else ''
    if verdict.low_confidence:
        mark += '?'
    coefficients = ', '.join(f'{n}={v:.4g}' for n, v, _ in verdict.omega)
    safety = ('' if verdict.safety_robustness is None else
              f'{verdict.safety_robustness:.4g}')
    return [
        source, coefficients, f'{verdict.robustness:.4f}',
        f'{verdict.residue:.4f}', safety, mark
    ]


def cmd_detect(args) -> int:
    from .conformance import judge
    from .mining import mine_trace_sequence
    template, system, config, nominal = _model_setup(args)
    calibration = Calibration.from_dict(load_json(args.calibration))
    traces = _load_traces(args.traces, template)
    stems = [_trace_stem(p) for p in args.traces]

    results = mine_trace_sequence(
        template, traces, config, nominal, jobs=args.jobs, sources=stems)
    records, rows, failed = [], [], 0
    for path, trace, stem, result in zip(args.traces, traces, stems,
                                         results):
        if isinstance(result, MiningFailure):
            failed += 1
            records.append(dict(source=stem, error=result.to_dict()))
            rows.append(_summary_row(stem, result))
            continue
        verdict = judge(result, calibration, trace, system)
        record = verdict.to_dict()
        record.update(
            trace=str(path),
            mined=result.omega.to_dict(),
            system=system.name if system else None,
            template=args.template)
        records.append(record)
        rows.append(_summary_row(stem, verdict))
    dump_jsonl(records, args.out)
    print(
        tabulate(
            rows,
            headers=[
                'scenario', 'coefficients', 'robustness', 'residue',
                'safety', 'flag'
            ]))
    flagged = sum(1 for r in records if r.get('flagged'))
    print(f'{flagged}/{len(records)} flagged, interval '
          f'[{calibration.interval[0]:.4f}, {calibration.interval[1]:.4f}]')
    return 1 if failed else 0


def _plot_data(record: dict) -> Optional[Trace]:
    """Observed outputs next to the reference and the mined model driven by
    the logged inputs."""
    path = record.get('trace')
    if not path or not Path(path).is_file() or 'mined' not in record:
        return None
    system = load_system(record['system']) if record.get('system') else None
    if record.get('template'):
        template = load_template(record['template'])
    elif system is not None:
        template = system.template()
    else:
        return None
    from .mining import initial_state
    trace = Trace.from_csv(path)
    x0 = initial_state(template, trace)
    models = {'mined': CoefficientVector.from_dict(record['mined'])}
    if system is not None:
        models['reference'] = system.reference()
    signals = {}
    for name in template.observables:
        signals[name] = trace[name]
    for label, omega in models.items():
        simulated = integrate_reference(template, omega, trace, x0,
                                        trace.tau, trace.steps, t0=trace.t0)
        for name in template.observables:
            signals[f'{name}_{label}'] = simulated[name]
    return Trace(trace.tau, signals, trace.t0, trace.time_unit)


def cmd_report(args) -> int:
    run_dir = Path(args.run_dir)
    verdicts = run_dir / VERDICTS_FILE
    if not verdicts.is_file():
        raise ManifestError(f'{run_dir} holds no {VERDICTS_FILE}.')
    records = [
        json.loads(line) for line in verdicts.read_text().splitlines()
        if line.strip()
    ]
    rows = []
    for record in records:
        source = record.get('source') or '?'
        if 'error' in record:
            rows.append([source, '', '', '', 'failed'])
            continue
        flag = '(D)' if record['flagged'] else ''
        if record.get('low_confidence'):
            flag += '?'
        safety = record.get('safety_robustness')
        rows.append([
            source, f"{record['robustness']:.4f}",
            f"{record['residue']:.4f}",
            '' if safety is None else f'{safety:.4g}', flag
        ])
        plot = _plot_data(record)
        if plot is not None:
            plot.to_csv(run_dir / 'plots' / f'{source}.csv')

    lines = ['# Detection report', '']
    calibration_file = run_dir / 'calibration.json'
    if calibration_file.is_file():
        calibration = Calibration.from_dict(load_json(calibration_file))
        lo, hi = calibration.interval
        lines += [
            f'Accepted residues: [{lo:.4f}, {hi:.4f}] '
            f'(k = {calibration.k}, d = {calibration.d:.4f}, '
            f'alpha = {calibration.alpha:g}).', ''
        ]
    flagged = sum(1 for r in records if r.get('flagged'))
    lines += [f'{flagged} of {len(records)} traces flagged.', '']
    lines.append(
        tabulate(
            rows,
            headers=['scenario', 'robustness', 'residue', 'safety', 'flag'],
            tablefmt='pipe'))
    (run_dir / 'report.md').write_text('\n'.join(lines) + '\n')
    print(f'Report written to {run_dir / "report.md"}')
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    args = parse_args(argv)
    logger = get_logger()
    try:
        return args.func(args)
    except (ValueError, TypeError, KeyError, OSError) as e:
        logger.error(f'{type(e).__name__}: {e}')
        return 2
    except RuntimeError as e:
        logger.error(f'{type(e).__name__}: {e}')
        return 1


if __name__ == '__main__':
    sys.exit(main())
