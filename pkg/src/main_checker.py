import argparse
import json
import logging
import random
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

CURRENT_DIR = Path(__file__).resolve().parent
PROJECT_ROOT = CURRENT_DIR.parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from src.configs.output_schema import (
    COMPOSITIONALITY_SCHEMA,
    INVARIANT_CHECK_SCHEMA,
    RG_CHECK_SCHEMA,
    RUN_SCHEMA,
)
from src.core.solver import states_satisfying
from src.core.spec import RGCond, SpecFile
from src.core.syntax import Subject
from src.explorer.computations import EnvModel, sample_computation
from src.explorer.export import (
    computation_table,
    computation_to_dict,
    computation_to_dot,
    verdict_to_dict,
)
from src.explorer.metatheory import check_compositional
from src.explorer.reachability import check_invariant_direct
from src.explorer.validity import check_validity
from src.explorer.verdicts import Counterexample, Verdict
from src.parser.picore_parser import parse_file
from src.prover.annotations import AnnotatedNode, annotate_event, annotate_parallel, closed_condition
from src.prover.invariants import check_invariant_via_theorem
from src.prover.report import ProofReport
from src.prover.rules import check_derivation
from src.semantics.labels import EMPTY_CONTEXT
from src.tools.generate_examples import generate_examples
from src.casestudies.arinc import ArincScale
from src.casestudies.stepper import StepperScale
from src.utils.config_loader import load_config, resolve_settings
from src.utils.errors import DomainError, EvalError, PicoreSyntaxError, ResourceLimit, SpecError
from src.utils.storage import save_text, save_to_json

EXIT_HOLDS = 0
EXIT_FAILS = 1
EXIT_INPUT = 2
EXIT_RESOURCE = 3

Settings = Dict[str, Any]


# --- helpers ---------------------------------------------------------------

def _bound_text(settings: Settings) -> str:
    return f"depth {settings['depth']}, atom bound {settings['atom_bound']}, cap {settings['cap']}"


def _print_verdict(title: str, verdict: Verdict) -> None:
    print(f'{title}: {verdict.describe()}')
    if isinstance(verdict, Counterexample):
        print(computation_table(verdict.computation).to_string(index=False))


def _print_report(title: str, report: ProofReport) -> None:
    print(f'{title}:')
    print(report.render(failures_only=True))


def _initial_states(spec: SpecFile, settings: Settings):
    states = states_satisfying(spec.initial, spec.domains, cap=settings['cap'])
    if not states:
        raise SpecError(f'INIT of {spec.name} has no state in the declared domains')
    return states


# --- commands --------------------------------------------------------------

def cmd_parse(args: argparse.Namespace, settings: Settings) -> int:
    try:
        spec = parse_file(args.path)
    except PicoreSyntaxError as exc:
        print(f'Syntax error: {exc}')
        return EXIT_FAILS
    events = spec.basic_events()
    print(
        f'Parsed {spec.name}: {len(spec.variables)} variables, {len(spec.events)} events '
        f'({len(events)} instances), {len(spec.units)} units, {len(spec.invariants)} invariants.'
    )
    return EXIT_HOLDS


def cmd_run(args: argparse.Namespace, settings: Settings) -> int:
    spec = parse_file(args.path)
    rng = random.Random(settings['seed'])
    states = _initial_states(spec, settings)
    state = states[rng.randrange(len(states))]
    comp = sample_computation(
        spec.parallel_system, state, EMPTY_CONTEXT, args.max_steps, EnvModel.closed_system(),
        spec.domains, rng, settings['atom_bound'],
    )
    print(f'Ran {spec.name} with seed {settings["seed"]}: {len(comp.edges)} transitions (max {args.max_steps}).')
    fmt = settings['format']
    if fmt == 'json':
        data = {
            'spec': spec.name,
            'seed': settings['seed'],
            'max_steps': args.max_steps,
            'trace': computation_to_dict(comp),
        }
        if args.output:
            output = Path(args.output)
            save_to_json(data, output.parent, output.name, RUN_SCHEMA)
        else:
            print(json.dumps(data, ensure_ascii=False, indent=4))
    elif fmt == 'dot':
        text = computation_to_dot(comp)
        if args.output:
            output = Path(args.output)
            save_text(text, output.parent, output.name)
        else:
            print(text, end='')
    else:
        table = computation_table(comp).to_string(index=False)
        if args.output:
            output = Path(args.output)
            save_text(table + '\n', output.parent, output.name)
        else:
            print(table)
    return EXIT_HOLDS


def cmd_check_inv(args: argparse.Namespace, settings: Settings) -> int:
    spec = parse_file(args.path)
    invariant = spec.invariant(args.invariant)
    mode = args.mode
    depth = settings['depth']
    result: Dict[str, Any] = {
        'spec': spec.name,
        'invariant': args.invariant,
        'mode': mode,
        'depth': depth,
        'agree': None,
    }
    direct: Optional[Verdict] = None
    theorem: Optional[ProofReport] = None

    if mode in ('direct', 'both'):
        print(f'Exploring {spec.name} directly ({_bound_text(settings)})...')
        direct = check_invariant_direct(
            spec.parallel_system, spec.initial, invariant, spec.domains, depth,
            settings['atom_bound'], settings['cap'], settings['jobs'],
        )
        result['direct'] = verdict_to_dict(direct, 'invariant')
        _print_verdict(f'Direct check of {args.invariant}', direct)

    if mode in ('theorem', 'both'):
        print(f'Checking {args.invariant} through the rely-guarantee derivation...')
        theorem = check_invariant_via_theorem(
            spec, invariant, spec.domains, settings['atom_bound'], settings['cap'], args.invariant,
        )
        result['theorem'] = theorem.to_dict()
        _print_report(f'Proof of {args.invariant} (over the declared finite domains)', theorem)

    holds = all([
        direct is None or direct.holds,
        theorem is None or theorem.accepted,
    ])
    if direct is not None and theorem is not None:
        result['agree'] = direct.holds == theorem.accepted
        if theorem.accepted and not direct.holds:
            print('Verdicts disagree: the derivation is accepted but exploration found a violation. '
                  'This is a toolkit bug; both artifacts are saved.')
        elif not result['agree']:
            print(f'Verdicts disagree: the derivation is rejected but no violation exists up to depth {depth}.')

    needs_artifact = not holds or result['agree'] is False or settings['format'] == 'json'
    if needs_artifact:
        save_to_json(
            result, settings['output_dir'], f'{spec.name}_{args.invariant}_{mode}.json', INVARIANT_CHECK_SCHEMA
        )
    print(f"{'HOLDS' if holds else 'FAILS'}: {args.invariant} of {spec.name} ({_bound_text(settings)})")
    return EXIT_HOLDS if holds else EXIT_FAILS


Target = Tuple[str, AnnotatedNode, Subject, RGCond, str]


def _targets(spec: SpecFile, target: str) -> List[Target]:
    """Subjects to derive: name, annotation, subject, condition and executing unit."""
    found: List[Target] = []
    everything = target.upper() == 'ALL'
    events = spec.basic_events() if everything else [spec.find_event(target)]
    for event in events:
        rg = spec.gamma(event.label)
        found.append((str(event.label), annotate_event(spec, event), event, rg, event.label.unit))
    if everything:
        rg = closed_condition(spec)
        found.append((spec.name, annotate_parallel(spec, rg), spec.parallel_system, rg, ''))
    return found


def cmd_check_rg(args: argparse.Namespace, settings: Settings) -> int:
    spec = parse_file(args.path)
    xcheck = args.xcheck if args.xcheck is not None else settings['xcheck_depth']
    reports: List[Dict[str, Any]] = []
    accepted_all = True
    for subject, annotated, node, rg, unit in _targets(spec, args.target):
        report = check_derivation(annotated, spec.domains, settings['atom_bound'], settings['cap'])
        entry: Dict[str, Any] = {'subject': subject, **report.to_dict(), 'xcheck': None}
        _print_report(f'Derivation of {subject}', report)
        if report.accepted and xcheck > 0:
            verdict = check_validity(
                node, rg, spec.domains, xcheck, settings['atom_bound'], settings['cap'],
                unit=unit, vary_ctx=args.env_varies_ctx, jobs=settings['jobs'],
            )
            entry['xcheck'] = verdict_to_dict(verdict, 'validity')
            _print_verdict(f'Validity of {subject}', verdict)
            if not verdict.holds:
                print(f'Accepted derivation of {subject} is not valid at depth {xcheck}. This is a toolkit bug.')
                accepted_all = False
        accepted_all = accepted_all and report.accepted
        reports.append(entry)

    result = {'spec': spec.name, 'target': args.target, 'reports': reports, 'accepted': accepted_all}
    if not accepted_all or settings['format'] == 'json':
        target = 'ALL' if args.target.upper() == 'ALL' else 'event'
        save_to_json(result, settings['output_dir'], f'{spec.name}_rg_{target}.json', RG_CHECK_SCHEMA)
    print(f"{'ACCEPT' if accepted_all else 'REJECT'}: {len(reports)} derivations of {spec.name}")
    return EXIT_HOLDS if accepted_all else EXIT_FAILS


def cmd_compositionality(args: argparse.Namespace, settings: Settings) -> int:
    spec = parse_file(args.path)
    depth = settings['depth']
    states = _initial_states(spec, settings)
    print(f'Comparing {spec.name} with the conjoins of its units from {len(states)} initial states...')
    verdicts = []
    for state in states:
        verdict = check_compositional(
            spec.parallel_system, state, EMPTY_CONTEXT, depth, spec.domains,
            settings['atom_bound'], cap=settings['cap'],
        )
        verdicts.append(verdict)
        if not verdict.holds:
            _print_verdict('Compositionality', verdict)
            break
    holds = all(v.holds for v in verdicts)
    result = {
        'spec': spec.name,
        'depth': depth,
        'initial_states': len(states),
        'verdicts': [verdict_to_dict(v, 'compositionality') for v in verdicts],
        'holds': holds,
    }
    if not holds or settings['format'] == 'json':
        save_to_json(result, settings['output_dir'], f'{spec.name}_compositionality.json', COMPOSITIONALITY_SCHEMA)
    print(f"{'HOLDS' if holds else 'FAILS'}: compositionality of {spec.name} (depth {depth})")
    return EXIT_HOLDS if holds else EXIT_FAILS


def cmd_examples(args: argparse.Namespace, settings: Settings) -> int:
    stepper = dict(settings['stepper'])
    arinc = dict(settings['arinc'])
    for key, value in (('lo', args.stepper_lo), ('hi', args.stepper_hi), ('max_distance', args.max_distance),
                       ('max_obstacles', args.max_obstacles), ('max_irqs', args.max_irqs)):
        if value is not None:
            stepper[key] = value
    for key in ('cores', 'partitions', 'channels', 'chmax', 'messages'):
        value = getattr(args, key)
        if value is not None:
            arinc[key] = value
    written = generate_examples(args.output_dir, StepperScale(**stepper), ArincScale(**arinc))
    print(f'Generated {len(written)} specifications in {args.output_dir}.')
    return EXIT_HOLDS


# --- argument parsing ------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', default=None, help='YAML configuration (default configs/config.yaml).')
    common.add_argument('--depth', type=int, default=None, help='Transition bound for exploration.')
    common.add_argument('--atom-bound', type=int, default=None, help='Step bound inside one atomic statement.')
    common.add_argument('--cap', type=int, default=None, help='State-space and pair enumeration cap.')
    common.add_argument('--seed', type=int, default=None, help='Seed for randomized runs.')
    common.add_argument('--format', choices=['text', 'json', 'dot'], default=None, help='Output format.')
    common.add_argument('--jobs', type=int, default=None, help='Worker threads for frontier expansion.')
    common.add_argument('--output-dir', default=None, help='Directory receiving JSON artifacts.')
    common.add_argument(
        '--env-varies-ctx', action='store_true',
        help='Environment steps may also change the event context.',
    )
    common.add_argument('--verbose', action='store_true', help='Debug logging.')
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog='main_checker',
        description='Parse, run, explore and prove PiCore event-based specifications.',
    )
    commands = parser.add_subparsers(dest='command', required=True)

    parse = commands.add_parser('parse', parents=[common], help='Parse a specification and report its shape.')
    parse.add_argument('path')
    parse.set_defaults(handler=cmd_parse)

    run = commands.add_parser('run', parents=[common], help='Replay one seeded random closed interleaving.')
    run.add_argument('path')
    run.add_argument('--max-steps', type=int, default=20)
    run.add_argument('--output', default=None, help='Write the trace to this file instead of stdout.')
    run.set_defaults(handler=cmd_run)

    inv = commands.add_parser('check-inv', parents=[common], help='Check a named invariant.')
    inv.add_argument('path')
    inv.add_argument('--invariant', required=True)
    modes = inv.add_mutually_exclusive_group()
    modes.add_argument('--direct', dest='mode', action='store_const', const='direct')
    modes.add_argument('--theorem', dest='mode', action='store_const', const='theorem')
    modes.add_argument('--both', dest='mode', action='store_const', const='both')
    inv.set_defaults(handler=cmd_check_inv, mode='both')

    rg = commands.add_parser('check-rg', parents=[common], help='Check rely-guarantee derivations.')
    rg.add_argument('path')
    rg.add_argument('--target', default='ALL', help='Event instance label such as forward[1]@C, or ALL.')
    rg.add_argument('--xcheck', type=int, default=None, help='Depth of the semantic cross-check (0 = off).')
    rg.set_defaults(handler=cmd_check_rg)

    comp = commands.add_parser('compositionality', parents=[common], help='Compare a system with its conjoins.')
    comp.add_argument('path')
    comp.set_defaults(handler=cmd_compositionality)

    examples = commands.add_parser('examples', help='Bundled case studies.')
    actions = examples.add_subparsers(dest='action', required=True)
    generate = actions.add_parser('generate', parents=[common], help='Write the case studies as .picore files.')
    generate.add_argument('--stepper-lo', type=int, default=None)
    generate.add_argument('--stepper-hi', type=int, default=None)
    generate.add_argument('--max-distance', type=int, default=None)
    generate.add_argument('--max-obstacles', type=int, default=None)
    generate.add_argument('--max-irqs', type=int, default=None)
    generate.add_argument('--cores', type=int, default=None)
    generate.add_argument('--partitions', type=int, default=None)
    generate.add_argument('--channels', type=int, default=None)
    generate.add_argument('--chmax', type=int, default=None)
    generate.add_argument('--messages', type=int, default=None)
    generate.set_defaults(handler=cmd_examples)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
    )
    try:
        config = load_config(args.config)
        overrides = {
            'depth': args.depth,
            'atom_bound': args.atom_bound,
            'cap': args.cap,
            'seed': args.seed,
            'format': args.format,
            'jobs': args.jobs,
            'output_dir': args.output_dir,
        }
        settings = resolve_settings(config, overrides)
        if args.command == 'examples' and args.output_dir is None:
            args.output_dir = 'specs'
        return args.handler(args, settings)
    except FileNotFoundError as exc:
        print(f'Input error: {exc}')
        return EXIT_INPUT
    except ResourceLimit as exc:
        configuration = getattr(exc, 'configuration', None)
        print(f'Resource limit: {exc}')
        if configuration is not None:
            print(f'At configuration: {configuration}')
        return EXIT_RESOURCE
    except (SpecError, DomainError, EvalError, ValueError) as exc:
        print(f'Input error: {exc}')
        return EXIT_INPUT


if __name__ == '__main__':
    sys.exit(main())
