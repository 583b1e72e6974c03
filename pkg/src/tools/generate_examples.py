import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

CURRENT_DIR = Path(__file__).resolve().parent
PROJECT_ROOT = CURRENT_DIR.parent.parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from src.casestudies.arinc import ArincScale, render_arinc
from src.casestudies.stepper import StepperScale, render_stepper
from src.parser.picore_parser import parse_spec
from src.utils.config_loader import DEFAULTS
from src.utils.storage import save_text


def stepper_scale(values: Mapping[str, Any]) -> StepperScale:
    return StepperScale(**{key: int(value) for key, value in values.items()})


def arinc_scale(values: Mapping[str, Any]) -> ArincScale:
    return ArincScale(**{key: int(value) for key, value in values.items()})


def generate_examples(
    output_dir: str,
    stepper: Optional[StepperScale] = None,
    arinc: Optional[ArincScale] = None,
) -> List[Path]:
    """Write both case studies and their mutants as ``.picore`` files.

    Every rendered text is parsed back before it is written.
    """
    stepper = stepper or stepper_scale(DEFAULTS['stepper'])
    arinc = arinc or arinc_scale(DEFAULTS['arinc'])
    texts: Dict[str, str] = {
        'stepper.picore': render_stepper(stepper),
        'stepper_mutated.picore': render_stepper(stepper, mutated=True),
        'arinc.picore': render_arinc(arinc),
        'arinc_mutated.picore': render_arinc(arinc, mutated=True),
    }
    written = []
    for filename, text in texts.items():
        parse_spec(text, filename)
        written.append(save_text(text, output_dir, filename))
    return written


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(description='Generate the bundled case-study specifications.')
    parser.add_argument('--output-dir', default='specs', help='Directory receiving the .picore files.')
    parser.add_argument('--stepper-lo', type=int, default=DEFAULTS['stepper']['lo'])
    parser.add_argument('--stepper-hi', type=int, default=DEFAULTS['stepper']['hi'])
    parser.add_argument('--max-distance', type=int, default=DEFAULTS['stepper']['max_distance'])
    parser.add_argument('--max-obstacles', type=int, default=DEFAULTS['stepper']['max_obstacles'])
    parser.add_argument('--max-irqs', type=int, default=DEFAULTS['stepper']['max_irqs'])
    parser.add_argument('--cores', type=int, default=DEFAULTS['arinc']['cores'])
    parser.add_argument('--partitions', type=int, default=DEFAULTS['arinc']['partitions'])
    parser.add_argument('--channels', type=int, default=DEFAULTS['arinc']['channels'])
    parser.add_argument('--chmax', type=int, default=DEFAULTS['arinc']['chmax'])
    parser.add_argument('--messages', type=int, default=DEFAULTS['arinc']['messages'])
    return parser.parse_args(argv)


def main() -> None:
    args = parse_args()
    stepper = StepperScale(args.stepper_lo, args.stepper_hi, args.max_distance, args.max_obstacles, args.max_irqs)
    arinc = ArincScale(args.cores, args.partitions, args.channels, args.chmax, args.messages)
    print(f'Generating examples into {args.output_dir}...')
    written = generate_examples(args.output_dir, stepper, arinc)
    print(f'Generated {len(written)} specifications.')


if __name__ == '__main__':
    main()
