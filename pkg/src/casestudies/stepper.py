"""Interruptible controller for a stepper motor.

Three units run in parallel: the controller ``C`` serves ``forward`` and
``backward`` system calls, the radar ``R`` reports obstacles and the
programmable interrupt controller ``PIC`` pushes IRQs onto a stack. Every
internal step of a handler is guarded by ``hd stack = <its IRQ>``, so the
handler on top of the stack is the one that runs. The stack bottom holds
``NONE`` so that ``hd stack`` is always defined.
"""

import itertools
import logging
from dataclasses import dataclass
from string import Template
from typing import List

from src.core.expressions import Binary, Expr, Var, negate
from src.core.spec import SpecFile
from src.parser.picore_parser import parse_spec
from src.parser.pretty import expr_text
from src.utils.errors import InvalidScale

log = logging.getLogger(__name__)

IRQ_SOURCES = ('C', 'R')


@dataclass(frozen=True)
class StepperScale:
    lo: int = -4
    hi: int = 4
    max_distance: int = 2
    max_obstacles: int = 2
    max_irqs: int = 2

    def validate(self) -> None:
        if not self.lo <= 0 <= self.hi:
            raise InvalidScale(f'Position range [{self.lo}, {self.hi}] must contain 0')
        if self.max_distance < 0:
            raise InvalidScale(f'Maximum distance must be >= 0, got {self.max_distance}')
        if self.max_obstacles < 0:
            raise InvalidScale(f'Maximum obstacle count must be >= 0, got {self.max_obstacles}')
        if self.max_irqs < 1:
            raise InvalidScale(f'At least one pending IRQ must fit on the stack, got {self.max_irqs}')


def collide(position: Expr, obstacles: Expr) -> Expr:
    """``position`` is occupied by one of the detected obstacles."""
    return Binary('in', position, obstacles)


def stack_values(max_irqs: int) -> List[str]:
    """Every IRQ stack with at most ``max_irqs`` entries above the NONE bottom."""
    stacks = []
    for depth in range(max_irqs + 1):
        for entries in itertools.product(IRQ_SOURCES, repeat=depth):
            stacks.append('[' + ', '.join(entries + ('NONE',)) + ']')
    return stacks


_TEMPLATE = Template("""\
-- Interruptible controller for a stepper motor: controller C, radar R and PIC.
SPEC $name

SYMBOLS C, R, PIC

CONSTANTS
  lo = $lo
  hi = $hi
  max_distance = $max_distance
  max_obstacles = $max_obstacles
  max_irqs = $max_irqs

DOMAINS
  car_pos : {lo..hi}
  i : {0..max_distance}
  pos_aux : {lo..hi}
  obstacle_pos : LIST {lo..hi} MAXLEN $max_obstacles
  obst_pos_aux : LIST {lo..hi} MAXLEN $max_obstacles
  stack : {$stacks}

INIT
  car_pos = 0 AND i = 0 AND pos_aux = 0 AND obstacle_pos = [] AND obst_pos_aux = [] AND stack = [NONE]

EVENTS
  EVENT forward [v] @ C WHEN car_pos + v <= hi THEN
    AWAIT hd stack = C THEN i := 0 END ;;
    {| i = 0 |}
    AWAIT hd stack = C THEN pos_aux := car_pos END ;;
    {| car_pos = pos_aux + i |}
    WHILE i /= v AND NOT (car_pos + 1 IN obstacle_pos) DO
      AWAIT hd stack = C THEN
        IF NOT (car_pos + 1 IN obstacle_pos) THEN car_pos := car_pos + 1 FI
      END ;;
      {| car_pos = pos_aux + i + 1 |}
      AWAIT hd stack = C THEN i := i + 1 END
    OD ;;
    {| car_pos = pos_aux + i AND (i = v OR car_pos + 1 IN obstacle_pos) |}
    AWAIT hd stack = C THEN stack := tl stack END
  END

  EVENT backward [v] @ C WHEN car_pos - v >= lo THEN
    AWAIT hd stack = C THEN i := 0 END ;;
    {| i = 0 |}
    AWAIT hd stack = C THEN pos_aux := car_pos END ;;
    {| car_pos = pos_aux - i |}
    WHILE i /= v AND NOT (car_pos - 1 IN obstacle_pos) DO
      AWAIT hd stack = C THEN
        IF NOT (car_pos - 1 IN obstacle_pos) THEN car_pos := car_pos - 1 FI
      END ;;
      {| car_pos = pos_aux - i - 1 |}
      AWAIT hd stack = C THEN i := i + 1 END
    OD ;;
    {| car_pos = pos_aux - i AND (i = v OR car_pos - 1 IN obstacle_pos) |}
    AWAIT hd stack = C THEN stack := tl stack END
  END

  EVENT obstacle [v] @ R WHEN len obstacle_pos < max_obstacles THEN
    AWAIT hd stack = R THEN obst_pos_aux := obstacle_pos END ;;
    {| obst_pos_aux = obstacle_pos |}
    AWAIT hd stack = R THEN
      IF $placement THEN obstacle_pos := v # obstacle_pos FI
    END ;;
    {| obst_pos_aux SUBSET obstacle_pos |}
    AWAIT hd stack = R THEN stack := tl stack END
  END

  EVENT IRQs [d] @ PIC WHEN len stack <= max_irqs THEN
    ATOM IF hd stack /= d THEN stack := d # stack FI END
  END

SYSTEM
  C : {forward(v: {0..max_distance}), backward(v: {0..max_distance})}
  R : {obstacle(v: {lo..hi})}
  PIC : {IRQs(d: {C, R})}

RGSPECS
  forward :
    PRE true
    RELY (car_pos' = car_pos AND i' = i AND pos_aux' = pos_aux
          AND (hd stack /= C -->
                 (obstacle_pos' = obstacle_pos
                  AND (stack' = tl stack OR stack' = C # stack OR obst_pos_aux' = obstacle_pos))
                 OR (obstacle_pos SUBSET obstacle_pos'
                     AND (car_pos' + 1 IN obstacle_pos) = (car_pos' + 1 IN obstacle_pos')))
          AND (hd stack = C -->
                 obstacle_pos' = obstacle_pos AND stack' = R # stack AND obst_pos_aux' = obst_pos_aux))
         OR Id
    GUAR ((((i' = 0 OR i' = i + 1 OR stack' = tl stack) AND car_pos' = car_pos)
           OR (NOT (car_pos + 1 IN obstacle_pos) AND car_pos' = car_pos + 1))
          AND hd stack = C AND obstacle_pos' = obstacle_pos AND obst_pos_aux' = obst_pos_aux
          AND (stack' = stack OR stack' = tl stack))
         OR Id
    POST car_pos = pos_aux + i AND (i = v OR pos_aux + i + 1 IN obstacle_pos)

  backward :
    PRE true
    RELY (car_pos' = car_pos AND i' = i AND pos_aux' = pos_aux
          AND (hd stack /= C -->
                 (obstacle_pos' = obstacle_pos
                  AND (stack' = tl stack OR stack' = C # stack OR obst_pos_aux' = obstacle_pos))
                 OR (obstacle_pos SUBSET obstacle_pos'
                     AND (car_pos' - 1 IN obstacle_pos) = (car_pos' - 1 IN obstacle_pos')))
          AND (hd stack = C -->
                 obstacle_pos' = obstacle_pos AND stack' = R # stack AND obst_pos_aux' = obst_pos_aux))
         OR Id
    GUAR ((((i' = 0 OR i' = i + 1 OR stack' = tl stack) AND car_pos' = car_pos)
           OR (NOT (car_pos - 1 IN obstacle_pos) AND car_pos' = car_pos - 1))
          AND hd stack = C AND obstacle_pos' = obstacle_pos AND obst_pos_aux' = obst_pos_aux
          AND (stack' = stack OR stack' = tl stack))
         OR Id
    POST car_pos = pos_aux - i AND (i = v OR pos_aux - i - 1 IN obstacle_pos)

  obstacle :
    PRE true
    RELY obstacle_pos' = obstacle_pos AND obst_pos_aux' = obst_pos_aux
    GUAR (FRAME(obstacle_pos, obst_pos_aux, stack) AND hd stack = R
          AND ((obst_pos_aux' = obstacle_pos AND obstacle_pos' = obstacle_pos AND stack' = stack)
               OR (obstacle_pos' = v # obstacle_pos AND v /= car_pos AND v /= car_pos + 1
                   AND v /= car_pos - 1 AND obst_pos_aux' = obst_pos_aux AND stack' = stack)
               OR (stack' = tl stack AND obstacle_pos' = obstacle_pos AND obst_pos_aux' = obst_pos_aux)))
         OR Id
    POST obst_pos_aux SUBSET obstacle_pos

  IRQs :
    PRE true
    RELY stack' = stack OR stack' = tl stack
    GUAR (FRAME(stack) AND hd stack /= d AND stack' = d # stack) OR Id
    POST true

INVARIANTS
  no_collision : $no_collision
""")

# The radar only reports obstacles away from the car and its two neighbours.
_PLACEMENT = 'v /= car_pos AND v /= car_pos + 1 AND v /= car_pos - 1'
# Mutation: an obstacle may appear right under the car.
_MUTATED_PLACEMENT = 'v /= car_pos + 1 AND v /= car_pos - 1'


def render_stepper(scale: StepperScale, mutated: bool = False) -> str:
    """The ``.picore`` source of the controller at ``scale``."""
    scale.validate()
    no_collision = negate(collide(Var('car_pos'), Var('obstacle_pos')))
    return _TEMPLATE.substitute(
        name='stepper_mutated' if mutated else 'stepper',
        lo=scale.lo,
        hi=scale.hi,
        max_distance=scale.max_distance,
        max_obstacles=scale.max_obstacles,
        max_irqs=scale.max_irqs,
        stacks=', '.join(stack_values(scale.max_irqs)),
        placement=_MUTATED_PLACEMENT if mutated else _PLACEMENT,
        no_collision=expr_text(no_collision),
    )


def build_stepper(scale: StepperScale = StepperScale(), mutated: bool = False) -> SpecFile:
    text = render_stepper(scale, mutated)
    spec = parse_spec(text, 'stepper_mutated.picore' if mutated else 'stepper.picore')
    log.info('Built %s at scale %s', spec.name, scale)
    return spec
