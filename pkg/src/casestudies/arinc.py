"""Multicore partitioned kernel with partition scheduling and queuing channels.

Each core ``K<i>`` runs one scheduler ``S<i>``. A core first runs
``Core_Init`` once, which readies every partition of its scheduler, and
then repeatedly serves ``Schedule``, ``Send_QMsg`` and ``Recv_Que_Msg``.
Channels connect a source port on one partition to a destination port on
another; a channel holds at most ``chmax`` messages.
"""

import logging
from dataclasses import dataclass
from string import Template
from typing import Dict, List, Mapping, Optional, Sequence

from src.core.spec import SpecFile
from src.parser.picore_parser import parse_spec
from src.utils.errors import InconsistentConfig, InvalidScale

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ArincScale:
    cores: int = 2
    partitions: int = 2
    channels: int = 1
    chmax: int = 1
    messages: int = 1

    def validate(self) -> None:
        if self.cores < 1:
            raise InvalidScale(f'At least one core is needed, got {self.cores}')
        if self.partitions < 1:
            raise InvalidScale(f'At least one partition is needed, got {self.partitions}')
        if self.channels < 0:
            raise InvalidScale(f'Channel count must be >= 0, got {self.channels}')
        if self.chmax < 1:
            raise InvalidScale(f'Channel capacity must be >= 1, got {self.chmax}')
        if self.messages < 1:
            raise InvalidScale(f'At least one message value is needed, got {self.messages}')

    @property
    def core_names(self) -> List[str]:
        return [f'K{i}' for i in range(self.cores)]

    @property
    def scheduler_names(self) -> List[str]:
        return [f'S{i}' for i in range(self.cores)]

    @property
    def partition_names(self) -> List[str]:
        return [f'P{i}' for i in range(self.partitions)]

    @property
    def channel_names(self) -> List[str]:
        return [f'CH{i}' for i in range(self.channels)]

    @property
    def message_names(self) -> List[str]:
        return [f'M{i}' for i in range(self.messages)]


@dataclass(frozen=True)
class ArincConfig:
    """Static kernel configuration.

    ``c2s`` maps cores to schedulers, ``p2s`` partitions to schedulers,
    ``p2p`` ports to their owning partition, ``chsrc``/``chdest`` channels
    to their source and destination ports and ``chmax`` channels to their
    capacity.
    """

    c2s: Mapping[str, str]
    p2s: Mapping[str, str]
    p2p: Mapping[str, str]
    chsrc: Mapping[str, str]
    chdest: Mapping[str, str]
    chmax: Mapping[str, int]

    @classmethod
    def default(cls, scale: ArincScale) -> 'ArincConfig':
        """Round-robin layout: channel c goes from P(c) to P(c+1), modulo the partitions."""
        scale.validate()
        parts = scale.partition_names
        chans = scale.channel_names
        p2p: Dict[str, str] = {}
        chsrc: Dict[str, str] = {}
        chdest: Dict[str, str] = {}
        for index, channel in enumerate(chans):
            src, dest = f'QS{index}', f'QD{index}'
            p2p[src] = parts[index % len(parts)]
            p2p[dest] = parts[(index + 1) % len(parts)]
            chsrc[channel] = src
            chdest[channel] = dest
        return cls(
            c2s=dict(zip(scale.core_names, scale.scheduler_names)),
            p2s={p: f'S{index % scale.cores}' for index, p in enumerate(parts)},
            p2p=p2p,
            chsrc=chsrc,
            chdest=chdest,
            chmax={c: scale.chmax for c in chans},
        )

    def validate(self, scale: ArincScale) -> None:
        cores, scheds = scale.core_names, scale.scheduler_names
        if sorted(self.c2s) != sorted(cores) or sorted(self.c2s.values()) != sorted(scheds):
            raise InconsistentConfig('c2s must map every core to a distinct scheduler')
        if sorted(self.p2s) != sorted(scale.partition_names):
            raise InconsistentConfig('p2s must assign every partition to a scheduler')
        unknown = sorted(set(self.p2s.values()) - set(scheds))
        if unknown:
            raise InconsistentConfig(f'p2s names unknown schedulers: {", ".join(unknown)}')
        for table in ('chsrc', 'chdest', 'chmax'):
            if sorted(getattr(self, table)) != sorted(scale.channel_names):
                raise InconsistentConfig(f'{table} must cover every channel exactly once')
        ports = list(self.chsrc.values()) + list(self.chdest.values())
        if len(set(ports)) != len(ports):
            raise InconsistentConfig('A port is attached to more than one channel end')
        missing = sorted(set(ports) - set(self.p2p))
        if missing:
            raise InconsistentConfig(f'Ports without an owning partition: {", ".join(missing)}')
        strays = sorted(set(self.p2p.values()) - set(scale.partition_names))
        if strays:
            raise InconsistentConfig(f'p2p names unknown partitions: {", ".join(strays)}')
        small = sorted(c for c, size in self.chmax.items() if size < 1)
        if small:
            raise InconsistentConfig(f'Channels with capacity below 1: {", ".join(small)}')


def _set(items: Sequence[str]) -> str:
    return '{' + ', '.join(items) + '}'


def _map(pairs: Mapping[str, object]) -> str:
    if not pairs:
        return '{}'
    return '{' + ', '.join(f'{key} |-> {value}' for key, value in sorted(pairs.items())) + '}'


def _uniform(keys: Sequence[str], value: str) -> str:
    return ' AND '.join(f'{key} = {value}' for key in keys)


_HEADER = Template("""\
-- Multicore partitioned kernel: $cores cores, $partitions partitions, $channels channels.
SPEC $name

SYMBOLS $symbols

CONSTANTS
  c2s = $c2s
  p2s = $p2s
  p2p = $p2p
  chsrc = $chsrc
  chdest = $chdest
  chmax = $chmax
  srcch = $srcch
  dstch = $dstch

DOMAINS
  cur : MAP $scheds TO OPTION $parts
  partst : MAP $parts TO {IDLE, READY, RUN}
  qbuf : MAP $chans_dom TO LIST $msgs MAXLEN $maxchmax
  qbufsize : MAP $chans_dom TO {0..$maxchmax}

INIT
  cur = $cur_init AND partst = $partst_init AND qbuf = $qbuf_init AND qbufsize = $qbufsize_init

EVENTS
  EVENT Core_Init @ k THEN
    NONDT FRAME(partst) AND FORALL p IN $parts . (
      (p2s[p] = c2s[k] --> partst'[p] = READY) AND (p2s[p] /= c2s[k] --> partst'[p] = partst[p]))
  END

  EVENT Schedule [p] @ k WHEN p2s[p] = c2s[k] AND partst[p] /= IDLE THEN
    IF cur[c2s[k]] /= NONE THEN
      ATOM
        partst := partst[the cur[c2s[k]] := READY] ;;
        cur := cur[c2s[k] := NONE]
      END
    FI ;;
    {| cur[c2s[k]] = NONE |}
    ATOM
      cur := cur[c2s[k] := SOME p] ;;
      partst := partst$run_update
    END
  END
$channel_events
SYSTEM
$system
RGSPECS
  Core_Init :
    PRE cur[c2s[k]] = NONE
    RELY $rely_sched
    GUAR (cur[c2s[k]] = NONE AND FRAME(partst) AND FORALL p IN $parts . (
            (p2s[p] = c2s[k] --> partst'[p] = READY) AND (p2s[p] /= c2s[k] --> partst'[p] = partst[p])))
         OR Id
    POST FORALL p IN $parts . (p2s[p] = c2s[k] --> partst[p] /= IDLE)

  Schedule :
    PRE true
    RELY $rely_sched
    GUAR (FRAME(cur, partst) AND FORALL s IN $scheds . (s /= c2s[k] --> cur'[s] = cur[s])
          AND ((cur[c2s[k]] /= NONE AND cur'[c2s[k]] = NONE
                AND partst' = partst[the cur[c2s[k]] := READY])
               OR (cur'[c2s[k]] = SOME p AND partst' = partst$run_update AND p2s[p] = c2s[k])))
         OR Id
    POST cur[c2s[k]] = SOME p
$channel_rgspecs
INVARIANTS
  inv1 : $inv1
  inv2 : $inv2
  inv3 : $inv3
  inv : $inv1 AND $inv2 AND $inv3
""")

_CHANNEL_EVENTS = """
  EVENT Send_QMsg [p, m] @ k
    WHEN (EXISTS c IN $chans . (chsrc[c] = p)) AND cur[c2s[k]] /= NONE AND p2p[p] = the cur[c2s[k]] THEN
    AWAIT qbufsize[srcch[p]] < chmax[srcch[p]] THEN
      qbuf := qbuf[srcch[p] := qbuf[srcch[p]] @ [m]] ;;
      qbufsize := qbufsize[srcch[p] := qbufsize[srcch[p]] + 1]
    END
  END

  EVENT Recv_Que_Msg [p] @ k
    WHEN (EXISTS c IN $chans . (chdest[c] = p)) AND cur[c2s[k]] /= NONE AND p2p[p] = the cur[c2s[k]] THEN
    AWAIT qbufsize[dstch[p]] > 0 THEN
      qbuf := qbuf[dstch[p] := tl qbuf[dstch[p]]] ;;
      qbufsize := qbufsize[dstch[p] := qbufsize[dstch[p]] - 1]
    END
  END
"""

# The Recv_Que_Msg condition is the dual of the Send_QMsg one.
_CHANNEL_RGSPECS = """
  Send_QMsg :
    PRE true
    RELY cur'[c2s[k]] = cur[c2s[k]]
    GUAR cur' = cur AND partst' = partst
         AND (qbufsize[srcch[p]] = len qbuf[srcch[p]] --> qbufsize'[srcch[p]] = len qbuf'[srcch[p]])
         AND FORALL c IN $chans . (c /= srcch[p] --> qbuf'[c] = qbuf[c])
         AND FORALL c IN $chans . (c /= srcch[p] --> qbufsize'[c] = qbufsize[c])
    POST true

  Recv_Que_Msg :
    PRE true
    RELY cur'[c2s[k]] = cur[c2s[k]]
    GUAR cur' = cur AND partst' = partst
         AND (qbufsize[dstch[p]] = len qbuf[dstch[p]] --> qbufsize'[dstch[p]] = len qbuf'[dstch[p]])
         AND FORALL c IN $chans . (c /= dstch[p] --> qbuf'[c] = qbuf[c])
         AND FORALL c IN $chans . (c /= dstch[p] --> qbufsize'[c] = qbufsize[c])
    POST true
"""


def _system(scale: ArincScale, config: ArincConfig) -> str:
    parts = _set(scale.partition_names)
    refs = [f'Schedule(p: {parts})']
    if scale.channels:
        sources = _set(sorted(config.chsrc.values()))
        dests = _set(sorted(config.chdest.values()))
        refs.append(f'Send_QMsg(p: {sources}, m: {_set(scale.message_names)})')
        refs.append(f'Recv_Que_Msg(p: {dests})')
    body = ', '.join(refs)
    return ''.join(f'  {core} : Core_Init ; {{{body}}}\n' for core in scale.core_names)


def render_arinc(scale: ArincScale, config: Optional[ArincConfig] = None, mutated: bool = False) -> str:
    """The ``.picore`` source of the kernel; ``config`` defaults to :meth:`ArincConfig.default`."""
    scale.validate()
    config = config if config is not None else ArincConfig.default(scale)
    config.validate(scale)

    scheds = _set(scale.scheduler_names)
    parts = _set(scale.partition_names)
    chans = _set(scale.channel_names)
    ports = sorted(config.p2p)
    symbols = (
        scale.core_names + scale.scheduler_names + scale.partition_names + scale.channel_names
        + ports + scale.message_names + ['IDLE', 'READY', 'RUN']
    )
    maxchmax = max(config.chmax.values(), default=1)
    empty_lists = {c: '[]' for c in scale.channel_names}
    zeros = {c: 0 for c in scale.channel_names}

    inv1 = f'FORALL s IN {scheds} . (FORALL p IN {parts} . (cur[s] = SOME p --> s = p2s[p]))'
    inv2 = (
        f'FORALL s IN {scheds} . (FORALL p IN {parts} . '
        f'((p2s[p] = s AND cur[s] = SOME p) --> partst[p] = RUN))'
    )
    inv3 = f'FORALL c IN {chans} . (qbufsize[c] = len qbuf[c])'

    channel_events = Template(_CHANNEL_EVENTS).substitute(chans=chans) if scale.channels else ''
    channel_rgspecs = Template(_CHANNEL_RGSPECS).substitute(chans=chans) if scale.channels else ''
    rely_sched = (
        f'cur\'[c2s[k]] = cur[c2s[k]] AND FORALL p IN {parts} . '
        f'(partst[p] /= IDLE --> partst\'[p] /= IDLE)'
    )
    return _HEADER.substitute(
        name='arinc_mutated' if mutated else 'arinc',
        cores=scale.cores,
        partitions=scale.partitions,
        channels=scale.channels,
        symbols=', '.join(symbols),
        c2s=_map(config.c2s),
        p2s=_map(config.p2s),
        p2p=_map(config.p2p),
        chsrc=_map(config.chsrc),
        chdest=_map(config.chdest),
        chmax=_map(config.chmax),
        srcch=_map({port: channel for channel, port in config.chsrc.items()}),
        dstch=_map({port: channel for channel, port in config.chdest.items()}),
        scheds=scheds,
        parts=parts,
        chans_dom=chans,
        msgs=_set(scale.message_names),
        maxchmax=maxchmax,
        cur_init=_map({s: 'NONE' for s in scale.scheduler_names}),
        partst_init=_map({p: 'IDLE' for p in scale.partition_names}),
        qbuf_init=_map(empty_lists),
        qbufsize_init=_map(zeros),
        # Mutation: the newly scheduled partition is never marked RUN.
        run_update='' if mutated else '[p := RUN]',
        channel_events=channel_events,
        system=_system(scale, config),
        rely_sched=rely_sched,
        channel_rgspecs=channel_rgspecs,
        inv1=inv1,
        inv2=inv2,
        inv3=inv3,
    )


def build_arinc(
    scale: ArincScale = ArincScale(),
    config: Optional[ArincConfig] = None,
    mutated: bool = False,
) -> SpecFile:
    text = render_arinc(scale, config, mutated)
    spec = parse_spec(text, 'arinc_mutated.picore' if mutated else 'arinc.picore')
    log.info('Built %s with %d cores and %d partitions', spec.name, scale.cores, scale.partitions)
    return spec
