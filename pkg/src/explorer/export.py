"""JSON and DOT renderings of computations, exploration graphs and verdicts."""

from typing import Any, Dict, List, Sequence, Tuple

import pandas as pd

from src.core.values import render_value
from src.explorer.computations import Computation
from src.explorer.reachability import ExplorationGraph
from src.explorer.verdicts import Counterexample, Verdict
from src.parser.pretty import pretty_node
from src.semantics.labels import Configuration, EventContext, Label


def state_bindings(state) -> Dict[str, str]:
    return {name: render_value(value) for name, value in sorted(state.items())}


def context_bindings(ctx: EventContext) -> Dict[str, str]:
    return {unit: str(event.label) for unit, event in sorted(ctx.items())}


def computation_to_dict(comp: Computation) -> Dict[str, Any]:
    steps = []
    for index, conf in enumerate(comp.configs):
        steps.append({
            'index': index,
            'spec': pretty_node(conf.spec),
            'state': state_bindings(conf.state),
            'context': context_bindings(conf.ctx),
            'label': str(comp.edges[index]) if index < len(comp.edges) else None,
        })
    return {'length': len(comp.configs), 'steps': steps}


def verdict_to_dict(verdict: Verdict, check: str) -> Dict[str, Any]:
    if isinstance(verdict, Counterexample):
        return {
            'check': check,
            'holds': False,
            'clause': verdict.clause,
            'detail': verdict.detail,
            'trace': computation_to_dict(verdict.computation),
        }
    return {
        'check': check,
        'holds': True,
        'depth': verdict.depth,
        'explored': verdict.explored,
    }


def _quote(text: str) -> str:
    return '"' + text.replace('\\', '\\\\').replace('"', '\\"').replace('\n', '\\n') + '"'


def _node_label(conf: Configuration) -> str:
    bindings = ', '.join(f'{k}={v}' for k, v in state_bindings(conf.state).items())
    return bindings or '{}'


def _dot(
    name: str,
    nodes: Sequence[Configuration],
    edges: Sequence[Tuple[Configuration, Label, Configuration]],
    initial: Sequence[Configuration] = (),
) -> str:
    ids: Dict[Configuration, str] = {}
    lines: List[str] = [f'digraph {name} {{', '    node [shape=box, fontname="monospace"];']
    for conf in nodes:
        if conf in ids:
            continue
        ids[conf] = f'n{len(ids)}'
        style = ', peripheries=2' if conf in initial else ''
        lines.append(f'    {ids[conf]} [label={_quote(_node_label(conf))}{style}];')
    for before, label, after in edges:
        if before in ids and after in ids:
            lines.append(f'    {ids[before]} -> {ids[after]} [label={_quote(str(label))}];')
    lines.append('}')
    return '\n'.join(lines) + '\n'


def graph_to_dot(graph: ExplorationGraph) -> str:
    """Explored configurations as nodes, discovered transitions as labeled edges."""
    return _dot('exploration', graph.configurations, graph.edges, graph.initial)


def computation_to_dot(comp: Computation) -> str:
    return _dot('trace', comp.configs, list(comp.transitions()), comp.configs[:1])


def computation_table(comp: Computation) -> pd.DataFrame:
    """One row per configuration: the label that reached it and every variable."""
    rows = []
    for index, conf in enumerate(comp.configs):
        row: Dict[str, Any] = {'step': index, 'label': str(comp.edges[index - 1]) if index else ''}
        row.update(state_bindings(conf.state))
        rows.append(row)
    return pd.DataFrame(rows)
