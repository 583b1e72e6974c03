"""Proof reports: one node per rule application, one row per premise."""

from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Tuple

import pandas as pd

from src.core.spec import RGCond
from src.parser.pretty import rgcond_text
from src.prover.obligations import Witness, witness_text


@dataclass
class Premise:
    group: int
    text: str
    passed: bool
    witness: Optional[Witness] = None
    key: str = ''

    @property
    def id(self) -> str:
        return f'{self.group}[{self.key}]' if self.key else str(self.group)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            'id': self.id,
            'group': self.group,
            'text': self.text,
            'pass': self.passed,
        }
        if self.witness is not None:
            data['witness'] = witness_text(self.witness)
        return data


@dataclass
class ProofNode:
    node_id: str
    rule: str
    subject: str
    rg: Optional[RGCond] = None
    premises: List[Premise] = field(default_factory=list)
    children: List['ProofNode'] = field(default_factory=list)

    @property
    def accepted(self) -> bool:
        return all(p.passed for p in self.premises) and all(c.accepted for c in self.children)

    @property
    def groups(self) -> List[int]:
        return sorted({p.group for p in self.premises})

    def premise_group(self, group: int) -> List[Premise]:
        return [p for p in self.premises if p.group == group]

    def walk(self) -> Iterator['ProofNode']:
        yield self
        for child in self.children:
            yield from child.walk()

    def to_dict(self) -> Dict[str, Any]:
        return {
            'id': self.node_id,
            'rule': self.rule,
            'subject': self.subject,
            'condition': rgcond_text(self.rg) if self.rg is not None else None,
            'accepted': self.accepted,
            'premises': [p.to_dict() for p in self.premises],
            'children': [c.to_dict() for c in self.children],
        }


@dataclass
class ProofReport:
    root: ProofNode
    obligations: int = 0

    @property
    def accepted(self) -> bool:
        return self.root.accepted

    def nodes(self, rule: Optional[str] = None) -> List[ProofNode]:
        return [n for n in self.root.walk() if rule is None or n.rule == rule]

    def failures(self) -> List[Tuple[ProofNode, Premise]]:
        """Failed premises that are not just a failed sub-derivation."""
        found = []
        for node in self.root.walk():
            for premise in node.premises:
                if not premise.passed and not premise.text.startswith('derivation'):
                    found.append((node, premise))
        return found

    def to_dict(self) -> Dict[str, Any]:
        return {
            'accepted': self.accepted,
            'obligations': self.obligations,
            'root': self.root.to_dict(),
        }

    def table(self) -> pd.DataFrame:
        rows = [
            {
                'node': node.node_id,
                'rule': node.rule,
                'subject': node.subject,
                'premise': premise.id,
                'text': premise.text,
                'pass': premise.passed,
                'witness': witness_text(premise.witness) or '',
            }
            for node in self.root.walk()
            for premise in node.premises
        ]
        columns = ['node', 'rule', 'subject', 'premise', 'text', 'pass', 'witness']
        return pd.DataFrame(rows, columns=columns)

    def render(self, failures_only: bool = False) -> str:
        verdict = 'ACCEPT' if self.accepted else 'REJECT'
        table = self.table()
        if failures_only and not table.empty:
            table = table[~table['pass'].astype(bool)]
        lines = [f'{verdict}: {self.root.rule} on {self.root.subject} ({self.obligations} obligations)']
        if not table.empty:
            lines.append(table.to_string(index=False))
        return '\n'.join(lines)
