"""JSON Schemas for every artifact the checker writes."""

from __future__ import annotations

from typing import Any, Dict, Iterable, Mapping

Schema = Dict[str, Any]


def _object(properties: Mapping[str, Schema], required: Iterable[str] = ()) -> Schema:
    return {
        'type': 'object',
        'properties': dict(properties),
        'required': list(required),
    }


_STRING_MAP: Schema = {'type': 'object', 'additionalProperties': {'type': 'string'}}

TRACE_STEP_SCHEMA = _object(
    {
        'index': {'type': 'integer', 'minimum': 0},
        'spec': {'type': 'string'},
        'state': _STRING_MAP,
        'context': _STRING_MAP,
        'label': {'type': ['string', 'null']},
    },
    required=('index', 'spec', 'state', 'context', 'label'),
)

TRACE_SCHEMA = _object(
    {
        'length': {'type': 'integer', 'minimum': 1},
        'steps': {'type': 'array', 'items': TRACE_STEP_SCHEMA, 'minItems': 1},
    },
    required=('length', 'steps'),
)

RUN_SCHEMA = _object(
    {
        'spec': {'type': 'string'},
        'seed': {'type': 'integer'},
        'max_steps': {'type': 'integer', 'minimum': 0},
        'trace': TRACE_SCHEMA,
    },
    required=('spec', 'seed', 'max_steps', 'trace'),
)

VERDICT_SCHEMA: Schema = {
    'oneOf': [
        _object(
            {
                'check': {'type': 'string'},
                'holds': {'const': True},
                'depth': {'type': 'integer', 'minimum': 0},
                'explored': {'type': 'integer', 'minimum': 0},
            },
            required=('check', 'holds', 'depth', 'explored'),
        ),
        _object(
            {
                'check': {'type': 'string'},
                'holds': {'const': False},
                'clause': {'type': 'string'},
                'detail': {'type': 'string'},
                'trace': TRACE_SCHEMA,
            },
            required=('check', 'holds', 'clause', 'trace'),
        ),
    ]
}

PREMISE_SCHEMA = _object(
    {
        'id': {'type': 'string'},
        'group': {'type': 'integer', 'minimum': 0},
        'text': {'type': 'string'},
        'pass': {'type': 'boolean'},
        'witness': {'type': ['string', 'null']},
    },
    required=('id', 'group', 'text', 'pass'),
)

PROOF_NODE_SCHEMA = _object(
    {
        'id': {'type': 'string'},
        'rule': {'type': 'string'},
        'subject': {'type': 'string'},
        'condition': {'type': ['string', 'null']},
        'accepted': {'type': 'boolean'},
        'premises': {'type': 'array', 'items': PREMISE_SCHEMA},
        'children': {'type': 'array', 'items': {'$ref': '#/$defs/node'}},
    },
    required=('id', 'rule', 'subject', 'accepted', 'premises', 'children'),
)

_REPORT_FIELDS: Dict[str, Schema] = {
    'accepted': {'type': 'boolean'},
    'obligations': {'type': 'integer', 'minimum': 0},
    'root': {'$ref': '#/$defs/node'},
}


def _with_nodes(schema: Schema) -> Schema:
    """Make proof nodes referable as ``#/$defs/node`` inside ``schema``."""
    return {'$defs': {'node': PROOF_NODE_SCHEMA}, **schema}


PROOF_REPORT_SCHEMA = _with_nodes(_object(_REPORT_FIELDS, required=('accepted', 'obligations', 'root')))

INVARIANT_CHECK_SCHEMA = _with_nodes(_object(
    {
        'spec': {'type': 'string'},
        'invariant': {'type': 'string'},
        'mode': {'enum': ['direct', 'theorem', 'both']},
        'depth': {'type': 'integer', 'minimum': 0},
        'direct': VERDICT_SCHEMA,
        'theorem': _object(_REPORT_FIELDS, required=('accepted', 'obligations', 'root')),
        'agree': {'type': ['boolean', 'null']},
    },
    required=('spec', 'invariant', 'mode', 'depth'),
))

RG_CHECK_SCHEMA = _with_nodes(_object(
    {
        'spec': {'type': 'string'},
        'target': {'type': 'string'},
        'reports': {
            'type': 'array',
            'items': _object(
                {
                    'subject': {'type': 'string'},
                    **_REPORT_FIELDS,
                    'xcheck': {'oneOf': [VERDICT_SCHEMA, {'type': 'null'}]},
                },
                required=('subject', 'accepted', 'obligations', 'root'),
            ),
        },
        'accepted': {'type': 'boolean'},
    },
    required=('spec', 'target', 'reports', 'accepted'),
))

COMPOSITIONALITY_SCHEMA = _object(
    {
        'spec': {'type': 'string'},
        'depth': {'type': 'integer', 'minimum': 0},
        'initial_states': {'type': 'integer', 'minimum': 0},
        'verdicts': {'type': 'array', 'items': VERDICT_SCHEMA},
        'holds': {'type': 'boolean'},
    },
    required=('spec', 'depth', 'verdicts', 'holds'),
)
