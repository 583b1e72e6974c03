import sys
from pathlib import Path

import pytest

PROJECT_ROOT = Path(__file__).resolve().parent.parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from src.core.domains import DomainDecl
from src.core.spec import RGCond
from src.parser.picore_parser import parse_expression, parse_file

SPECS_DIR = PROJECT_ROOT / 'specs'


@pytest.fixture
def specs_dir() -> Path:
    return SPECS_DIR


@pytest.fixture(scope='session')
def toy_par():
    return parse_file(SPECS_DIR / 'toy_par.picore')


@pytest.fixture(scope='session')
def toy_evtset():
    return parse_file(SPECS_DIR / 'toy_evtset.picore')


@pytest.fixture
def xy_domains() -> DomainDecl:
    """Two variables over {0, 1, 2}."""
    return DomainDecl({'x': (0, 1, 2), 'y': (0, 1, 2)})


@pytest.fixture
def xy_rg():
    """Build an RGCond over x and y from four expression strings."""

    def build(pre: str, rely: str, guar: str, post: str) -> RGCond:
        parts = (parse_expression(text, variables=('x', 'y')) for text in (pre, rely, guar, post))
        return RGCond(*parts)

    return build
