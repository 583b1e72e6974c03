import jsonschema
import pytest

from src.configs import output_schema
from src.utils.config_loader import DEFAULTS, load_config, resolve_settings


def test_bundled_config_matches_the_defaults():
    config = load_config()
    assert resolve_settings(config, {}) == resolve_settings({}, {})
    assert config['stepper'] == DEFAULTS['stepper']
    assert config['arinc'] == DEFAULTS['arinc']


def test_missing_config(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config(str(tmp_path / 'absent.yaml'))


def test_config_must_be_a_mapping(tmp_path):
    path = tmp_path / 'list.yaml'
    path.write_text('- depth\n- 3\n', encoding='utf-8')
    with pytest.raises(ValueError):
        load_config(str(path))


def test_empty_config_is_allowed(tmp_path):
    path = tmp_path / 'empty.yaml'
    path.write_text('', encoding='utf-8')
    assert load_config(str(path)) == {}


def test_flags_win_over_yaml():
    settings = resolve_settings({'depth': 4, 'seed': 9}, {'depth': 12, 'seed': None})
    assert settings['depth'] == 12
    assert settings['seed'] == 9
    assert settings['cap'] == DEFAULTS['cap']


def test_scale_sections_merge_per_key():
    settings = resolve_settings({'arinc': {'cores': 1}}, {})
    assert settings['arinc'] == {**DEFAULTS['arinc'], 'cores': 1}
    assert DEFAULTS['arinc']['cores'] == 2


@pytest.mark.parametrize('overrides', [
    {'depth': -1},
    {'atom_bound': 0},
    {'cap': 0},
    {'jobs': 0},
    {'format': 'xml'},
    {'depth': 'deep'},
    {'stepper': 3},
])
def test_invalid_settings(overrides):
    with pytest.raises(ValueError):
        resolve_settings({}, overrides)


@pytest.mark.parametrize('name', [
    'TRACE_SCHEMA',
    'RUN_SCHEMA',
    'VERDICT_SCHEMA',
    'PROOF_REPORT_SCHEMA',
    'INVARIANT_CHECK_SCHEMA',
    'RG_CHECK_SCHEMA',
    'COMPOSITIONALITY_SCHEMA',
])
def test_shipped_schemas_are_well_formed(name):
    jsonschema.Draft202012Validator.check_schema(getattr(output_schema, name))
