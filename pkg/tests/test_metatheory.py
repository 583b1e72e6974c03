from src.core.domains import State
from src.explorer import metatheory
from src.explorer.computations import EnvModel, sample_computation
from src.explorer.metatheory import (
    check_compositional,
    conjoin_check,
    decompose,
    serialization_witness,
    simulation_eq,
)
from src.explorer.verdicts import Counterexample, Holds
from src.semantics.labels import EMPTY_CONTEXT


def _sample(spec, subject, start, steps, unit='', seed=0):
    return sample_computation(
        subject, start, EMPTY_CONTEXT, steps, EnvModel.closed_system(), spec.domains, seed=seed, unit=unit
    )


def test_simulation_compares_states_contexts_and_labels(toy_par):
    comp = _sample(toy_par, toy_par.parallel_system, State({'x': 0}), 5)
    assert simulation_eq(comp, comp)
    assert not simulation_eq(comp, comp.prefix(3))


def test_event_system_computations_serialize(toy_evtset):
    system = toy_evtset.parallel_system.system('K')
    start = State({'x': 0, 'y': 0})
    events = toy_evtset.basic_events('K')
    for seed in range(4):
        comp = _sample(toy_evtset, system, start, 6, unit='K', seed=seed)
        witness = serialization_witness(comp, events, 6, toy_evtset.domains)
        assert witness is not None
        assert sum(len(segment) for segment in witness) == len(comp)


def test_serialization_needs_events(toy_evtset):
    system = toy_evtset.parallel_system.system('K')
    comp = _sample(toy_evtset, system, State({'x': 0, 'y': 0}), 6, unit='K')
    assert serialization_witness(comp, [], 6, toy_evtset.domains) is None


def test_decomposition_conjoins(toy_par):
    for seed in range(3):
        comp = _sample(toy_par, toy_par.parallel_system, State({'x': 0}), 6, seed=seed)
        family = decompose(comp)
        assert set(family) == {'A', 'B'}
        assert conjoin_check(comp, family)
        assert not conjoin_check(comp, {'A': family['A']})
        assert not conjoin_check(comp, {'A': family['B'], 'B': family['B']})


def test_parallel_system_is_compositional(toy_par):
    verdict = check_compositional(toy_par.parallel_system, State({'x': 0}), EMPTY_CONTEXT, 4, toy_par.domains)
    assert isinstance(verdict, Holds)
    assert verdict.explored > 1


def test_stale_component_view_is_detected(toy_par, monkeypatch):
    monkeypatch.setattr(metatheory, '_component_env_step', lambda conf, state, ctx: conf)
    verdict = check_compositional(toy_par.parallel_system, State({'x': 0}), EMPTY_CONTEXT, 4, toy_par.domains)
    assert isinstance(verdict, Counterexample)
    assert verdict.clause == 'conjoin'
