import math

import numpy as np
import pytest

from cnaplan.kinematics import AgentSpec, CnaSpec, propagate_track
from cnaplan.planner import evaluate_sequence
from cnaplan.simulator import Scenario, mission_cost, run_mission
from cnaplan.uncertainty import (
    NoiseParams,
    agent_cost,
    agent_variance_trace,
    cna_variance_trace,
    max_cost,
    posterior_variance,
)

from conftest import make_scenario


def check_mission(sc, m):
    """Invariants every simulated mission must satisfy."""
    step = np.linalg.norm(np.diff(m.cna_path, axis=0), axis=1)
    assert np.all(step <= sc.cna.speed * sc.noise.dt + 1e-9)
    for a in sc.agents:
        tr = m.agent_traces[a.id - 1]
        d = np.diff(tr)
        Z = m.aiding_steps.get(a.id)
        jumps = np.flatnonzero(np.abs(d - sc.noise.nu_w) > 1e-9)
        if Z is None:
            assert jumps.size == 0
        else:
            assert jumps.tolist() == [Z - 1]
            track = propagate_track(a, sc.horizon, sc.noise.dt)
            assert np.linalg.norm(m.cna_path[Z] - track[Z]) <= 1e-6
    if m.surfacing_step is not None:
        S, M = m.surfacing_step, sc.noise.surface_steps
        assert np.all(step[S:S + M] == 0)


def test_empty_sequence(four_agent):
    m = run_mission(four_agent, [])
    assert np.all(m.cna_path == 0)
    expected = np.mean([max_cost(a.nu0, four_agent.noise, 2000) for a in four_agent.agents])
    assert m.cost == pytest.approx(expected, rel=1e-12)
    assert m.cost_J == 2 * m.cost
    assert evaluate_sequence(four_agent, []).cost == pytest.approx(expected, rel=1e-12)


def test_surface_only_matches_empty(four_agent):
    m = run_mission(four_agent, [0])
    assert m.cost == pytest.approx(run_mission(four_agent, []).cost, rel=1e-15)
    M = four_agent.noise.surface_steps
    assert m.surfacing_step == 0
    assert m.cna_trace[M] == four_agent.noise.nu_G
    assert m.cna_trace[M - 1] == pytest.approx(four_agent.noise.nu_G + (M - 1) * four_agent.noise.nu_c)


def test_single_head_on():
    sc = make_scenario([((300.0, 0.0), math.pi, 900.0)])
    m = run_mission(sc, [1])
    Z = math.ceil(300.0 / 1.5)
    assert m.aiding_steps == {1: Z}
    nu_c = sc.noise.nu_G + Z * sc.noise.nu_c
    post = posterior_variance(900.0 + Z, sc.noise.nu_y, nu_c)
    assert m.agent_traces[0][Z] == pytest.approx(post, rel=1e-14)
    assert m.agent_traces[0][Z - 1] == 900.0 + Z - 1
    assert m.cost == pytest.approx(agent_cost(900.0, Z, nu_c, sc.noise, 2000), rel=1e-9)
    check_mission(sc, m)


def test_worked_example_structure(four_agent):
    m = run_mission(four_agent, [2, 0, 1, 3, 4])
    assert m.sequence.feasible
    check_mission(four_agent, m)
    resets = np.flatnonzero(np.diff(m.cna_trace) < 0)
    assert resets.size == 1
    assert resets[0] + 1 == m.surfacing_step + four_agent.noise.surface_steps
    z = [m.aiding_steps[i] for i in (2, 1, 3, 4)]
    assert z == sorted(z)
    assert m.aiding_steps[2] <= m.surfacing_step < m.aiding_steps[1]


def test_traces_match_closed_forms(four_agent):
    m = run_mission(four_agent, [2, 0, 1, 3, 4])
    noise, T = four_agent.noise, four_agent.horizon
    np.testing.assert_array_equal(m.cna_trace, cna_variance_trace(m.surfacing_step, noise, T))
    per_agent = []
    for a in four_agent.agents:
        Z = m.aiding_steps[a.id]
        post = posterior_variance(a.nu0 + Z * noise.nu_w, noise.nu_y, float(m.cna_trace[Z]))
        np.testing.assert_array_equal(m.agent_traces[a.id - 1], agent_variance_trace(a.nu0, Z, post, noise, T))
        per_agent.append(agent_cost(a.nu0, Z, float(m.cna_trace[Z]), noise, T))
    assert m.cost == pytest.approx(np.mean(per_agent), rel=1e-9)
    assert mission_cost(m) == m.cost
    assert evaluate_sequence(four_agent, [2, 0, 1, 3, 4]).cost == pytest.approx(m.cost, rel=1e-9)


def test_identical_agents_cost_equals_single():
    spec = ((200.0, -100.0), 1.0, 750.0)
    one = run_mission(make_scenario([spec]), [1])
    three = run_mission(make_scenario([spec] * 3), [1, 2, 3])
    assert len(set(three.aiding_steps.values())) == 1
    assert three.cost == pytest.approx(one.cost, rel=1e-12)


def test_order_matters(two_agent):
    a = run_mission(two_agent, [1, 2])
    b = run_mission(two_agent, [2, 1])
    assert a.aiding_steps != b.aiding_steps
    assert a.cost != pytest.approx(b.cost, rel=1e-6)
    check_mission(two_agent, a)
    check_mission(two_agent, b)


def test_infeasible_agent(two_agent):
    sc = make_scenario([((300.0, 0.0), math.pi, 900.0), ((0.0, 400.0), 0.0, 200.0)], t_max=150.0)
    m = run_mission(sc, [1, 2])
    assert not m.sequence.feasible
    assert m.sequence.infeasible_index == 0
    assert m.sequence.overrun == 200 - 150


def test_infeasible_surface():
    sc = make_scenario([((300.0, 0.0), math.pi, 900.0)], t_max=230.0)
    m = run_mission(sc, [1, 0])
    assert not m.sequence.feasible
    assert m.sequence.infeasible_index == 1
    assert m.sequence.overrun == 200 + 60 - 230
    assert m.aiding_steps == {1: 200}


def test_cna_holds_after_last_task(two_agent):
    m = run_mission(two_agent, [1])
    Z = m.aiding_steps[1]
    assert np.all(m.cna_path[Z:] == m.cna_path[Z])


def test_rejects_bad_tasks(two_agent):
    with pytest.raises(ValueError, match="duplicate"):
        run_mission(two_agent, [1, 1])
    with pytest.raises(ValueError, match="outside"):
        run_mission(two_agent, [3])


def test_collocated_start_aids_at_step_one():
    sc = make_scenario([((0.0, 0.0), 0.3, 400.0)])
    m = run_mission(sc, [1])
    assert m.aiding_steps == {1: 1}
    check_mission(sc, m)


def test_scenario_validation():
    a = AgentSpec(1, (0, 0), 0.0, 0.5, 1.0)
    cna = CnaSpec((0, 0), 1.0)
    assert Scenario([a], cna).horizon == 2000
    assert Scenario([a], cna).D == 2
    with pytest.raises(ValueError, match="horizon"):
        Scenario([a], cna, horizon=100)
    with pytest.raises(ValueError, match="D="):
        Scenario([a], cna, D=3)
    with pytest.raises(ValueError, match="ids"):
        Scenario([AgentSpec(2, (0, 0), 0.0, 0.5, 1.0)], cna)
    with pytest.raises(ValueError, match="speed"):
        Scenario([AgentSpec(1, (0, 0), 0.0, 1.0, 1.0)], cna)
    sc = Scenario([a], cna, noise=NoiseParams(dt=2.0), t_max=100.0)
    assert sc.horizon == 50
