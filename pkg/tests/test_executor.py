"""Execution state machine: gates, postconditions, event sourcing."""

import pytest

from skillchain import executor as ex
from skillchain.skill_kb import (
    ObjectState,
    OrientationKind,
    OrientationPredicate,
    PositionKind,
    PositionPredicate,
    RefKind,
    SizeKind,
    StateReference,
)

from conftest import DRYWALL_CHAIN


def make_plan(lib, task, tokens=None, approved="boss"):
    plan = ex.build_plan(lib, task, tokens or DRYWALL_CHAIN, task_label="drywall installation")
    return ex.approve(plan, approved) if approved else plan


def drive_to_completion(session, effects=None, supervisor="boss"):
    guard = 0
    while session.status in (ex.Status.RUNNING, ex.Status.AWAITING_HUMAN):
        if session.status is ex.Status.AWAITING_HUMAN:
            ex.confirm_gate(session, supervisor, effects)
        else:
            ex.advance(session, effects)
        guard += 1
        assert guard < 200, "session did not terminate"
    return session


# ---------------------------------------------------------------------------
# start
# ---------------------------------------------------------------------------


def test_start_requires_approval(drywall_lib, drywall_task):
    plan = make_plan(drywall_lib, drywall_task, approved=None)
    with pytest.raises(ex.UnapprovedPlan):
        ex.start(plan, ex.initial_world_from_task(drywall_task))


def test_start_rejects_discontinuous(drywall_lib, drywall_task):
    with pytest.raises(ex.DiscontinuousPlan) as exc_info:
        make_plan(drywall_lib, drywall_task, tokens=["cut", "prepare"])
    assert exc_info.value.first_break == 1


def test_start_opens_running_at_zero(drywall_lib, drywall_task):
    session = ex.start(make_plan(drywall_lib, drywall_task), ex.initial_world_from_task(drywall_task))
    assert session.status is ex.Status.RUNNING
    assert session.cursor == 0
    assert session.events[0].kind is ex.EventKind.STEP_STARTED


# ---------------------------------------------------------------------------
# full drywall run
# ---------------------------------------------------------------------------


def test_drywall_run_reaches_target(drywall_lib, drywall_task):
    initial = ex.initial_world_from_task(drywall_task)
    session = ex.start(make_plan(drywall_lib, drywall_task), initial)
    drive_to_completion(session)
    assert session.status is ex.Status.COMPLETED
    target = drywall_task.targets[0].center
    assert session.world.object_poses["panel"] == pytest.approx(target)
    assert session.world.object_sizes["panel"][:2] == (1.1, 2.2)
    assert session.world.gripper_holding is None
    assert "panel" in session.world.fastened


def test_completed_run_executed_every_step_once(drywall_lib, drywall_task):
    session = ex.start(
        make_plan(drywall_lib, drywall_task), ex.initial_world_from_task(drywall_task)
    )
    drive_to_completion(session)
    completed = [
        e.payload["skill_id"] for e in session.events if e.kind is ex.EventKind.STEP_COMPLETED
    ]
    assert completed == DRYWALL_CHAIN


def test_tool_gates_in_drywall_run(drywall_lib, drywall_task):
    session = ex.start(
        make_plan(drywall_lib, drywall_task), ex.initial_world_from_task(drywall_task)
    )
    drive_to_completion(session)
    tool_events = [e for e in session.events if e.kind is ex.EventKind.TOOL_CHANGE_REQUESTED]
    # knife for the cut, gripper back for the install
    assert [e.payload["tool"] for e in tool_events] == ["knife", "gripper"]
    assert "End-Effector" in tool_events[0].payload["message"]


def test_nail_gate_cadence(drywall_lib, drywall_task):
    session = ex.start(
        make_plan(drywall_lib, drywall_task), ex.initial_world_from_task(drywall_task)
    )
    # run until the nail gate opens
    while not (
        session.status is ex.Status.AWAITING_HUMAN and session.gate.kind is ex.GateKind.NAIL
    ):
        if session.status is ex.Status.AWAITING_HUMAN:
            ex.confirm_gate(session, "boss")
        else:
            ex.advance(session)
    opened = session.events[-1]
    assert opened.kind is ex.EventKind.HUMAN_GATE_OPENED
    assert "PLEASE FIX THE PANEL" in opened.payload["message"]
    # while gated the panel is held at the target
    assert session.world.gripper_holding == "panel"

    fractions = []
    for _ in range(3):
        ex.confirm_gate(session, "boss")
        fractions.append(session.events[-1].payload["progress"])
        assert session.status is ex.Status.AWAITING_HUMAN
    assert fractions == ["1/4", "2/4", "3/4"]
    ex.confirm_gate(session, "boss")
    assert session.world.gripper_holding is None
    assert "panel" in session.world.fastened


def test_confirm_records_supervisor(drywall_lib, drywall_task):
    session = ex.start(
        make_plan(drywall_lib, drywall_task), ex.initial_world_from_task(drywall_task)
    )
    ex.advance(session)  # start sentinel
    ex.advance(session)  # prepare -> workpiece gate
    assert session.status is ex.Status.AWAITING_HUMAN
    ex.confirm_gate(session, "inspector-7")
    confirms = [e for e in session.events if e.kind is ex.EventKind.HUMAN_CONFIRMED]
    assert confirms[0].payload["supervisor_id"] == "inspector-7"
    assert confirms[0].payload["status"] == "PREPARATION CONFIRMED, START PLANNING"


def test_confirm_while_running_rejected(drywall_lib, drywall_task):
    session = ex.start(
        make_plan(drywall_lib, drywall_task), ex.initial_world_from_task(drywall_task)
    )
    with pytest.raises(ex.NotAwaitingHuman):
        ex.confirm_gate(session, "boss")


def test_step_requires_running(drywall_lib, drywall_task):
    session = ex.start(
        make_plan(drywall_lib, drywall_task), ex.initial_world_from_task(drywall_task)
    )
    drive_to_completion(session)
    with pytest.raises(ex.NotRunning):
        ex.step(session)


# ---------------------------------------------------------------------------
# step semantics
# ---------------------------------------------------------------------------


def test_install_step_moves_panel_and_gates(drywall_lib, drywall_task):
    session = ex.start(
        make_plan(drywall_lib, drywall_task), ex.initial_world_from_task(drywall_task)
    )
    while session.plan.steps[session.cursor].skill_id != "install" or session.status is not ex.Status.RUNNING:
        if session.status is ex.Status.AWAITING_HUMAN:
            ex.confirm_gate(session, "boss")
        else:
            ex.advance(session)
    # next advance may be the tool gate; push through to the install effect
    ex.advance(session)
    if session.gate is not None and session.gate.kind is ex.GateKind.TOOL:
        ex.confirm_gate(session, "boss")
        ex.advance(session)
    assert session.status is ex.Status.AWAITING_HUMAN
    assert session.gate.kind is ex.GateKind.NAIL
    assert session.world.object_poses["panel"] == pytest.approx(drywall_task.targets[0].center)


def test_cut_step_resizes(drywall_lib, drywall_task):
    session = ex.start(
        make_plan(drywall_lib, drywall_task), ex.initial_world_from_task(drywall_task)
    )
    while not (
        session.status is ex.Status.RUNNING
        and session.plan.steps[session.cursor].skill_id == "cut"
        and session.world.current_tool is ex.Tool.KNIFE
    ):
        if session.status is ex.Status.AWAITING_HUMAN:
            ex.confirm_gate(session, "boss")
        else:
            ex.advance(session)
    ex.step(session)
    assert session.world.object_sizes["panel"][:2] == (1.1, 2.2)
    assert session.events[-2].kind is ex.EventKind.STEP_COMPLETED


def test_corrupted_effect_fails_postcondition(drywall_lib, drywall_task):
    effects = dict(ex.DEFAULT_EFFECTS)

    def corrupted_install(step, session):
        # skip the object pose updates entirely
        return [{"op": "gripper_pose", "value": list(step.waypoints[-1])}]

    effects["install"] = corrupted_install
    session = ex.start(
        make_plan(drywall_lib, drywall_task), ex.initial_world_from_task(drywall_task)
    )
    drive_to_completion(session, effects=effects)
    assert session.status is ex.Status.FAILED
    kinds = [e.kind for e in session.events]
    assert ex.EventKind.POSTCONDITION_FAILED in kinds
    assert kinds[-1] is ex.EventKind.PLAN_FAILED
    # a failed session stays failed
    with pytest.raises(ex.NotRunning):
        ex.step(session)
    with pytest.raises(ex.NotAwaitingHuman):
        ex.confirm_gate(session, "boss")


# ---------------------------------------------------------------------------
# tool change policy
# ---------------------------------------------------------------------------


def test_policy_no_action_when_tool_matches(drywall_lib, drywall_task):
    session = ex.start(
        make_plan(drywall_lib, drywall_task), ex.initial_world_from_task(drywall_task)
    )
    assert ex.tool_change_policy(session) is None  # start sentinel needs nothing


def test_policy_requests_change_when_free(drywall_lib, drywall_task):
    session = ex.start(
        make_plan(drywall_lib, drywall_task, tokens=DRYWALL_CHAIN),
        ex.initial_world_from_task(drywall_task),
    )
    # fast-forward to the cut step with gripper mounted and empty
    while session.plan.steps[session.cursor].skill_id != "cut":
        if session.status is ex.Status.AWAITING_HUMAN:
            ex.confirm_gate(session, "boss")
        else:
            ex.step(session)
    assert ex.tool_change_policy(session) == "tool_change"
    assert session.gate.kind is ex.GateKind.TOOL


def test_policy_hands_task_to_human_when_holding(drywall_lib, drywall_task):
    session = ex.start(
        make_plan(drywall_lib, drywall_task), ex.initial_world_from_task(drywall_task)
    )
    while session.plan.steps[session.cursor].skill_id != "cut":
        if session.status is ex.Status.AWAITING_HUMAN:
            ex.confirm_gate(session, "boss")
        else:
            ex.step(session)
    # force a held object before the knife step
    session.world.gripper_holding = "panel"
    assert ex.tool_change_policy(session) == "human_takes_task"
    assert session.gate.kind is ex.GateKind.HUMAN_TAKES_TASK
    session.world.gripper_holding = None
    ex.confirm_gate(session, "boss")  # human performs the cut
    assert session.world.object_sizes["panel"][:2] == (1.1, 2.2)


# ---------------------------------------------------------------------------
# evaluate_object_state
# ---------------------------------------------------------------------------

_TARGET = StateReference(RefKind.TARGET_CENTER)


def _world(pose=(0.0, 0.0, 0.0)):
    world = ex.WorldState()
    world.object_poses["panel"] = pose
    world.object_sizes["panel"] = (1.2, 2.4, 0.012)
    return world


def test_coord_equals_at_target():
    state = ObjectState(
        PositionPredicate(PositionKind.COORD_EQUALS, _TARGET),
        OrientationPredicate(OrientationKind.UNSPECIFIED),
        SizeKind.UNSPECIFIED,
    )
    bindings = {"object_id": "panel", "target": (0.0, 0.0, 0.0)}
    assert ex.evaluate_object_state(state, _world(), bindings)


def test_coord_differs_needs_min_distance():
    state = ObjectState(
        PositionPredicate(PositionKind.COORD_DIFFERS, _TARGET, 0.2),
        OrientationPredicate(OrientationKind.UNSPECIFIED),
        SizeKind.UNSPECIFIED,
    )
    bindings = {"object_id": "panel", "target": (0.1, 0.0, 0.0)}
    assert not ex.evaluate_object_state(state, _world(), bindings)
    bindings["target"] = (0.25, 0.0, 0.0)
    assert ex.evaluate_object_state(state, _world(), bindings)


def test_unspecified_is_vacuous():
    from skillchain.skill_kb import UNSPECIFIED_STATE

    assert ex.evaluate_object_state(UNSPECIFIED_STATE, ex.WorldState(), {})


def test_unresolved_reference():
    state = ObjectState(
        PositionPredicate(PositionKind.COORD_EQUALS, _TARGET),
        OrientationPredicate(OrientationKind.UNSPECIFIED),
        SizeKind.UNSPECIFIED,
    )
    with pytest.raises(ex.UnresolvedReference):
        ex.evaluate_object_state(state, _world(), {"object_id": "panel"})


def test_holder_z_binding():
    state = ObjectState(
        PositionPredicate(PositionKind.Z_MATCHES_HOLDER),
        OrientationPredicate(OrientationKind.UNSPECIFIED),
        SizeKind.UNSPECIFIED,
    )
    world = _world(pose=(4.0, 4.0, 0.5))
    assert ex.evaluate_object_state(state, world, {"object_id": "panel", "holder_z": 0.5})
    assert not ex.evaluate_object_state(state, world, {"object_id": "panel", "holder_z": 0.4})


# ---------------------------------------------------------------------------
# event sourcing
# ---------------------------------------------------------------------------


def test_event_seq_has_no_gaps(drywall_lib, drywall_task):
    session = ex.start(
        make_plan(drywall_lib, drywall_task), ex.initial_world_from_task(drywall_task)
    )
    drive_to_completion(session)
    assert [e.seq_no for e in session.events] == list(range(len(session.events)))


def test_replay_reproduces_final_world(drywall_lib, drywall_task):
    initial = ex.initial_world_from_task(drywall_task)
    session = ex.start(make_plan(drywall_lib, drywall_task), initial)
    drive_to_completion(session)
    replayed = ex.replay_events(initial, session.events)
    assert replayed == session.world


def test_replay_of_failed_run(drywall_lib, drywall_task):
    effects = dict(ex.DEFAULT_EFFECTS)
    effects["cut"] = lambda step, session: []  # no resize: postcondition must fail
    initial = ex.initial_world_from_task(drywall_task)
    session = ex.start(make_plan(drywall_lib, drywall_task), initial)
    drive_to_completion(session, effects=effects)
    assert session.status is ex.Status.FAILED
    assert ex.replay_events(initial, session.events) == session.world


def test_held_object_tracks_gripper(drywall_lib, drywall_task):
    session = ex.start(
        make_plan(drywall_lib, drywall_task), ex.initial_world_from_task(drywall_task)
    )
    drive_to_completion(session)
    world = ex.initial_world_from_task(drywall_task)
    for event in session.events:
        for delta in event.payload.get("world_delta", []):
            ex.apply_delta(world, delta)
        if world.gripper_holding is not None:
            held = world.object_poses[world.gripper_holding]
            # the hold is only coupled once the carry begins
            if held != session.plan.references["material_stack"]:
                assert held == world.gripper_pose
