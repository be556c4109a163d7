"""Simulated execution of approved skill chains under human supervision.

The world is symbolic-geometric: object poses and sizes, a gripper, and
the mounted tool.  Each step applies the skill's simulated effect as a
list of primitive world deltas, then checks the skill's declared end state
as a postcondition; a mismatch fails the whole plan.  Human gates pause
the session until a supervisor confirms (nailing takes four confirms, per
the logged cadence).  Every state change rides on the append-only event
log, so replaying the log over the initial world reproduces the final
world exactly.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Iterable, Optional, Sequence

from .bim import (
    MissingParameter,
    ParameterizedSkill,
    Point3,
    TaskModel,
    bind_cut,
    bind_install,
    bind_pick_up,
)
from .skill_kb import (
    MicroSkill,
    ObjectState,
    OrientationKind,
    PositionKind,
    RefKind,
    SizeKind,
    SkillLibrary,
    check_chain_continuity,
)

POSE_TOL = 1e-6
SIZE_TOL = 1e-6
NAIL_CONFIRMS = 4


class UnapprovedPlan(RuntimeError):
    pass


class DiscontinuousPlan(RuntimeError):
    def __init__(self, first_break: int):
        super().__init__(f"chain breaks at step {first_break}")
        self.first_break = first_break


class NotAwaitingHuman(RuntimeError):
    pass


class NotRunning(RuntimeError):
    pass


class UnresolvedReference(KeyError):
    pass


class Tool(str, Enum):
    GRIPPER = "gripper"
    KNIFE = "knife"
    NONE = "none"


class Status(str, Enum):
    IDLE = "idle"
    RUNNING = "running"
    AWAITING_HUMAN = "awaiting_human"
    COMPLETED = "completed"
    FAILED = "failed"


class GateKind(str, Enum):
    NAIL = "nail"
    TOOL = "tool"
    WORKPIECE = "workpiece"
    HUMAN_TAKES_TASK = "human_takes_task"


class EventKind(str, Enum):
    STEP_STARTED = "step_started"
    STEP_COMPLETED = "step_completed"
    POSTCONDITION_FAILED = "postcondition_failed"
    HUMAN_GATE_OPENED = "human_gate_opened"
    HUMAN_CONFIRMED = "human_confirmed"
    TOOL_CHANGE_REQUESTED = "tool_change_requested"
    PLAN_COMPLETED = "plan_completed"
    PLAN_FAILED = "plan_failed"


class PlanSource(str, Enum):
    MANUAL_SELECTION = "manual_selection"
    AUTO_CHAINED = "auto_chained"


# ---------------------------------------------------------------------------
# World
# ---------------------------------------------------------------------------


@dataclass
class WorldState:
    object_poses: dict[str, Point3] = field(default_factory=dict)
    object_sizes: dict[str, tuple[float, float, float]] = field(default_factory=dict)
    gripper_pose: Point3 = (0.0, 0.0, 0.0)
    gripper_holding: Optional[str] = None
    current_tool: Tool = Tool.GRIPPER
    fastened: set[str] = field(default_factory=set)

    def copy(self) -> "WorldState":
        return WorldState(
            object_poses=dict(self.object_poses),
            object_sizes=dict(self.object_sizes),
            gripper_pose=self.gripper_pose,
            gripper_holding=self.gripper_holding,
            current_tool=self.current_tool,
            fastened=set(self.fastened),
        )

    def to_json(self) -> dict:
        return {
            "object_poses": {k: list(v) for k, v in self.object_poses.items()},
            "object_sizes": {k: list(v) for k, v in self.object_sizes.items()},
            "gripper_pose": list(self.gripper_pose),
            "gripper_holding": self.gripper_holding,
            "current_tool": self.current_tool.value,
            "fastened": sorted(self.fastened),
        }


def apply_delta(world: WorldState, delta: dict) -> None:
    op = delta["op"]
    if op == "gripper_pose":
        world.gripper_pose = tuple(delta["value"])
    elif op == "object_pose":
        world.object_poses[delta["id"]] = tuple(delta["value"])
    elif op == "object_size":
        world.object_sizes[delta["id"]] = tuple(delta["value"])
    elif op == "hold":
        world.gripper_holding = delta["id"]
    elif op == "release":
        world.gripper_holding = None
    elif op == "fasten":
        world.fastened.add(delta["id"])
    elif op == "tool":
        world.current_tool = Tool(delta["value"])
    else:
        raise ValueError(f"unknown world delta op {op!r}")


def initial_world_from_task(task: TaskModel) -> WorldState:
    world = WorldState()
    for o in task.objects:
        world.object_poses[o.id] = o.center
        world.object_sizes[o.id] = (o.length_x, o.width_y, o.thickness_z)
    return world


# ---------------------------------------------------------------------------
# Plans
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Plan:
    steps: tuple[ParameterizedSkill, ...]
    task_label: str
    library: SkillLibrary
    references: dict[str, object]
    source: PlanSource = PlanSource.MANUAL_SELECTION
    approved_by: Optional[str] = None

    def token_chain(self) -> list[str]:
        return [s.skill_id for s in self.steps]


_GEOMETRIC_SKILLS = ("cut", "install", "pick up")


def install_approach_offset(lib: SkillLibrary) -> float:
    """The minimum approach distance datum stored in the library's install
    begin state; falls back to 0.2 when absent."""
    try:
        skill = lib.skill("install")
    except KeyError:
        return 0.2
    pos = skill.begin_state.position
    if pos.kind is PositionKind.COORD_DIFFERS and pos.min_distance_m:
        return pos.min_distance_m
    return 0.2


def build_plan(
    lib: SkillLibrary,
    task: Optional[TaskModel],
    tokens: Sequence[str],
    task_label: str = "",
    source: PlanSource = PlanSource.MANUAL_SELECTION,
    object_id: Optional[str] = None,
    target_id: Optional[str] = None,
) -> Plan:
    """Bind a continuity-checked token chain against the task geometry.

    Raises DiscontinuousPlan (with the break index) when adjacent states
    do not hand over, and MissingParameter when a geometric skill appears
    but no task model is loaded.
    """
    continuous, first_break = check_chain_continuity(tokens, lib)
    if not continuous:
        raise DiscontinuousPlan(first_break)

    canon = {t: lib.skill(t).canonical_name for t in tokens}
    needs_geometry = any(canon[t] in _GEOMETRIC_SKILLS for t in tokens)
    if needs_geometry and (task is None or not task.objects):
        raise MissingParameter("a task model with objects is required to bind this chain")

    references: dict[str, object] = {}
    if task is not None and task.objects:
        obj = task.object(object_id) if object_id else task.objects[0]
        references["object_id"] = obj.id
        references["material_stack"] = obj.center
        references["original_size"] = (obj.length_x, obj.width_y)
        if task.required_length is not None and task.required_width is not None:
            references["required_size"] = (task.required_length, task.required_width)
        if task.holder_z is not None:
            references["holder_z"] = task.holder_z
        if task.targets:
            tgt = task.target(target_id) if target_id else task.targets[0]
            references["target"] = tgt.center

    steps = []
    offset = install_approach_offset(lib)
    for token in tokens:
        name = canon[token]
        if name == "cut":
            steps.append(bind_cut(task, references["object_id"]))
        elif name == "install":
            tgt = target_id or task.targets[0].id if task.targets else None
            if tgt is None:
                raise MissingParameter("install needs a target in the task model")
            steps.append(
                bind_install(task, references["object_id"], tgt, approach_offset_m=offset)
            )
        elif name == "pick up":
            steps.append(bind_pick_up(task, references["object_id"]))
        else:
            steps.append(ParameterizedSkill(skill_id=token, bindings={}, waypoints=()))

    return Plan(
        steps=tuple(steps),
        task_label=task_label,
        library=lib,
        references=references,
        source=source,
    )


def approve(plan: Plan, supervisor_id: str) -> Plan:
    return replace(plan, approved_by=supervisor_id)


# ---------------------------------------------------------------------------
# Object-state evaluation against the world
# ---------------------------------------------------------------------------


def _resolve(ref, world: WorldState, bindings: dict) -> Point3:
    if ref.kind is RefKind.MATERIAL_STACK:
        key = "material_stack"
    elif ref.kind is RefKind.TARGET_CENTER:
        key = "target"
    elif ref.kind is RefKind.HUMAN_HAND_CENTER:
        key = "human_hand"
    elif ref.kind is RefKind.GRIPPER_CENTER:
        return world.gripper_pose
    elif ref.kind is RefKind.ABSOLUTE:
        return ref.xyz
    else:
        raise UnresolvedReference(ref.kind.value)
    if key not in bindings:
        raise UnresolvedReference(key)
    return tuple(bindings[key])


def _distance(a: Point3, b: Point3) -> float:
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))


def evaluate_object_state(state: ObjectState, world: WorldState, bindings: dict) -> bool:
    """Check the position and size predicates against the world.

    Orientation predicates are trusted: the simulated world carries no
    orientation, so only coordinate and size claims are verifiable.
    """
    needs_object = (
        state.position.kind is not PositionKind.UNSPECIFIED
        or state.size is not SizeKind.UNSPECIFIED
    )
    if needs_object:
        if "object_id" not in bindings:
            raise UnresolvedReference("object_id")
        object_id = bindings["object_id"]
        if object_id not in world.object_poses:
            raise UnresolvedReference(f"object {object_id!r} not in world")
        pose = world.object_poses[object_id]

    pos = state.position
    if pos.kind is PositionKind.COORD_EQUALS:
        if _distance(pose, _resolve(pos.ref, world, bindings)) > POSE_TOL:
            return False
    elif pos.kind is PositionKind.COORD_DIFFERS:
        if _distance(pose, _resolve(pos.ref, world, bindings)) < (pos.min_distance_m or 0.0):
            return False
    elif pos.kind is PositionKind.Z_MATCHES_HOLDER:
        if "holder_z" not in bindings:
            raise UnresolvedReference("holder_z")
        if abs(pose[2] - float(bindings["holder_z"])) > POSE_TOL:
            return False

    if state.size is not SizeKind.UNSPECIFIED:
        key = "original_size" if state.size is SizeKind.ORIGINAL else "required_size"
        if key not in bindings:
            raise UnresolvedReference(key)
        want = bindings[key]
        have = world.object_sizes.get(bindings["object_id"])
        if have is None:
            raise UnresolvedReference(f"size of {bindings['object_id']!r}")
        if abs(have[0] - want[0]) > SIZE_TOL or abs(have[1] - want[1]) > SIZE_TOL:
            return False

    return True


# ---------------------------------------------------------------------------
# Effects (world deltas per skill)
# ---------------------------------------------------------------------------

EffectFn = Callable[[ParameterizedSkill, "ExecutionSession"], list[dict]]


def _noop_effect(step: ParameterizedSkill, session: "ExecutionSession") -> list[dict]:
    return []


def _cut_effect(step: ParameterizedSkill, session: "ExecutionSession") -> list[dict]:
    deltas = [{"op": "gripper_pose", "value": list(wp)} for wp in step.waypoints]
    object_id = session.plan.references["object_id"]
    la = step.bindings["required_length"]
    wa = step.bindings["required_width"]
    thickness = session.world.object_sizes[object_id][2]
    deltas.append({"op": "object_size", "id": object_id, "value": [la, wa, thickness]})
    return deltas


def _install_effect(step: ParameterizedSkill, session: "ExecutionSession") -> list[dict]:
    object_id = session.plan.references["object_id"]
    pick_pose = session.world.object_poses[object_id]
    deltas = [
        {"op": "gripper_pose", "value": list(pick_pose)},
        {"op": "hold", "id": object_id},
    ]
    for wp in step.waypoints:
        deltas.append({"op": "gripper_pose", "value": list(wp)})
        deltas.append({"op": "object_pose", "id": object_id, "value": list(wp)})
    return deltas


def _pick_up_effect(step: ParameterizedSkill, session: "ExecutionSession") -> list[dict]:
    object_id = session.plan.references["object_id"]
    target = step.bindings.get("gripper_target", session.world.object_poses[object_id])
    return [
        {"op": "gripper_pose", "value": list(target)},
        {"op": "hold", "id": object_id},
    ]


def _transfer_effect(step: ParameterizedSkill, session: "ExecutionSession") -> list[dict]:
    refs = session.plan.references
    if "human_hand" not in refs:
        raise UnresolvedReference("human_hand")
    hand = list(refs["human_hand"])
    object_id = refs["object_id"]
    return [
        {"op": "gripper_pose", "value": hand},
        {"op": "object_pose", "id": object_id, "value": hand},
        {"op": "release"},
    ]


def _align_effect(step: ParameterizedSkill, session: "ExecutionSession") -> list[dict]:
    refs = session.plan.references
    object_id = refs["object_id"]
    return [{"op": "object_pose", "id": object_id, "value": list(refs["material_stack"])}]


DEFAULT_EFFECTS: dict[str, EffectFn] = {
    "cut": _cut_effect,
    "install": _install_effect,
    "pick up": _pick_up_effect,
    "transfer": _transfer_effect,
    "align": _align_effect,
}

REQUIRED_TOOL: dict[str, Tool] = {
    "cut": Tool.KNIFE,
    "install": Tool.GRIPPER,
    "pick up": Tool.GRIPPER,
    "transfer": Tool.GRIPPER,
}

_NAIL_STATUS = {
    1: "1/4 nailed, Holding Panel",
    2: "1/2 nailed, Holding Panel",
    3: "3/4 nailed, Holding Panel, please press Enter when finished",
    4: "4/4 nailed, Panel released",
}


# ---------------------------------------------------------------------------
# Sessions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Event:
    seq_no: int
    ts: float
    kind: EventKind
    payload: dict

    def to_json(self) -> dict:
        return {
            "seq_no": self.seq_no,
            "ts": self.ts,
            "kind": self.kind.value,
            "payload": self.payload,
        }


@dataclass
class _GateState:
    kind: GateKind
    skill_id: str
    confirms_required: int = 1
    confirms_done: int = 0
    tool: Optional[Tool] = None


@dataclass
class ExecutionSession:
    plan: Plan
    world: WorldState
    cursor: int = 0
    status: Status = Status.IDLE
    fail_reason: Optional[str] = None
    events: list[Event] = field(default_factory=list)
    gate: Optional[_GateState] = None
    _seq: int = 0

    def emit(self, kind: EventKind, payload: Optional[dict] = None) -> Event:
        event = Event(seq_no=self._seq, ts=time.time(), kind=kind, payload=payload or {})
        self.events.append(event)
        self._seq += 1
        return event

    def snapshot(self) -> dict:
        return {
            "status": self.status.value,
            "cursor": self.cursor,
            "task_label": self.plan.task_label,
            "chain": self.plan.token_chain(),
            "gate": self.gate.kind.value if self.gate else None,
            "fail_reason": self.fail_reason,
            "world": self.world.to_json(),
        }


def start(plan: Plan, initial: WorldState) -> ExecutionSession:
    """Open a session on an approved, continuity-valid plan."""
    if plan.approved_by is None:
        raise UnapprovedPlan("plan has not been approved by a supervisor")
    continuous, first_break = check_chain_continuity(plan.token_chain(), plan.library)
    if not continuous:
        raise DiscontinuousPlan(first_break)
    if not plan.steps:
        raise ValueError("plan has no steps")
    session = ExecutionSession(plan=plan, world=initial.copy(), status=Status.RUNNING)
    session.emit(
        EventKind.STEP_STARTED,
        {"step": 0, "skill_id": plan.steps[0].skill_id},
    )
    return session


def _step_bindings(session: ExecutionSession, step: ParameterizedSkill) -> dict:
    bindings = dict(session.plan.references)
    bindings.update(step.bindings)
    return bindings


def _complete_step(session: ExecutionSession, world_delta: list[dict]) -> None:
    step = session.plan.steps[session.cursor]
    session.emit(
        EventKind.STEP_COMPLETED,
        {"step": session.cursor, "skill_id": step.skill_id, "world_delta": world_delta},
    )
    session.cursor += 1
    if session.cursor >= len(session.plan.steps):
        session.status = Status.COMPLETED
        session.emit(EventKind.PLAN_COMPLETED, {"steps": session.cursor})
    else:
        session.status = Status.RUNNING
        session.emit(
            EventKind.STEP_STARTED,
            {"step": session.cursor, "skill_id": session.plan.steps[session.cursor].skill_id},
        )


def _fail(session: ExecutionSession, step: ParameterizedSkill, world_delta: list[dict]) -> None:
    session.emit(
        EventKind.POSTCONDITION_FAILED,
        {
            "step": session.cursor,
            "skill_id": step.skill_id,
            "world_delta": world_delta,
        },
    )
    session.status = Status.FAILED
    session.fail_reason = f"postcondition failed at step {session.cursor} ({step.skill_id})"
    session.emit(EventKind.PLAN_FAILED, {"reason": session.fail_reason})


def _run_current_step(
    session: ExecutionSession, effects: dict[str, EffectFn], via_gate: bool
) -> None:
    """Apply the current skill's effect, verify its end state, then either
    complete, fail, or open the skill's human gate."""
    step = session.plan.steps[session.cursor]
    skill = session.plan.library.skill(step.skill_id)
    effect = effects.get(skill.canonical_name, _noop_effect)
    deltas = effect(step, session)
    for delta in deltas:
        apply_delta(session.world, delta)

    ok = evaluate_object_state(skill.end_state, session.world, _step_bindings(session, step))
    if not ok:
        _fail(session, step, deltas)
        return

    if skill.requires_human_gate and not via_gate:
        if skill.canonical_name == "install":
            session.gate = _GateState(
                GateKind.NAIL, step.skill_id, confirms_required=NAIL_CONFIRMS
            )
            message = (
                "NEED HELP! PLEASE FIX THE PANEL AND PRESS ENTER UPON "
                "FINISHED TO RELEASE THE PANEL"
            )
            status_line = "0 nailed, Holding Panel"
        else:
            session.gate = _GateState(GateKind.WORKPIECE, step.skill_id)
            message = "please check the workpiece and confirm to continue"
            status_line = None
        session.status = Status.AWAITING_HUMAN
        payload = {
            "gate": session.gate.kind.value,
            "step": session.cursor,
            "skill_id": step.skill_id,
            "message": message,
            "progress": "0",
            "world_delta": deltas,
        }
        if status_line:
            payload["status"] = status_line
        session.emit(EventKind.HUMAN_GATE_OPENED, payload)
        return

    _complete_step(session, deltas)


def step(session: ExecutionSession, effects: Optional[dict[str, EffectFn]] = None) -> ExecutionSession:
    """Execute the current step of a running session."""
    if session.status is not Status.RUNNING:
        raise NotRunning(f"session is {session.status.value}")
    if session.cursor >= len(session.plan.steps):
        session.status = Status.COMPLETED
        return session
    _run_current_step(session, effects or DEFAULT_EFFECTS, via_gate=False)
    return session


def confirm_gate(
    session: ExecutionSession,
    supervisor_id: str,
    effects: Optional[dict[str, EffectFn]] = None,
) -> ExecutionSession:
    """Acknowledge the open human gate and resume execution."""
    if session.status is not Status.AWAITING_HUMAN or session.gate is None:
        raise NotAwaitingHuman(f"session is {session.status.value}")
    gate = session.gate
    gate.confirms_done += 1
    payload: dict = {
        "gate": gate.kind.value,
        "skill_id": gate.skill_id,
        "supervisor_id": supervisor_id,
    }

    if gate.kind is GateKind.NAIL:
        payload["progress"] = f"{gate.confirms_done}/{gate.confirms_required}"
        payload["status"] = _NAIL_STATUS[gate.confirms_done]
        if gate.confirms_done < gate.confirms_required:
            session.emit(EventKind.HUMAN_CONFIRMED, payload)
            return session
        object_id = session.plan.references["object_id"]
        deltas = [{"op": "fasten", "id": object_id}, {"op": "release"}]
        for delta in deltas:
            apply_delta(session.world, delta)
        payload["world_delta"] = deltas
        session.emit(EventKind.HUMAN_CONFIRMED, payload)
        session.gate = None
        _complete_step(session, [])
        return session

    if gate.kind is GateKind.TOOL:
        deltas = [{"op": "tool", "value": gate.tool.value}]
        for delta in deltas:
            apply_delta(session.world, delta)
        payload["world_delta"] = deltas
        session.emit(EventKind.HUMAN_CONFIRMED, payload)
        session.gate = None
        session.status = Status.RUNNING
        return session

    if gate.kind is GateKind.HUMAN_TAKES_TASK:
        session.emit(EventKind.HUMAN_CONFIRMED, payload)
        session.gate = None
        session.status = Status.RUNNING
        _run_current_step(session, effects or DEFAULT_EFFECTS, via_gate=True)
        return session

    # Workpiece check: the step's effect already ran before the gate opened.
    if session.plan.library.skill(gate.skill_id).canonical_name == "prepare":
        payload["status"] = "PREPARATION CONFIRMED, START PLANNING"
    session.emit(EventKind.HUMAN_CONFIRMED, payload)
    session.gate = None
    _complete_step(session, [])
    return session


def tool_change_policy(session: ExecutionSession) -> Optional[str]:
    """Open a tool gate when the next step needs a different end effector.

    With the gripper holding something, the human takes over the task;
    otherwise the robot requests a tool change and waits.  Returns the
    action taken, or None when the mounted tool already fits.
    """
    if session.status is not Status.RUNNING or session.cursor >= len(session.plan.steps):
        return None
    step_ = session.plan.steps[session.cursor]
    skill = session.plan.library.skill(step_.skill_id)
    required = REQUIRED_TOOL.get(skill.canonical_name)
    if required is None or required is session.world.current_tool:
        return None

    if session.world.gripper_holding is not None:
        session.gate = _GateState(GateKind.HUMAN_TAKES_TASK, step_.skill_id)
        session.status = Status.AWAITING_HUMAN
        session.emit(
            EventKind.HUMAN_GATE_OPENED,
            {
                "gate": GateKind.HUMAN_TAKES_TASK.value,
                "step": session.cursor,
                "skill_id": step_.skill_id,
                "message": (
                    f"gripper busy: please perform {skill.canonical_name!r} "
                    "and confirm when finished"
                ),
                "world_delta": [],
            },
        )
        return "human_takes_task"

    session.gate = _GateState(GateKind.TOOL, step_.skill_id, tool=required)
    session.status = Status.AWAITING_HUMAN
    session.emit(
        EventKind.TOOL_CHANGE_REQUESTED,
        {
            "gate": GateKind.TOOL.value,
            "step": session.cursor,
            "skill_id": step_.skill_id,
            "tool": required.value,
            "message": f"please change the End-Effector to {required.value}",
            "world_delta": [],
        },
    )
    return "tool_change"


def advance(session: ExecutionSession, effects: Optional[dict[str, EffectFn]] = None) -> ExecutionSession:
    """One scheduling decision: gate on a tool mismatch or run the step."""
    if session.status is not Status.RUNNING:
        return session
    if tool_change_policy(session) is not None:
        return session
    return step(session, effects)


def run_until_blocked(
    session: ExecutionSession, effects: Optional[dict[str, EffectFn]] = None
) -> ExecutionSession:
    """Advance until the session waits on a human or reaches a terminal state."""
    while session.status is Status.RUNNING:
        advance(session, effects)
    return session


def replay_events(initial: WorldState, events: Iterable[Event]) -> WorldState:
    """Rebuild the final world by applying each event's world deltas."""
    world = initial.copy()
    for event in events:
        for delta in event.payload.get("world_delta", []):
            apply_delta(world, delta)
    return world
