"""Geometric task models and skill parameter binding.

A task model is a small JSON document carrying object centers and
dimensions, target centers, and stud centers.  Lengths are meters unless
the document declares inches, in which case everything is converted at
load; the engine itself is unit-agnostic.  Binding turns an abstract skill
into concrete waypoints: geometric contracts for the simulator, not
motion plans.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

Point3 = tuple[float, float, float]

INCH_M = 0.0254


class SchemaViolation(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class NonPositiveDimension(SchemaViolation):
    def __init__(self, path: str, value: float):
        super().__init__(path, f"dimension must be > 0, got {value}")


class UnknownObject(KeyError):
    pass


class UnknownTarget(KeyError):
    pass


class MissingParameter(ValueError):
    pass


@dataclass(frozen=True)
class TaskObject:
    id: str
    center: Point3
    length_x: float
    width_y: float
    thickness_z: float


@dataclass(frozen=True)
class TaskTarget:
    id: str
    center: Point3


@dataclass(frozen=True)
class TaskModel:
    objects: tuple[TaskObject, ...] = ()
    targets: tuple[TaskTarget, ...] = ()
    stud_centers: tuple[Point3, ...] = ()
    tool_length_m: Optional[float] = None
    required_length: Optional[float] = None
    required_width: Optional[float] = None
    holder_z: Optional[float] = None

    def object(self, object_id: str) -> TaskObject:
        for o in self.objects:
            if o.id == object_id:
                return o
        raise UnknownObject(object_id)

    def target(self, target_id: str) -> TaskTarget:
        for t in self.targets:
            if t.id == target_id:
                return t
        raise UnknownTarget(target_id)


@dataclass(frozen=True)
class ParameterizedSkill:
    skill_id: str
    bindings: dict[str, object]
    waypoints: tuple[Point3, ...] = ()


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------

_TOP_FIELDS = {
    "units",
    "objects",
    "targets",
    "stud_centers",
    "tool_length_m",
    "required_length",
    "required_width",
    "holder_z",
}


def _point(value, path: str, scale: float) -> Point3:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise SchemaViolation(path, "expected a 3-element coordinate")
    try:
        coords = tuple(float(c) * scale for c in value)
    except (TypeError, ValueError):
        raise SchemaViolation(path, "coordinates must be numbers")
    if not all(math.isfinite(c) for c in coords):
        raise SchemaViolation(path, "coordinates must be finite")
    return coords


def _length(value, path: str, scale: float, positive: bool = True) -> float:
    try:
        length = float(value) * scale
    except (TypeError, ValueError):
        raise SchemaViolation(path, "expected a number")
    if not math.isfinite(length):
        raise SchemaViolation(path, "length must be finite")
    if positive and length <= 0:
        raise NonPositiveDimension(path, length / scale)
    return length


def load_task_model(document: Union[str, bytes, dict]) -> TaskModel:
    """Parse and validate a task-model document.

    Unknown fields are rejected.  When the document declares
    ``"units": "inches"`` every length is converted to meters (1 in =
    0.0254 m); otherwise values are taken as meters.
    """
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaViolation("$", f"not valid JSON: {exc}")
    else:
        doc = document
    if not isinstance(doc, dict):
        raise SchemaViolation("$", "document must be a JSON object")

    unknown = set(doc) - _TOP_FIELDS
    if unknown:
        raise SchemaViolation(sorted(unknown)[0], "unknown field")

    units = doc.get("units", "meters")
    if units not in ("meters", "inches"):
        raise SchemaViolation("units", f"unsupported units {units!r}")
    scale = INCH_M if units == "inches" else 1.0

    objects = []
    for i, odoc in enumerate(doc.get("objects", [])):
        path = f"objects[{i}]"
        extra = set(odoc) - {"id", "center", "length_x", "width_y", "thickness_z"}
        if extra:
            raise SchemaViolation(f"{path}.{sorted(extra)[0]}", "unknown field")
        for key in ("id", "center", "length_x", "width_y", "thickness_z"):
            if key not in odoc:
                raise SchemaViolation(f"{path}.{key}", "missing field")
        objects.append(
            TaskObject(
                id=str(odoc["id"]),
                center=_point(odoc["center"], f"{path}.center", scale),
                length_x=_length(odoc["length_x"], f"{path}.length_x", scale),
                width_y=_length(odoc["width_y"], f"{path}.width_y", scale),
                thickness_z=_length(odoc["thickness_z"], f"{path}.thickness_z", scale),
            )
        )

    targets = []
    for i, tdoc in enumerate(doc.get("targets", [])):
        path = f"targets[{i}]"
        extra = set(tdoc) - {"id", "center"}
        if extra:
            raise SchemaViolation(f"{path}.{sorted(extra)[0]}", "unknown field")
        if "id" not in tdoc or "center" not in tdoc:
            raise SchemaViolation(path, "targets need id and center")
        targets.append(
            TaskTarget(id=str(tdoc["id"]), center=_point(tdoc["center"], f"{path}.center", scale))
        )

    studs = tuple(
        _point(c, f"stud_centers[{i}]", scale)
        for i, c in enumerate(doc.get("stud_centers", []))
    )

    tool_length = (
        _length(doc["tool_length_m"], "tool_length_m", scale) if "tool_length_m" in doc else None
    )
    required_length = (
        _length(doc["required_length"], "required_length", scale)
        if "required_length" in doc
        else None
    )
    required_width = (
        _length(doc["required_width"], "required_width", scale)
        if "required_width" in doc
        else None
    )
    holder_z = (
        _length(doc["holder_z"], "holder_z", scale, positive=False)
        if "holder_z" in doc
        else None
    )

    for o in objects:
        if required_length is not None and required_length > o.length_x + 1e-12:
            raise SchemaViolation(
                "required_length", f"exceeds object {o.id!r} length_x ({o.length_x})"
            )
        if required_width is not None and required_width > o.width_y + 1e-12:
            raise SchemaViolation(
                "required_width", f"exceeds object {o.id!r} width_y ({o.width_y})"
            )

    return TaskModel(
        objects=tuple(objects),
        targets=tuple(targets),
        stud_centers=studs,
        tool_length_m=tool_length,
        required_length=required_length,
        required_width=required_width,
        holder_z=holder_z,
    )


# ---------------------------------------------------------------------------
# Binding
# ---------------------------------------------------------------------------


def bind_cut(task: TaskModel, object_id: str) -> ParameterizedSkill:
    """Five axis-aligned cutting waypoints from the object geometry.

    With the object centered at (x, y), thickness z, original size
    Lo x Wo, required size La x Wa, and tool length L, the tool visits:
    approach at (x-Lo/2+La, y-Wo/2, z), plunge to the table plane, cut
    along +y by Wa, finish along -x to the original edge, and retract to
    height L+4z.
    """
    obj = task.object(object_id)
    if task.tool_length_m is None:
        raise MissingParameter("tool_length_m")
    if task.required_length is None:
        raise MissingParameter("required_length")
    if task.required_width is None:
        raise MissingParameter("required_width")

    x, y, _ = obj.center
    z = obj.thickness_z
    lo, wo = obj.length_x, obj.width_y
    la, wa = task.required_length, task.required_width
    tool = task.tool_length_m

    waypoints = (
        (x - lo / 2 + la, y - wo / 2, z),
        (x - lo / 2 + la, y - wo / 2, 0.0),
        (x - lo / 2 + la, y - wo / 2 + wa, 0.0),
        (x - lo / 2, y - wo / 2 + wa, 0.0),
        (x - lo / 2, y - wo / 2 + wa, tool + 4 * z),
    )
    return ParameterizedSkill(
        skill_id="cut",
        bindings={
            "center": obj.center,
            "thickness": z,
            "original_length": lo,
            "original_width": wo,
            "required_length": la,
            "required_width": wa,
            "tool_length": tool,
        },
        waypoints=waypoints,
    )


def bind_pick_up(task: TaskModel, object_id: str) -> ParameterizedSkill:
    """The grip point is the object center; nothing else parameterizes it."""
    obj = task.object(object_id)
    return ParameterizedSkill(
        skill_id="pick up",
        bindings={"gripper_target": obj.center},
        waypoints=(obj.center,),
    )


def bind_install(
    task: TaskModel,
    object_id: str,
    target_id: str,
    approach_offset_m: float = 0.2,
    approach_normal: Point3 = (0.0, 0.0, 1.0),
) -> ParameterizedSkill:
    """Pre-place point offset along the target's approach normal, then the
    target center.  The offset defaults to the library's minimum approach
    distance datum and the normal to +z."""
    task.object(object_id)
    target = task.target(target_id)
    tx, ty, tz = target.center
    nx, ny, nz = approach_normal
    pre = (tx + approach_offset_m * nx, ty + approach_offset_m * ny, tz + approach_offset_m * nz)
    return ParameterizedSkill(
        skill_id="install",
        bindings={"target": target.center},
        waypoints=(pre, target.center),
    )


# ---------------------------------------------------------------------------
# Wire payload
# ---------------------------------------------------------------------------


def serialize_task_payload(task: TaskModel) -> bytes:
    """Serialize to the logged publish format, stud centers first.

    Key order is fixed; empty collections and unset scalars are omitted,
    so a studs-only task round-trips byte-exactly against the logged
    payload shape.
    """
    doc: dict = {"stud_centers": [[c for c in p] for p in task.stud_centers]}
    if task.objects:
        doc["objects"] = [
            {
                "id": o.id,
                "center": list(o.center),
                "length_x": o.length_x,
                "width_y": o.width_y,
                "thickness_z": o.thickness_z,
            }
            for o in task.objects
        ]
    if task.targets:
        doc["targets"] = [{"id": t.id, "center": list(t.center)} for t in task.targets]
    if task.tool_length_m is not None:
        doc["tool_length_m"] = task.tool_length_m
    if task.required_length is not None:
        doc["required_length"] = task.required_length
    if task.required_width is not None:
        doc["required_width"] = task.required_width
    if task.holder_z is not None:
        doc["holder_z"] = task.holder_z
    return json.dumps(doc).encode("utf-8")
