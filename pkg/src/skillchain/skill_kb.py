"""Micro-skill knowledge base.

A skill library is a small set of canonical manipulation actions, each
annotated with the object state expected before the skill runs and the
object state it leaves behind.  Three machine-checkable rules keep the
library usable for chaining:

* coverage      -- a task's skills must all come from the library
* exclusivity   -- no two skills may overlap in name, synonym, or
                   (begin, end) state transition
* continuity    -- every skill must link to a neighbour: its begin state
                   is some other skill's end state, or vice versa

State comparison is exact predicate equality, never fuzzy matching, so
libraries are authored with canonical predicates once and compared cheaply
ever after.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union


class UnknownSkillId(KeyError):
    """Raised when a skill id is not present in the library."""


# ---------------------------------------------------------------------------
# State predicates
# ---------------------------------------------------------------------------


class RefKind(str, Enum):
    MATERIAL_STACK = "material_stack"
    TARGET_CENTER = "target_center"
    GRIPPER_CENTER = "gripper_center"
    HUMAN_HAND_CENTER = "human_hand_center"
    ABSOLUTE = "absolute"
    NONE = "none"


@dataclass(frozen=True)
class StateReference:
    """A named spatial anchor that predicates compare against."""

    kind: RefKind
    xyz: Optional[tuple[float, float, float]] = None

    def __post_init__(self):
        if self.kind is RefKind.ABSOLUTE:
            if self.xyz is None or len(self.xyz) != 3:
                raise ValueError("absolute reference needs exactly three components")
            if not all(math.isfinite(c) for c in self.xyz):
                raise ValueError("absolute reference components must be finite")
        elif self.xyz is not None:
            raise ValueError(f"{self.kind.value} reference carries no coordinates")


class PositionKind(str, Enum):
    COORD_EQUALS = "coord_equals"
    COORD_DIFFERS = "coord_differs"
    Z_MATCHES_HOLDER = "z_matches_holder"
    UNSPECIFIED = "unspecified"


@dataclass(frozen=True)
class PositionPredicate:
    kind: PositionKind
    ref: Optional[StateReference] = None
    min_distance_m: Optional[float] = None

    def __post_init__(self):
        if self.kind in (PositionKind.COORD_EQUALS, PositionKind.COORD_DIFFERS):
            if self.ref is None:
                raise ValueError(f"{self.kind.value} requires a reference")
        elif self.ref is not None:
            raise ValueError(f"{self.kind.value} takes no reference")
        if self.kind is PositionKind.COORD_DIFFERS:
            d = self.min_distance_m if self.min_distance_m is not None else 0.0
            if not math.isfinite(d) or d < 0:
                raise ValueError("min_distance_m must be finite and non-negative")
            object.__setattr__(self, "min_distance_m", float(d))
        elif self.min_distance_m is not None:
            raise ValueError(f"{self.kind.value} takes no min_distance_m")


class OrientationKind(str, Enum):
    MATCHES = "matches"
    DIFFERS = "differs"
    UNSPECIFIED = "unspecified"


@dataclass(frozen=True)
class OrientationPredicate:
    kind: OrientationKind
    ref: Optional[StateReference] = None

    def __post_init__(self):
        if self.kind is OrientationKind.UNSPECIFIED:
            if self.ref is not None:
                raise ValueError("unspecified orientation takes no reference")
        elif self.ref is None:
            raise ValueError(f"{self.kind.value} requires a reference")


class SizeKind(str, Enum):
    ORIGINAL = "original"
    REQUIRED_SIZE = "required_size"
    UNSPECIFIED = "unspecified"


@dataclass(frozen=True)
class ObjectState:
    """Canonical object state: position, orientation, and size predicates.

    Two states are equal iff all three predicates are equal; the fixed
    field order is the canonical form.
    """

    position: PositionPredicate
    orientation: OrientationPredicate
    size: SizeKind

    def is_unspecified(self) -> bool:
        return (
            self.position.kind is PositionKind.UNSPECIFIED
            and self.orientation.kind is OrientationKind.UNSPECIFIED
            and self.size is SizeKind.UNSPECIFIED
        )


UNSPECIFIED_STATE = ObjectState(
    PositionPredicate(PositionKind.UNSPECIFIED),
    OrientationPredicate(OrientationKind.UNSPECIFIED),
    SizeKind.UNSPECIFIED,
)


# ---------------------------------------------------------------------------
# Skills and libraries
# ---------------------------------------------------------------------------


class ParamType(str, Enum):
    POINT3 = "point3"
    LENGTH_M = "length_m"
    REFERENCE = "reference"


_WS = re.compile(r"\s+")


def normalize_verb(verb: str) -> str:
    """Lowercase and collapse whitespace; the canonical verb form."""
    return _WS.sub(" ", verb.strip().lower())


@dataclass(frozen=True)
class MicroSkill:
    id: str
    canonical_name: str
    begin_state: ObjectState
    end_state: ObjectState
    synonyms: frozenset[str] = frozenset()
    parameter_schema: tuple[tuple[str, ParamType], ...] = ()
    requires_human_gate: bool = False
    is_sentinel: bool = False

    def __post_init__(self):
        if not self.canonical_name or normalize_verb(self.canonical_name) != self.canonical_name:
            raise ValueError(f"canonical_name must be a non-empty normalized verb: {self.canonical_name!r}")
        if self.canonical_name in self.synonyms:
            raise ValueError(f"{self.id}: synonyms must not repeat the canonical name")
        if self.is_sentinel:
            begin_u = self.begin_state.is_unspecified()
            end_u = self.end_state.is_unspecified()
            if begin_u == end_u:
                raise ValueError(f"sentinel {self.id} must have exactly one specified side")

    @property
    def is_start_sentinel(self) -> bool:
        return self.is_sentinel and self.begin_state.is_unspecified()

    @property
    def is_finish_sentinel(self) -> bool:
        return self.is_sentinel and self.end_state.is_unspecified()


@dataclass(frozen=True)
class SkillLibrary:
    skills: tuple[MicroSkill, ...]
    version: str = "1"

    def skill(self, skill_id: str) -> MicroSkill:
        for s in self.skills:
            if s.id == skill_id:
                return s
        raise UnknownSkillId(skill_id)

    def __contains__(self, skill_id: str) -> bool:
        return any(s.id == skill_id for s in self.skills)

    def ids(self) -> list[str]:
        return [s.id for s in self.skills]

    @property
    def start_sentinel(self) -> Optional[MicroSkill]:
        return next((s for s in self.skills if s.is_start_sentinel), None)

    @property
    def finish_sentinel(self) -> Optional[MicroSkill]:
        return next((s for s in self.skills if s.is_finish_sentinel), None)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


class Rule(str, Enum):
    COVERAGE = "coverage"
    EXCLUSIVITY = "exclusivity"
    CONTINUITY = "continuity"


_RULE_ORDER = {Rule.COVERAGE: 0, Rule.EXCLUSIVITY: 1, Rule.CONTINUITY: 2}


@dataclass(frozen=True)
class Violation:
    rule: Rule
    skill_ids: tuple[str, ...]
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def _sorted_report(violations: Iterable[Violation]) -> ValidationReport:
    ordered = sorted(violations, key=lambda v: (_RULE_ORDER[v.rule], v.skill_ids, v.message))
    return ValidationReport(tuple(ordered))


def validate_library(lib: SkillLibrary) -> ValidationReport:
    """Check every library-level rule and report all violations.

    The report is deterministic: violations are sorted by rule, then by
    the ids they name, so permuting the skill list yields an equal report.
    """
    violations: list[Violation] = []

    by_id: dict[str, list[MicroSkill]] = {}
    for s in lib.skills:
        by_id.setdefault(s.id, []).append(s)
    for sid, group in by_id.items():
        if len(group) > 1:
            violations.append(Violation(Rule.EXCLUSIVITY, (sid,), f"duplicate skill id {sid!r}"))

    by_name: dict[str, list[str]] = {}
    for s in lib.skills:
        by_name.setdefault(s.canonical_name, []).append(s.id)
    for name, ids in by_name.items():
        if len(ids) > 1:
            violations.append(
                Violation(Rule.EXCLUSIVITY, tuple(sorted(ids)), f"duplicate canonical name {name!r}")
            )

    # A synonym may belong to one skill only, and may not shadow another
    # skill's canonical name.
    claims: dict[str, set[str]] = {}
    for s in lib.skills:
        claims.setdefault(s.canonical_name, set()).add(s.id)
        for syn in s.synonyms:
            claims.setdefault(syn, set()).add(s.id)
    for word, owners in claims.items():
        if len(owners) > 1:
            violations.append(
                Violation(Rule.EXCLUSIVITY, tuple(sorted(owners)), f"verb {word!r} claimed by multiple skills")
            )

    by_transition: dict[tuple[ObjectState, ObjectState], list[str]] = {}
    for s in lib.skills:
        if s.is_sentinel:
            continue
        by_transition.setdefault((s.begin_state, s.end_state), []).append(s.id)
    for ids in by_transition.values():
        if len(ids) > 1:
            violations.append(
                Violation(
                    Rule.EXCLUSIVITY,
                    tuple(sorted(ids)),
                    "identical (begin, end) state transition: " + ", ".join(sorted(ids)),
                )
            )

    # Continuity: each skill needs a neighbour whose state chain links to it.
    for s in lib.skills:
        linked = any(
            o is not s and (s.begin_state == o.end_state or s.end_state == o.begin_state)
            for o in lib.skills
        )
        if not linked:
            violations.append(
                Violation(Rule.CONTINUITY, (s.id,), f"{s.id!r} has no preceding or successor skill")
            )

    return _sorted_report(violations)


def canonicalize(verb: str, lib: SkillLibrary) -> Optional[str]:
    """Map a raw verb to a skill id, or None when out of vocabulary.

    Canonical names win over synonyms; matching is on the normalized form.
    """
    needle = normalize_verb(verb)
    if not needle:
        return None
    for s in lib.skills:
        if s.canonical_name == needle:
            return s.id
    for s in lib.skills:
        if needle in s.synonyms:
            return s.id
    return None


def check_chain_continuity(
    seq: Sequence[str], lib: SkillLibrary
) -> tuple[bool, Optional[int]]:
    """Check that adjacent skills hand the object state over exactly.

    Returns (continuous, first_break) where first_break is the index of the
    first skill whose begin state mismatches its predecessor's end state.
    """
    skills = [lib.skill(sid) for sid in seq]
    for i in range(1, len(skills)):
        if skills[i - 1].end_state != skills[i].begin_state:
            return False, i
    return True, None


def check_task_coverage(task_skills: Iterable[str], lib: SkillLibrary) -> ValidationReport:
    """Report every task skill missing from the library."""
    missing = sorted(sid for sid in set(task_skills) if sid not in lib)
    if not missing:
        return ValidationReport(())
    return _sorted_report(
        [Violation(Rule.COVERAGE, tuple(missing), "skills not in library: " + ", ".join(missing))]
    )


def continuity_graph_connected(lib: SkillLibrary) -> bool:
    """True when every non-sentinel skill is reachable from the start
    sentinel or can reach the finish sentinel along end->begin links."""
    succ = {
        s.id: [o.id for o in lib.skills if o.id != s.id and s.end_state == o.begin_state]
        for s in lib.skills
    }
    pred = {
        s.id: [o.id for o in lib.skills if o.id != s.id and s.begin_state == o.end_state]
        for s in lib.skills
    }

    def closure(seed: Optional[MicroSkill], edges: dict[str, list[str]]) -> set[str]:
        if seed is None:
            return set()
        seen, frontier = {seed.id}, [seed.id]
        while frontier:
            nxt = [n for f in frontier for n in edges[f] if n not in seen]
            seen.update(nxt)
            frontier = nxt
        return seen

    from_start = closure(lib.start_sentinel, succ)
    to_finish = closure(lib.finish_sentinel, pred)
    return all(
        s.id in from_start or s.id in to_finish for s in lib.skills if not s.is_sentinel
    )


# ---------------------------------------------------------------------------
# JSON wire format
# ---------------------------------------------------------------------------


def _ref_to_json(ref: StateReference) -> dict:
    doc: dict = {"kind": ref.kind.value}
    if ref.kind is RefKind.ABSOLUTE:
        doc["xyz"] = list(ref.xyz)
    return doc


def _ref_from_json(doc: dict) -> StateReference:
    kind = RefKind(doc["kind"])
    xyz = tuple(float(c) for c in doc["xyz"]) if kind is RefKind.ABSOLUTE else None
    return StateReference(kind, xyz)


def state_to_json(state: ObjectState) -> dict:
    pos: dict = {"kind": state.position.kind.value}
    if state.position.ref is not None:
        pos["ref"] = _ref_to_json(state.position.ref)
    if state.position.kind is PositionKind.COORD_DIFFERS:
        pos["min_distance_m"] = state.position.min_distance_m
    orient: dict = {"kind": state.orientation.kind.value}
    if state.orientation.ref is not None:
        orient["ref"] = _ref_to_json(state.orientation.ref)
    return {"position": pos, "orientation": orient, "size": {"kind": state.size.value}}


def state_from_json(doc: dict) -> ObjectState:
    pos_doc = doc["position"]
    pos_kind = PositionKind(pos_doc["kind"])
    pos = PositionPredicate(
        pos_kind,
        _ref_from_json(pos_doc["ref"]) if "ref" in pos_doc else None,
        pos_doc.get("min_distance_m"),
    )
    orient_doc = doc["orientation"]
    orient = OrientationPredicate(
        OrientationKind(orient_doc["kind"]),
        _ref_from_json(orient_doc["ref"]) if "ref" in orient_doc else None,
    )
    return ObjectState(pos, orient, SizeKind(doc["size"]["kind"]))


def skill_to_json(skill: MicroSkill) -> dict:
    return {
        "id": skill.id,
        "canonical_name": skill.canonical_name,
        "synonyms": sorted(skill.synonyms),
        "begin_state": state_to_json(skill.begin_state),
        "end_state": state_to_json(skill.end_state),
        "parameter_schema": [{"name": n, "type": t.value} for n, t in skill.parameter_schema],
        "requires_human_gate": skill.requires_human_gate,
        "is_sentinel": skill.is_sentinel,
    }


def skill_from_json(doc: dict) -> MicroSkill:
    return MicroSkill(
        id=doc["id"],
        canonical_name=normalize_verb(doc["canonical_name"]),
        synonyms=frozenset(normalize_verb(s) for s in doc.get("synonyms", [])),
        begin_state=state_from_json(doc["begin_state"]),
        end_state=state_from_json(doc["end_state"]),
        parameter_schema=tuple(
            (p["name"], ParamType(p["type"])) for p in doc.get("parameter_schema", [])
        ),
        requires_human_gate=bool(doc.get("requires_human_gate", False)),
        is_sentinel=bool(doc.get("is_sentinel", False)),
    )


def library_to_json(lib: SkillLibrary) -> dict:
    return {"version": lib.version, "skills": [skill_to_json(s) for s in lib.skills]}


def library_from_json(doc: dict) -> SkillLibrary:
    return SkillLibrary(
        skills=tuple(skill_from_json(s) for s in doc["skills"]),
        version=str(doc.get("version", "1")),
    )


def load_library(path: Union[str, Path]) -> SkillLibrary:
    with open(path, encoding="utf-8") as fh:
        return library_from_json(json.load(fh))


def save_library(lib: SkillLibrary, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(library_to_json(lib), fh, indent=2)
        fh.write("\n")


def builtin_library_path(name: str = "drywall") -> Path:
    """Path of a fixture library shipped with the package."""
    from importlib.resources import files

    return Path(str(files("skillchain.data") / f"{name}_library.json"))
