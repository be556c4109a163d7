"""Action-sequence extraction from tutorial text.

Two interchangeable extractor backends produce one raw verb per tutorial
step: a deterministic keyword scanner and a chat-model backend driven by a
fixed prompt.  Whatever the backend returns, the verbs are canonicalized
against the skill library here, and anything out of vocabulary lands in
the extraction report instead of the output sequence.  That post-filter is
a hard guarantee; the model is never trusted to respect the action list.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Protocol, Sequence, Union

from ..llm import LlmClient, TransportError
from ..skill_kb import SkillLibrary, canonicalize, normalize_verb
from .transcript import Transcript, clean_transcript


class BackendUnavailable(RuntimeError):
    """The extractor backend cannot be reached."""


class MalformedResponse(ValueError):
    """Model response diverges too far from one-verb-per-step."""


class EmptySequence(ValueError):
    """No step of the tutorial mapped into the library vocabulary."""

    def __init__(self, message: str, unmapped: list[tuple[int, str]]):
        super().__init__(message)
        self.unmapped = unmapped


@dataclass(frozen=True)
class ActionSequence:
    tokens: tuple[str, ...]
    raw_verbs: tuple[str, ...]
    source_id: str
    task_label: str

    def __post_init__(self):
        if not self.tokens:
            raise ValueError("an action sequence must hold at least one token")
        if len(self.tokens) != len(self.raw_verbs):
            raise ValueError("tokens and raw_verbs must align one-to-one")


@dataclass(frozen=True)
class Corpus:
    sequences: tuple[ActionSequence, ...]

    @property
    def vocabulary(self) -> set[str]:
        return {t for seq in self.sequences for t in seq.tokens}

    @staticmethod
    def from_token_lists(token_lists: Sequence[Sequence[str]], task_label: str = "synthetic") -> "Corpus":
        seqs = tuple(
            ActionSequence(tuple(toks), tuple(toks), source_id=f"seq-{i}", task_label=task_label)
            for i, toks in enumerate(token_lists)
        )
        return Corpus(seqs)


@dataclass(frozen=True)
class ExtractionReport:
    in_list_fraction: float
    unmapped: tuple[tuple[int, str], ...]
    synonym_substitutions: tuple[tuple[str, str], ...]


# ---------------------------------------------------------------------------
# Step splitting
# ---------------------------------------------------------------------------

_NUMBERED = re.compile(r"^\s*(?:step\s+)?\d+\s*[.):-]\s*(.*)$", re.IGNORECASE)


def split_steps(cleaned_text: str) -> list[str]:
    """Split cleaned tutorial text into step strings.

    Numbered lines win when at least two are present; otherwise every
    non-empty line is a step.
    """
    lines = [ln for ln in cleaned_text.splitlines() if ln.strip()]
    numbered = [m.group(1).strip() for ln in lines if (m := _NUMBERED.match(ln))]
    if len(numbered) >= 2:
        return [s for s in numbered if s]
    return lines


# ---------------------------------------------------------------------------
# Backends
# ---------------------------------------------------------------------------


class ExtractorBackend(Protocol):
    def extract(self, steps: list[str], lib: SkillLibrary) -> list[Optional[str]]:
        """One raw verb (or None) per step, in step order."""


class RuleBasedExtractor:
    """Keyword scan per step against canonical names and synonyms.

    The leftmost in-list phrase wins; on a position tie the longest phrase
    wins, so "pick up" beats "pick".  One verb per step.
    """

    def extract(self, steps: list[str], lib: SkillLibrary) -> list[Optional[str]]:
        phrases = []
        for s in lib.skills:
            phrases.append(s.canonical_name)
            phrases.extend(s.synonyms)
        matchers = [
            (re.compile(r"\b" + re.escape(p) + r"\b", re.IGNORECASE), p) for p in phrases
        ]
        out: list[Optional[str]] = []
        for step in steps:
            best: Optional[tuple[int, int, str]] = None
            for matcher, phrase in matchers:
                m = matcher.search(step)
                if m is None:
                    continue
                key = (m.start(), -len(phrase), phrase)
                if best is None or key < best:
                    best = key
            out.append(best[2] if best else None)
        return out


PROMPT_TEMPLATE = (
    "Process the following text by breaking it down into only action words. "
    "Map the instructions in the text to action words provided and display one "
    "action word per numbered step that summarizes that step. These action "
    "words should only be from the action word list provided. If you cannot "
    "map a given step to an action word found in the list, try to map synonyms "
    "of the instruction to an action word from the list. Either way, do not "
    "display any action words that are not in the action word list provided. "
    "Only assign one action word per step. Do not display headings for each "
    "step, only the action word. Here are the action words you can map to: "
    "[ACTION_LIST] Here is the text to process: [STEP_LIST]"
)

_LINE_NUMBER = re.compile(r"^\s*\d+\s*[.):-]?\s*")


def render_extraction_prompt(step_texts: Sequence[str], action_list: Sequence[str]) -> str:
    numbered = "\n".join(f"{i + 1}. {s}" for i, s in enumerate(step_texts))
    return PROMPT_TEMPLATE.replace("[ACTION_LIST]", ", ".join(action_list)).replace(
        "[STEP_LIST]", numbered
    )


def llm_extract(
    step_texts: Sequence[str],
    action_list: Sequence[str],
    client: LlmClient,
    mismatch_tolerance: float = 0.2,
) -> tuple[list[Optional[str]], list[tuple[int, str]]]:
    """Ask the model for one in-list verb per step and filter locally.

    Returns (verbs, filtered): ``verbs[i]`` is the accepted verb for step i
    or None, and ``filtered`` lists (step_index, verb) pairs the model
    produced outside the allowed action list.  A response whose line count
    strays from the step count by more than ``mismatch_tolerance`` raises
    MalformedResponse.
    """
    if not action_list:
        raise ValueError("action_list must be non-empty")
    prompt = render_extraction_prompt(step_texts, action_list)
    response = client.complete(prompt)
    lines = [
        _LINE_NUMBER.sub("", ln).strip() for ln in response.splitlines() if ln.strip()
    ]
    slack = math.ceil(mismatch_tolerance * len(step_texts))
    if abs(len(lines) - len(step_texts)) > slack:
        raise MalformedResponse(
            f"expected {len(step_texts)} verbs, got {len(lines)} lines"
        )
    allowed = {normalize_verb(a) for a in action_list}
    verbs: list[Optional[str]] = []
    filtered: list[tuple[int, str]] = []
    for i in range(len(step_texts)):
        verb = normalize_verb(lines[i]) if i < len(lines) else ""
        if not verb:
            verbs.append(None)
        elif verb in allowed:
            verbs.append(verb)
        else:
            filtered.append((i, verb))
            verbs.append(None)
    return verbs, filtered


class LlmExtractor:
    def __init__(self, client: LlmClient, mismatch_tolerance: float = 0.2):
        self.client = client
        self.mismatch_tolerance = mismatch_tolerance

    def extract(self, steps: list[str], lib: SkillLibrary) -> list[Optional[str]]:
        action_list = []
        for s in lib.skills:
            action_list.append(s.canonical_name)
            action_list.extend(sorted(s.synonyms))
        verbs, _ = llm_extract(steps, action_list, self.client, self.mismatch_tolerance)
        return verbs


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------


def extract_actions(
    transcript: Transcript,
    backend: ExtractorBackend,
    lib: SkillLibrary,
) -> tuple[ActionSequence, ExtractionReport]:
    """Clean, split, extract, canonicalize, and account for every step.

    Order is preserved; steps that do not map are reported, never dropped
    silently.  The output sequence can only contain library tokens.
    """
    from .transcript import EmptyAfterClean

    try:
        cleaned = clean_transcript(transcript.text)
    except EmptyAfterClean:
        raise EmptySequence("no content after cleaning", unmapped=[])
    steps = split_steps(cleaned)
    try:
        raw_verbs = backend.extract(steps, lib)
    except TransportError as exc:
        raise BackendUnavailable(str(exc)) from exc

    tokens: list[str] = []
    kept_verbs: list[str] = []
    unmapped: list[tuple[int, str]] = []
    substitutions: list[tuple[str, str]] = []
    for i, step in enumerate(steps):
        verb = raw_verbs[i] if i < len(raw_verbs) else None
        token = canonicalize(verb, lib) if verb else None
        if token is None:
            unmapped.append((i, step))
            continue
        skill = lib.skill(token)
        norm = normalize_verb(verb)
        if norm != skill.canonical_name:
            substitutions.append((norm, skill.canonical_name))
        tokens.append(token)
        kept_verbs.append(norm)

    if not tokens:
        raise EmptySequence("no step mapped into the library vocabulary", unmapped=unmapped)

    report = ExtractionReport(
        in_list_fraction=len(tokens) / len(steps),
        unmapped=tuple(unmapped),
        synonym_substitutions=tuple(substitutions),
    )
    seq = ActionSequence(
        tokens=tuple(tokens),
        raw_verbs=tuple(kept_verbs),
        source_id=transcript.source_id,
        task_label=transcript.task_label,
    )
    return seq, report


# ---------------------------------------------------------------------------
# Corpus files (JSON lines, one sequence per line)
# ---------------------------------------------------------------------------


def save_corpus(corpus: Corpus, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for seq in corpus.sequences:
            fh.write(
                json.dumps(
                    {
                        "tokens": list(seq.tokens),
                        "raw_verbs": list(seq.raw_verbs),
                        "source_id": seq.source_id,
                        "task_label": seq.task_label,
                    }
                )
            )
            fh.write("\n")


def load_corpus(path: Union[str, Path]) -> Corpus:
    seqs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            doc = json.loads(line)
            seqs.append(
                ActionSequence(
                    tokens=tuple(doc["tokens"]),
                    raw_verbs=tuple(doc.get("raw_verbs", doc["tokens"])),
                    source_id=doc.get("source_id", ""),
                    task_label=doc.get("task_label", ""),
                )
            )
    return Corpus(tuple(seqs))
