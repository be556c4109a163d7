"""Tutorial text cleanup and delimiter-based verb list parsing."""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence


class EmptyAfterClean(ValueError):
    """Nothing is left of a transcript once boilerplate is removed."""


class NoDelimiterFound(ValueError):
    """Multi-word text with no recognizable list delimiter."""


class TranscriptOrigin(str, Enum):
    VIDEO_CAPTION = "video_caption"
    ARTICLE = "article"


@dataclass(frozen=True)
class Transcript:
    source_id: str
    task_label: str
    text: str
    origin: TranscriptOrigin = TranscriptOrigin.ARTICLE


_TIMESTAMP = re.compile(r"\b(?:\d{1,2}:)?\d{1,2}:\d{2}\b")
_WS = re.compile(r"\s+")

# Lines matching any of these are dropped as ads / channel boilerplate.
DEFAULT_BOILERPLATE = (
    r"(?i)\bsubscribe\b",
    r"(?i)\bsponsor",
    r"(?i)\[(?:music|applause)\]",
    r"(?i)thanks for watching",
    r"(?i)\blike and\b",
    r"(?i)\bvisit our\b",
)


def clean_transcript(raw: str, boilerplate_patterns: Sequence[str] = DEFAULT_BOILERPLATE) -> str:
    """Strip caption timestamps and boilerplate lines, collapse whitespace.

    Content lines are preserved in order.  Raises EmptyAfterClean when no
    content survives.
    """
    patterns = [re.compile(p) for p in boilerplate_patterns]
    kept = []
    for line in raw.splitlines():
        line = _TIMESTAMP.sub(" ", line)
        line = _WS.sub(" ", line).strip()
        if not line:
            continue
        if any(p.search(line) for p in patterns):
            continue
        kept.append(line)
    if not kept:
        raise EmptyAfterClean("transcript is empty after cleaning")
    return "\n".join(kept)


_DELIMITERS = ("|", ",", "\\", "\n")


def parse_verb_list(text: str, delimiter: Optional[str] = None) -> list[str]:
    """Split a delimited action-verb list into trimmed, non-empty items.

    Without an explicit delimiter, the best candidate among ``|``, ``,``,
    ``\\`` and newline is picked by occurrence count.  Raises
    NoDelimiterFound when none occurs and the text holds multiple words.
    """
    if delimiter is None:
        counts = [(text.count(d), -i, d) for i, d in enumerate(_DELIMITERS)]
        best = max(counts)
        if best[0] == 0:
            stripped = text.strip()
            if len(stripped.split()) > 1:
                raise NoDelimiterFound(f"no delimiter found in {text!r}")
            return [stripped] if stripped else []
        delimiter = best[2]
    return [item.strip() for item in text.split(delimiter) if item.strip()]
