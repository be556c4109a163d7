"""Tutorial ingestion: transcripts, verb extraction, and pose-log parsing."""

from .extraction import (
    ActionSequence,
    BackendUnavailable,
    Corpus,
    EmptySequence,
    ExtractionReport,
    LlmExtractor,
    MalformedResponse,
    PROMPT_TEMPLATE,
    RuleBasedExtractor,
    extract_actions,
    llm_extract,
    load_corpus,
    render_extraction_prompt,
    save_corpus,
    split_steps,
)
from .pose_log import (
    MalformedRow,
    PoseRecord,
    SchemaMismatch,
    check_zero_pose_binding,
    group_by_file,
    load_pose_csv,
    save_pose_csv,
)
from .transcript import (
    EmptyAfterClean,
    NoDelimiterFound,
    Transcript,
    TranscriptOrigin,
    clean_transcript,
    parse_verb_list,
)

__all__ = [
    "ActionSequence",
    "BackendUnavailable",
    "Corpus",
    "EmptyAfterClean",
    "EmptySequence",
    "ExtractionReport",
    "LlmExtractor",
    "MalformedResponse",
    "MalformedRow",
    "NoDelimiterFound",
    "PROMPT_TEMPLATE",
    "PoseRecord",
    "RuleBasedExtractor",
    "SchemaMismatch",
    "Transcript",
    "TranscriptOrigin",
    "check_zero_pose_binding",
    "clean_transcript",
    "extract_actions",
    "group_by_file",
    "llm_extract",
    "load_corpus",
    "load_pose_csv",
    "parse_verb_list",
    "render_extraction_prompt",
    "save_corpus",
    "save_pose_csv",
    "split_steps",
]
