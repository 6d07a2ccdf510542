"""Discussion-to-prompt pipeline: segment serialization, extraction through the
prompt-parsing agent, grammar validation, and user editing.

A prompt line is accepted only if it starts with one of the pinned strong
verbs, runs 6-14 whitespace-delimited words, and leaks no room metadata
(usernames, round labels, coordinates, panorama ids) or transcript copy.
User-authored items bypass hard rejection: they are kept with valid=False so
people can overrule the grammar, and downstream image requests include them.
"""
from __future__ import annotations

import logging
import re
from typing import Iterable, Optional, Sequence

from .agents import ROLE_PROMPT_PARSER, agent_config
from .errors import (
    EmptyHistory,
    EmptyText,
    IndexOutOfRange,
    InvalidRequest,
    RoomNotActive,
    UnknownPromptSet,
)
from .models import (
    ChatMessage,
    ORIGIN_EXTRACTED,
    ORIGIN_USER_ADDED,
    ORIGIN_USER_EDITED,
    PromptItem,
    PromptSet,
    ROLE_SYSTEM,
    RoomDocument,
    STATUS_ACTIVE,
    SegmentDocument,
    ValidationResult,
    prompt_set_key,
    safe_key_segment,
)
from .providers import ChatProvider, CompletionRequest
from .rooms import RoomService, RoomTxn
from .store import DocumentStore
from .util import canonical_dumps, digest_of

log = logging.getLogger(__name__)

# The closed verb whitelist; a prompt must open with one of these.
STRONG_VERBS = ("Add", "Increase", "Reduce", "Convert", "Provide", "Prioritize",
                "Create", "Plant", "Install", "Widen", "Separate", "Buffer",
                "Shade", "Calm", "Slow", "Expand", "Protect")
_STRONG_VERBS_LOWER = frozenset(v.lower() for v in STRONG_VERBS)

MIN_WORDS = 6
MAX_WORDS = 14

VIOLATION_NO_STRONG_VERB = "no_strong_verb"
VIOLATION_TOO_SHORT = "too_short"
VIOLATION_TOO_LONG = "too_long"
VIOLATION_METADATA_LEAK = "metadata_leak"
VIOLATION_TRANSCRIPT_COPY = "transcript_copy"

# Fraction of prompt tokens that must appear as one contiguous run inside a
# single source message before the prompt counts as copied transcript.
TRANSCRIPT_COPY_RATIO = 0.7

TARGET_MIN_PROMPTS = 4
TARGET_MAX_PROMPTS = 6

# A decimal number with 3+ fractional digits reads as a coordinate.
_COORDINATE_RE = re.compile(r"\d+\.\d{3,}")
_LINE_PREFIX_RE = re.compile(r"^(?:[-*•]+|\d+[.)])\s+")


def _normalize_token(token: str) -> str:
    # Trim punctuation from both ends, keep interior hyphens/apostrophes.
    start, end = 0, len(token)
    while start < end and not token[start].isalnum():
        start += 1
    while end > start and not token[end - 1].isalnum():
        end -= 1
    return token[start:end]


def _looks_like_panorama_id(token: str) -> bool:
    if len(token) < 16:
        return False
    has_alpha = has_digit = False
    for c in token:
        if c.isalpha():
            has_alpha = True
        elif c.isdigit():
            has_digit = True
        elif c not in "_-":
            return False
    return has_alpha and has_digit


def _metadata_leak(words: list[str], usernames: frozenset[str]) -> bool:
    normalized = [_normalize_token(w) for w in words]
    for i, raw in enumerate(words):
        token = normalized[i]
        if token and token.lower() in usernames:
            return True
        if (token.lower() == "round" and i + 1 < len(words)
                and normalized[i + 1].isdigit()):
            return True
        if _COORDINATE_RE.search(raw):
            return True
        if _looks_like_panorama_id(token):
            return True
    return False


def _copy_tokens(text: str) -> list[str]:
    return [t.lower() for t in (_normalize_token(w) for w in text.split()) if t]


def _longest_shared_run(prompt_tokens: list[str], message_tokens: list[str]) -> int:
    """Length of the longest contiguous run of prompt tokens that appears
    contiguously in the message."""
    best = 0
    n, m = len(prompt_tokens), len(message_tokens)
    for i in range(n):
        for j in range(m):
            k = 0
            while i + k < n and j + k < m and prompt_tokens[i + k] == message_tokens[j + k]:
                k += 1
            if k > best:
                best = k
    return best


def _is_transcript_copy(text: str, source_texts: Sequence[str]) -> bool:
    prompt_tokens = _copy_tokens(text)
    if not prompt_tokens:
        return False
    for source in source_texts:
        run = _longest_shared_run(prompt_tokens, _copy_tokens(source))
        # run / len >= TRANSCRIPT_COPY_RATIO, in exact integer arithmetic
        if run * 10 >= len(prompt_tokens) * 7:
            return True
    return False


def validate_prompt(text: str, *, usernames: Iterable[str] = (),
                    source_texts: Sequence[str] = ()) -> ValidationResult:
    """Grammar check. ``usernames`` and ``source_texts`` supply the room
    context for the metadata and transcript-copy scans; without them only the
    intrinsic checks run."""
    if not text or not text.strip():
        raise EmptyText("prompt text is empty")
    words = text.split()
    first_word = _normalize_token(words[0])
    violations: list[str] = []
    if first_word.lower() not in _STRONG_VERBS_LOWER:
        violations.append(VIOLATION_NO_STRONG_VERB)
    if len(words) < MIN_WORDS:
        violations.append(VIOLATION_TOO_SHORT)
    elif len(words) > MAX_WORDS:
        violations.append(VIOLATION_TOO_LONG)
    lowered_usernames = frozenset(u.lower() for u in usernames)
    if _metadata_leak(words, lowered_usernames):
        violations.append(VIOLATION_METADATA_LEAK)
    if source_texts and _is_transcript_copy(text, source_texts):
        violations.append(VIOLATION_TRANSCRIPT_COPY)
    return ValidationResult(valid=not violations, word_count=len(words),
                            first_word=first_word, violations=violations)


def serialize_segment(history: Sequence[ChatMessage], requesting_user: str) -> SegmentDocument:
    """Deterministic segment for the prompt parser: System messages (including
    snapshot notices) are excluded; the id derives from the content."""
    messages = [
        {"author": m.author, "role": m.role, "content": m.content,
         "round_index": m.round_index}
        for m in history if m.role != ROLE_SYSTEM
    ]
    if not messages:
        raise EmptyHistory("no discussion messages to summarize")
    segment_id = "seg-" + digest_of({"user_id": requesting_user, "messages": messages})[:16]
    return SegmentDocument(user_id=requesting_user, segment_id=segment_id, messages=messages)


def _clean_provider_lines(raw: str) -> list[str]:
    lines = []
    for line in raw.splitlines():
        line = _LINE_PREFIX_RE.sub("", line.strip())
        if line:
            lines.append(line)
    return lines


def _dedupe_keep_first(items: list[PromptItem]) -> list[PromptItem]:
    seen: set[str] = set()
    kept = []
    for item in items:
        folded = item.text.casefold()
        if folded in seen:
            continue
        seen.add(folded)
        kept.append(item)
    return kept


def extract_prompt_items(provider: ChatProvider, segment: SegmentDocument,
                         usernames: Sequence[str],
                         build_request) -> tuple[list[PromptItem], bool]:
    """Run the parser agent over the segment; returns (items, degraded).

    Invalid lines are dropped, duplicates collapse to the first occurrence,
    and at most one re-request is made when fewer than 4 valid prompts remain.
    """
    source_texts = [m["content"] for m in segment.messages]

    def attempt() -> list[PromptItem]:
        raw = provider.complete(build_request(segment))
        items: list[PromptItem] = []
        for line in _clean_provider_lines(raw):
            result = validate_prompt(line, usernames=usernames, source_texts=source_texts)
            if result.valid:
                items.append(PromptItem(text=line, origin=ORIGIN_EXTRACTED, valid=True))
        return _dedupe_keep_first(items)[:TARGET_MAX_PROMPTS]

    items = attempt()
    degraded = False
    if len(items) < TARGET_MIN_PROMPTS:
        retry_items = attempt()
        if len(retry_items) > len(items):
            items = retry_items
        if len(items) < TARGET_MIN_PROMPTS:
            degraded = True
            log.warning("prompt extraction degraded: %d valid item(s)", len(items))
    return items, degraded


def apply_edits(items: list[PromptItem], edits: Sequence[dict],
                usernames: Sequence[str],
                source_texts: Sequence[str]) -> list[PromptItem]:
    """Pure edit replay: same base and edits always give the same items."""
    result = list(items)
    for edit in edits:
        op = edit.get("op")
        if op == "edit":
            index = _edit_index(edit, len(result))
            text = _edit_text(edit)
            check = validate_prompt(text, usernames=usernames, source_texts=source_texts)
            result[index] = PromptItem(text=text, origin=ORIGIN_USER_EDITED, valid=check.valid)
        elif op == "remove":
            index = _edit_index(edit, len(result))
            del result[index]
        elif op == "append":
            text = _edit_text(edit)
            check = validate_prompt(text, usernames=usernames, source_texts=source_texts)
            result.append(PromptItem(text=text, origin=ORIGIN_USER_ADDED, valid=check.valid))
        else:
            raise InvalidRequest(f"unknown edit op {op!r}")
    return _dedupe_keep_first(result)


def _edit_index(edit: dict, length: int) -> int:
    index = edit.get("index")
    if not isinstance(index, int) or isinstance(index, bool):
        raise InvalidRequest("edit index must be an integer")
    if index < 0 or index >= length:
        raise IndexOutOfRange(f"index {index} outside 0..{length - 1}")
    return index


def _edit_text(edit: dict) -> str:
    text = edit.get("text")
    if not isinstance(text, str) or not text.strip():
        raise EmptyText("edit text is empty")
    return text.strip()


class PromptService:
    def __init__(self, store: DocumentStore, rooms: RoomService, provider: ChatProvider):
        self.store = store
        self.rooms = rooms
        self.provider = provider

    def _parser_request(self, segment: SegmentDocument) -> CompletionRequest:
        config = agent_config(ROLE_PROMPT_PARSER)
        return CompletionRequest(
            system_prompt=config.system_prompt,
            history=(("segment", canonical_dumps(segment.to_dict())),),
            max_output_tokens=config.max_output_tokens,
            temperature=config.temperature,
            top_p=config.top_p,
        )

    def extract_prompts(self, room_id: str, requesting_user: str) -> PromptSet:
        """Summarize the room discussion into a stored, editable prompt set."""
        room = self.rooms.get_room(room_id)
        if room.status != STATUS_ACTIVE:
            raise RoomNotActive("prompt extraction requires an active session")
        history = self.rooms.room_history(room_id)
        segment = serialize_segment(history, requesting_user)
        items, degraded = extract_prompt_items(
            self.provider, segment, room.participants, self._parser_request)

        def fn(room: RoomDocument, txn: RoomTxn):
            if room.status != STATUS_ACTIVE:
                raise RoomNotActive("prompt extraction requires an active session")
            ps_id = txn.reserve_id("ps")
            prompt_set = PromptSet(
                prompt_set_id=ps_id,
                room_id=room_id,
                source_segment=segment.to_dict(),
                items=items,
                created_round=room.current_round,
                degraded=degraded,
            )
            txn.create_doc(prompt_set_key(ps_id), prompt_set.to_dict())
            room.prompt_set_refs.append(ps_id)
            return prompt_set

        _, _, prompt_set = self.rooms.room_transaction(room_id, fn)
        return prompt_set

    def get_prompt_set(self, prompt_set_id: str) -> PromptSet:
        if not safe_key_segment(prompt_set_id):
            raise UnknownPromptSet(f"no prompt set {prompt_set_id!r}")
        record = self.store.get(prompt_set_key(prompt_set_id))
        if record is None:
            raise UnknownPromptSet(f"no prompt set {prompt_set_id!r}")
        return PromptSet.from_dict(record.value)

    def edit_prompt_set(self, prompt_set_id: str, edits: Sequence[dict]) -> PromptSet:
        """Apply ordered user edits, re-validating and deduplicating."""
        current = self.get_prompt_set(prompt_set_id)
        room = self.rooms.get_room(current.room_id)
        source_texts = [m["content"] for m in current.source_segment["messages"]]

        def mutation(doc: Optional[dict]) -> dict:
            if doc is None:
                raise UnknownPromptSet(f"no prompt set {prompt_set_id!r}")
            prompt_set = PromptSet.from_dict(doc)
            prompt_set.items = apply_edits(
                prompt_set.items, edits, room.participants, source_texts)
            return prompt_set.to_dict()

        record = self.store.transact(prompt_set_key(prompt_set_id), mutation)
        return PromptSet.from_dict(record.value)
