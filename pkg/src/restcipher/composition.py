"""Multi-key encryption of one document plus per-subtree keyed digests.

Each tag subtree is owned by one key: the policy maps tag ordinals to key
ids, attributes and variable children inherit their tag's key, unmapped tags
and the outermost tag fall to the group key.  One shared ciphertext body
serves every recipient; the access header tells each which ordinals its
pairwise key covers.  A digest word (keyed hash of the serialized key plus a
subtree's words) may follow any subtree's closer; the whole-document digest
under the group key comes last and covers the body words, digests excluded.
"""

import enum
import hashlib
from dataclasses import dataclass, field

from .codec import (
    EncryptedMessage,
    WordKind,
    classify_word,
    decode_chars,
    encode_word,
    strip_marker,
    _MARKER,
    _word_of,
)
from .docmodel import AttrName, AttrValue, Close, Open, Variable
from .errors import MalformedMessage, MissingKey, RestCipherError, UnknownTatCode
from .keycore import TenElementKey, serialize_key
from .tables import SymbolTable, TagTable, TatContext, build_st, tat_upsert

DEFAULT_DIGEST = "md5"


@dataclass
class KeyEntry:
    """One ring member: a key with its derived tables and session state."""

    key_id: str
    key: TenElementKey
    st: SymbolTable
    tat: TagTable
    ctx: TatContext
    is_group: bool = False

    @classmethod
    def for_key(cls, key_id: str, key: TenElementKey, is_group: bool = False):
        return cls(key_id, key, build_st(key), TagTable(), TatContext(), is_group)


class KeyRing:
    """Named keys of one participant; exactly one is the group key."""

    def __init__(self):
        self._entries = {}
        self.group_id = None

    def add_key(self, key_id: str, key: TenElementKey, is_group: bool = False) -> KeyEntry:
        if key_id in self._entries:
            raise ValueError(f"duplicate key id {key_id!r}")
        if is_group:
            if self.group_id is not None:
                raise ValueError("a ring holds exactly one group key")
            self.group_id = key_id
        entry = KeyEntry.for_key(key_id, key, is_group)
        self._entries[key_id] = entry
        return entry

    def __contains__(self, key_id: str) -> bool:
        return key_id in self._entries

    def __getitem__(self, key_id: str) -> KeyEntry:
        try:
            return self._entries[key_id]
        except KeyError:
            raise MissingKey(f"key {key_id!r} not in ring") from None

    def __iter__(self):
        return iter(self._entries.values())

    @property
    def group(self) -> KeyEntry:
        if self.group_id is None:
            raise MissingKey("ring has no group key")
        return self._entries[self.group_id]

    def pairwise_ids(self) -> list:
        return [e.key_id for e in self if not e.is_group]


@dataclass(frozen=True)
class CompositionPolicy:
    """Tag ordinal -> key id; unmapped ordinals use the group key."""

    assignments: dict = field(default_factory=dict)

    def key_for(self, ordinal: int, ring: KeyRing) -> str:
        key_id = self.assignments.get(ordinal, ring.group_id)
        if ordinal == 1 and key_id != ring.group_id:
            raise ValueError("the outermost tag always uses the group key")
        if key_id is None or key_id not in ring:
            raise MissingKey(f"tag {ordinal} needs key {key_id!r}")
        return key_id


def _stream_owners(stream, policy: CompositionPolicy, ring: KeyRing) -> list:
    """Owning key id per token; a closer belongs to the tag it closes."""
    owners = []
    stack = []
    ordinal = 0
    for token in stream:
        if isinstance(token, Open):
            ordinal += 1
            stack.append(policy.key_for(ordinal, ring))
            owners.append(stack[-1])
        elif isinstance(token, Close):
            owners.append(stack.pop())
        else:
            owners.append(stack[-1])
    return owners


def compose_encrypt(stream, policy: CompositionPolicy, ring: KeyRing,
                    mode: str = "st") -> list:
    """Encrypt each word with its owning key's tables; returns body words."""
    if mode not in ("st", "tat"):
        raise ValueError(f"unknown mode {mode!r}")
    owners = _stream_owners(stream, policy, ring)
    new_by_key = {}
    for token, owner in zip(stream, owners):
        kind, text = _word_of(token)
        if kind in (WordKind.TAG, WordKind.ATTR_NAME, WordKind.ATTR_VALUE):
            if text not in ring[owner].tat:
                new_by_key.setdefault(owner, {}).setdefault(text, None)
    for key_id, new in new_by_key.items():
        entry = ring[key_id]
        entry.ctx.begin_message(len(entry.tat), len(new))

    words = []
    for token, owner in zip(stream, owners):
        entry = ring[owner]
        kind, text = _word_of(token)
        if kind is WordKind.CLOSER:
            words.append("0")
        elif kind is WordKind.VARIABLE:
            words.append(encode_word(text, kind, entry.st))
        elif mode == "tat" and text not in new_by_key.get(owner, {}) \
                and text in entry.tat:
            words.append(_MARKER[kind] + str(entry.tat.code_for(text)))
        else:
            words.append(encode_word(text, kind, entry.st))
            tat_upsert(entry.tat, entry.ctx, text, kind.value, entry.st)
    return words


def access_header(policy: CompositionPolicy, ring: KeyRing, held_ids,
                  tag_count: int) -> tuple:
    """Ordinals a holder of ``held_ids`` may process; group-owned tags are
    readable by every member and never listed."""
    held = set(held_ids)
    ordinals = []
    for ordinal in range(1, tag_count + 1):
        key_id = policy.key_for(ordinal, ring)
        if key_id != ring.group_id and key_id in held:
            ordinals.append(ordinal)
    return tuple(ordinals)


# structural scanning of ciphertext bodies


@dataclass(frozen=True)
class Span:
    """One tag subtree in a word list: words[start..end] inclusive of closer."""

    ordinal: int
    start: int
    end: int
    opens_inside: int


def subtree_spans(words, allow_digests: bool = False):
    """Structural parse of a body.

    Returns (spans by ordinal, digests as {ordinal: word index}).  Digest
    words are legal only directly after a closer; they attach to the subtree
    that closer ended and are excluded from all spans' coverage.
    """
    spans = {}
    digests = {}
    stack = []
    ordinal = 0
    last_closed = None
    for i, word in enumerate(words):
        kind = classify_word(word)
        if kind is WordKind.TAG:
            if not stack and spans:
                raise MalformedMessage("multiple roots in one message")
            ordinal += 1
            stack.append([ordinal, i, 0])
            last_closed = None
        elif kind is WordKind.CLOSER:
            if not stack:
                raise MalformedMessage(f"closer at word {i} with no open tag")
            opened, start, inner = stack.pop()
            spans[opened] = Span(opened, start, i, inner)
            if stack:
                stack[-1][2] += inner + 1
            last_closed = opened
        elif kind is WordKind.DIGEST:
            if not allow_digests:
                raise MalformedMessage(f"unexpected digest word at {i}")
            if last_closed is None:
                raise MalformedMessage(f"digest at word {i} does not follow a closer")
            if last_closed in digests:
                raise MalformedMessage(f"second digest for tag {last_closed}")
            digests[last_closed] = i
        else:
            if not stack:
                raise MalformedMessage(f"word {i} outside any tag")
            last_closed = None
    if stack:
        raise MalformedMessage(f"{len(stack)} tags left open")
    if not spans:
        raise MalformedMessage("message contains no tags")
    return spans, digests


def _covered_words(words, span: Span) -> list:
    return [
        w for w in words[span.start:span.end + 1]
        if classify_word(w) is not WordKind.DIGEST
    ]


# decryption to a partial stream


@dataclass(frozen=True)
class OpaqueRun:
    """A contiguous foreign subtree, preserved byte for byte."""

    words: tuple
    ordinal: int
    opens_inside: int


def recipient_resolver(access, ring: KeyRing):
    """Ownership rule for a recipient that knows no policy: access-listed
    ordinals use its single pairwise key, the outermost tag the group key,
    everything else is foreign."""
    pairwise = ring.pairwise_ids()
    if len(pairwise) > 1:
        raise ValueError("recipient rule needs a single pairwise key; pass a policy")

    def resolve(ordinal: int):
        if ordinal in access:
            return pairwise[0] if pairwise else None
        if ordinal == 1:
            return ring.group_id
        return None

    return resolve


def policy_resolver(policy: CompositionPolicy, ring: KeyRing):
    def resolve(ordinal: int):
        try:
            return policy.key_for(ordinal, ring)
        except MissingKey:
            return None

    return resolve


def _resolve_text(word: str, entry: KeyEntry):
    """(kind, text) of one non-variable word under a session: tag-table
    lookup first, character decoding as fallback."""
    kind, payload = strip_marker(word)
    if entry.tat.has_code(int(payload)):
        return kind, entry.tat.word_for(int(payload)), True
    if len(payload) % entry.st.width:
        raise UnknownTatCode(f"word {word!r} unknown under key {entry.key_id!r}")
    return kind, decode_chars(payload, entry.st), False


def compose_decrypt(msg: EncryptedMessage, ring: KeyRing,
                    policy: CompositionPolicy = None) -> list:
    """Decode held segments to tokens; foreign subtrees become OpaqueRuns.

    Digest words must be stripped first (see strip_digests).  Without a
    policy the recipient rule applies: access-listed tags via the pairwise
    key, the outermost tag via the group key.
    """
    words = msg.words
    spans, _ = subtree_spans(words)
    resolve = policy_resolver(policy, ring) if policy else \
        recipient_resolver(msg.access, ring)

    held_of = {o: kid for o, kid in
               ((s.ordinal, resolve(s.ordinal)) for s in spans.values())
               if kid is not None and kid in ring}

    # mirror the encoder's per-key context before any insertion
    new_by_key = {}
    ordinal = 0
    i = 0
    stack = []
    while i < len(words):
        kind = classify_word(words[i])
        if kind is WordKind.TAG:
            ordinal += 1
            if ordinal not in held_of:
                i = spans[ordinal].end + 1
                ordinal += spans[ordinal].opens_inside
                continue
            stack.append(held_of[ordinal])
        if kind is WordKind.CLOSER:
            stack.pop()
            i += 1
            continue
        if stack and kind in (WordKind.TAG, WordKind.ATTR_NAME, WordKind.ATTR_VALUE):
            owner = stack[-1]
            _, text, known = _resolve_text(words[i], ring[owner])
            if not known and text not in ring[owner].tat:
                new_by_key.setdefault(owner, {}).setdefault(text, None)
        i += 1
    for key_id, new in new_by_key.items():
        entry = ring[key_id]
        entry.ctx.begin_message(len(entry.tat), len(new))

    items = []
    stack = []
    ordinal = 0
    i = 0
    while i < len(words):
        word = words[i]
        kind = classify_word(word)
        if kind is WordKind.TAG:
            ordinal += 1
            span = spans[ordinal]
            if ordinal not in held_of:
                items.append(OpaqueRun(tuple(words[i:span.end + 1]),
                                       ordinal, span.opens_inside))
                ordinal += span.opens_inside
                i = span.end + 1
                continue
            entry = ring[held_of[ordinal]]
            _, text, known = _resolve_text(word, entry)
            if not known:
                tat_upsert(entry.tat, entry.ctx, text, WordKind.TAG.value, entry.st)
            items.append(Open(text))
            stack.append(entry)
        elif kind is WordKind.CLOSER:
            if not stack:
                raise MalformedMessage(f"closer at word {i} with no open tag")
            stack.pop()
            items.append(Close())
        elif kind is WordKind.VARIABLE:
            items.append(Variable(decode_chars(word, stack[-1].st)))
        else:
            entry = stack[-1]
            k, text, known = _resolve_text(word, entry)
            if not known and text not in entry.tat:
                tat_upsert(entry.tat, entry.ctx, text, k.value, entry.st)
            items.append(AttrName(text) if k is WordKind.ATTR_NAME else AttrValue(text))
        i += 1
    return items


def compose_reencrypt(items, policy: CompositionPolicy, ring: KeyRing,
                      mode: str = "st") -> list:
    """Re-encode a partial stream; opaque runs are spliced back verbatim."""
    new_by_key = {}
    ordinal = 0
    stack = []
    for item in items:
        if isinstance(item, OpaqueRun):
            ordinal += 1 + item.opens_inside
            continue
        if isinstance(item, Open):
            ordinal += 1
            stack.append(policy.key_for(ordinal, ring))
        kind, text = _word_of(item)
        if kind in (WordKind.TAG, WordKind.ATTR_NAME, WordKind.ATTR_VALUE):
            owner = stack[-1]
            if text not in ring[owner].tat:
                new_by_key.setdefault(owner, {}).setdefault(text, None)
        if isinstance(item, Close):
            stack.pop()
    for key_id, new in new_by_key.items():
        entry = ring[key_id]
        entry.ctx.begin_message(len(entry.tat), len(new))

    words = []
    ordinal = 0
    stack = []
    for item in items:
        if isinstance(item, OpaqueRun):
            words.extend(item.words)
            ordinal += 1 + item.opens_inside
            continue
        if isinstance(item, Open):
            ordinal += 1
            stack.append(policy.key_for(ordinal, ring))
        kind, text = _word_of(item)
        entry = ring[stack[-1]] if stack else None
        if kind is WordKind.CLOSER:
            words.append("0")
            stack.pop()
        elif kind is WordKind.VARIABLE:
            words.append(encode_word(text, kind, entry.st))
        elif mode == "tat" and text not in new_by_key.get(entry.key_id, {}) \
                and text in entry.tat:
            words.append(_MARKER[kind] + str(entry.tat.code_for(text)))
        else:
            words.append(encode_word(text, kind, entry.st))
            tat_upsert(entry.tat, entry.ctx, text, kind.value, entry.st)
    return words


# keyed digests


def sign_segment(segment_words, key: TenElementKey,
                 algorithm: str = DEFAULT_DIGEST) -> str:
    """Hash of the serialized key followed by the space-joined segment."""
    payload = serialize_key(key) + " ".join(segment_words)
    return hashlib.new(algorithm, payload.encode("ascii")).hexdigest()


def attach_digests(body_words, policy: CompositionPolicy, ring: KeyRing,
                   algorithm: str = DEFAULT_DIGEST) -> list:
    """Sign every ring-held, explicitly-policied subtree plus the whole body.

    Each digest lands directly after its subtree's closer; the whole-document
    digest (group key) closes the message.  Input must be digest-free.
    """
    spans, _ = subtree_spans(body_words)
    by_closer = {}
    for span in spans.values():
        if span.ordinal == 1:
            continue
        key_id = policy.key_for(span.ordinal, ring)
        if key_id == ring.group_id or key_id not in ring:
            continue
        segment = list(body_words[span.start:span.end + 1])
        by_closer[span.end] = sign_segment(segment, ring[key_id].key, algorithm)
    out = []
    for i, word in enumerate(body_words):
        out.append(word)
        if i in by_closer:
            out.append(by_closer[i])
    out.append(sign_segment(list(body_words), ring.group.key, algorithm))
    return out


def strip_digests(words):
    """(digest-free words, {ordinal: digest word}) of a signed message."""
    spans, digests = subtree_spans(words, allow_digests=True)
    digest_indexes = set(digests.values())
    body = [w for i, w in enumerate(words) if i not in digest_indexes]
    return body, {o: words[i] for o, i in digests.items()}


class Status(enum.Enum):
    ACCEPT = "accept"
    REJECT = "reject"
    NOT_CHECKABLE = "not-checkable"


@dataclass(frozen=True)
class Verdict:
    ordinal: int
    status: Status
    detail: str = ""


def verify_digests(msg: EncryptedMessage, ring: KeyRing,
                   policy: CompositionPolicy = None,
                   algorithm: str = DEFAULT_DIGEST) -> list:
    """One verdict per digest word; a structurally broken message is a
    single whole-message Reject rather than an exception."""
    try:
        spans, digests = subtree_spans(msg.words, allow_digests=True)
    except RestCipherError as exc:
        return [Verdict(0, Status.REJECT, f"malformed message: {exc}")]
    if policy is not None:
        resolve = policy_resolver(policy, ring)
    else:
        try:
            resolve = recipient_resolver(msg.access, ring)
        except ValueError as exc:
            return [Verdict(0, Status.REJECT, str(exc))]
    verdicts = []
    for ordinal, index in sorted(digests.items(), key=lambda kv: kv[1]):
        key_id = ring.group_id if ordinal == 1 else resolve(ordinal)
        if key_id is None or key_id not in ring:
            verdicts.append(Verdict(ordinal, Status.NOT_CHECKABLE, "key not held"))
            continue
        segment = _covered_words(msg.words, spans[ordinal])
        expected = sign_segment(segment, ring[key_id].key, algorithm)
        if expected == msg.words[index]:
            verdicts.append(Verdict(ordinal, Status.ACCEPT))
        else:
            verdicts.append(Verdict(ordinal, Status.REJECT, "digest mismatch"))
    return verdicts


def refresh_digests(body_words, ring: KeyRing, resolve, preserved: dict,
                    algorithm: str = DEFAULT_DIGEST) -> list:
    """Re-sign held subtrees, splice preserved digests for foreign ones.

    ``preserved`` maps subtree ordinals to the digest words of the incoming
    message; the set of signed subtrees is kept shape-identical."""
    spans, _ = subtree_spans(body_words)
    by_closer = {}
    for ordinal, old in preserved.items():
        if ordinal == 1:
            continue
        span = spans[ordinal]
        key_id = resolve(ordinal)
        if key_id is not None and key_id in ring:
            segment = list(body_words[span.start:span.end + 1])
            by_closer[span.end] = sign_segment(segment, ring[key_id].key, algorithm)
        else:
            by_closer[span.end] = old
    out = []
    for i, word in enumerate(body_words):
        out.append(word)
        if i in by_closer:
            out.append(by_closer[i])
    if 1 in preserved:
        out.append(sign_segment(list(body_words), ring.group.key, algorithm))
    return out
