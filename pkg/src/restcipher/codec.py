"""The four message codecs and the ciphertext wire grammar.

Every word of a document becomes one space-separated ciphertext word.  A
marker prefix carries the word's role: ``0`` tag, ``00`` attribute name,
``000`` attribute value, none for variable text; a lone ``0`` closes the
innermost open tag.  Symbol-table encoding spells a word character by
character in fixed-width codes; tag-table encoding replaces a known
non-variable word with its short agreed integer.  Both peers grow the tag
table from the same words in the same order, so it never travels.
"""

import enum
import re
from dataclasses import dataclass

from .docmodel import AttrName, AttrValue, Close, Open, Variable
from .errors import (
    MalformedMessage,
    MalformedWord,
    UnbalancedClosers,
    Unclassifiable,
    UnknownTatCode,
)
from .keycore import TenElementKey
from .tables import SymbolTable, TagTable, TatContext, build_st, tat_upsert


class WordKind(enum.Enum):
    CLOSER = "closer"
    TAG = "tag"
    ATTR_NAME = "attribute-name"
    ATTR_VALUE = "attribute-value"
    VARIABLE = "variable"
    DIGEST = "digest"


_MARKER = {
    WordKind.TAG: "0",
    WordKind.ATTR_NAME: "00",
    WordKind.ATTR_VALUE: "000",
    WordKind.VARIABLE: "",
}
_MARKED = {v: k for k, v in _MARKER.items()}

_WORD_RE = re.compile(r"(0{0,3})([1-9][0-9]*)")
# md5 by default; sha1/sha256 lengths admitted for the configurable digest
_DIGEST_RE = re.compile(r"[0-9a-f]{32}|[0-9a-f]{40}|[0-9a-f]{64}")


def classify_word(word: str) -> WordKind:
    """Word class from the text alone; raises Unclassifiable."""
    if word == "0":
        return WordKind.CLOSER
    if _DIGEST_RE.fullmatch(word) and any(c in "abcdef" for c in word):
        return WordKind.DIGEST
    match = _WORD_RE.fullmatch(word)
    if match:
        return _MARKED[match.group(1)]
    raise Unclassifiable(f"word {word!r} matches no word class")


def strip_marker(word: str) -> tuple:
    """(kind, payload digits) for a marked or variable word."""
    kind = classify_word(word)
    if kind in (WordKind.CLOSER, WordKind.DIGEST):
        return kind, ""
    return kind, word[len(_MARKER[kind]):]


def encode_word(word: str, kind: WordKind, st: SymbolTable) -> str:
    """Marker plus the concatenated fixed-width code of every character."""
    return _MARKER[kind] + "".join(str(st.code_for(char)) for char in word)


def decode_chars(digits: str, st: SymbolTable) -> str:
    """Inverse of the code concatenation; raises MalformedWord/UnknownCode."""
    if not digits or len(digits) % st.width:
        raise MalformedWord(
            f"payload of {len(digits)} digits is no multiple of width {st.width}"
        )
    return "".join(
        st.char_for(int(digits[i:i + st.width]))
        for i in range(0, len(digits), st.width)
    )


@dataclass(frozen=True)
class EncryptedMessage:
    """Access-list header plus the ordered ciphertext words."""

    access: tuple = ()
    words: tuple = ()

    def serialize(self) -> str:
        parts = []
        if self.access:
            parts.append("".join(f"{o}," for o in self.access))
        if self.words:
            parts.append(" ".join(self.words))
        return " ".join(parts)

    @classmethod
    def parse(cls, text: str) -> "EncryptedMessage":
        tokens = text.split(" ") if text else []
        access = ()
        if tokens and re.fullmatch(r"(?:[1-9][0-9]*,)+", tokens[0]):
            access = tuple(int(o) for o in tokens[0][:-1].split(","))
            tokens = tokens[1:]
        if not tokens:
            raise MalformedMessage("message has no body words")
        for word in tokens:
            try:
                classify_word(word)
            except Unclassifiable as exc:
                raise MalformedMessage(str(exc)) from None
        return cls(access, tuple(tokens))


_TOKEN_KIND = {Open: WordKind.TAG, AttrName: WordKind.ATTR_NAME,
               AttrValue: WordKind.ATTR_VALUE}


def _word_of(token) -> tuple:
    """(kind, text) of a stream token; Close maps to (CLOSER, None)."""
    if isinstance(token, Close):
        return WordKind.CLOSER, None
    if isinstance(token, Variable):
        return WordKind.VARIABLE, token.text
    if isinstance(token, (Open, AttrName)):
        return _TOKEN_KIND[type(token)], token.name
    return WordKind.ATTR_VALUE, token.text


def _new_nonvar_words(stream, tat: TagTable) -> list:
    """Distinct non-variable words of the message absent from the tag table."""
    new = {}
    for token in stream:
        kind, text = _word_of(token)
        if kind in (WordKind.TAG, WordKind.ATTR_NAME, WordKind.ATTR_VALUE):
            if text not in tat:
                new.setdefault(text, None)
    return list(new)


def stbe(stream, st: SymbolTable, tat: TagTable, ctx: TatContext,
         access=()) -> EncryptedMessage:
    """Symbol-table-based encryption; grows the tag table as a side effect."""
    new = _new_nonvar_words(stream, tat)
    ctx.begin_message(len(tat), len(new))
    words = []
    for token in stream:
        kind, text = _word_of(token)
        if kind is WordKind.CLOSER:
            words.append("0")
            continue
        words.append(encode_word(text, kind, st))
        if kind is not WordKind.VARIABLE:
            tat_upsert(tat, ctx, text, kind.value, st)
    return EncryptedMessage(tuple(access), tuple(words))


def tatbe(stream, st: SymbolTable, tat: TagTable, ctx: TatContext,
          access=()) -> EncryptedMessage:
    """Tag-table-based encryption.

    Known non-variable words emit their short code; words new in this message
    fall back to the symbol-table form for every occurrence (the peer may not
    hold the entry yet) and enter the table for the next message.
    """
    new = _new_nonvar_words(stream, tat)
    ctx.begin_message(len(tat), len(new))
    introduced = set(new)
    words = []
    for token in stream:
        kind, text = _word_of(token)
        if kind is WordKind.CLOSER:
            words.append("0")
        elif kind is WordKind.VARIABLE:
            words.append(encode_word(text, kind, st))
        elif text in introduced:
            words.append(encode_word(text, kind, st))
            tat_upsert(tat, ctx, text, kind.value, st)
        else:
            words.append(_MARKER[kind] + str(tat.code_for(text)))
    return EncryptedMessage(tuple(access), tuple(words))


def _decoded_nonvars(words, st: SymbolTable, tat: TagTable, *, tat_lookup: bool):
    """First pass over a message: decode every marked word to its text.

    Returns {word index: text} for non-variable words and the list of
    distinct texts absent from the tag table, in order of first appearance.
    """
    texts = {}
    new = {}
    for i, word in enumerate(words):
        kind, payload = strip_marker(word)
        if kind in (WordKind.CLOSER, WordKind.VARIABLE):
            continue
        if kind is WordKind.DIGEST:
            raise MalformedWord("digest word outside a signed message")
        if tat_lookup and tat.has_code(int(payload)):
            texts[i] = tat.word_for(int(payload))
            continue
        if tat_lookup and len(payload) % st.width:
            raise UnknownTatCode(
                f"word {word!r}: code {payload} unknown and no character encoding"
            )
        text = decode_chars(payload, st)
        texts[i] = text
        if text not in tat:
            new.setdefault(text, None)
    return texts, list(new)


def _rebuild_stream(words, texts, st, tat, ctx) -> tuple:
    tokens = []
    depth = 0
    for i, word in enumerate(words):
        kind, payload = strip_marker(word)
        if kind is WordKind.CLOSER:
            if depth == 0:
                raise UnbalancedClosers(f"closer at word {i} with no open tag")
            depth -= 1
            tokens.append(Close())
        elif kind is WordKind.VARIABLE:
            tokens.append(Variable(decode_chars(payload, st)))
        else:
            text = texts[i]
            if text not in tat:
                tat_upsert(tat, ctx, text, kind.value, st)
            if kind is WordKind.TAG:
                depth += 1
                tokens.append(Open(text))
            elif kind is WordKind.ATTR_NAME:
                tokens.append(AttrName(text))
            else:
                tokens.append(AttrValue(text))
    if depth:
        raise UnbalancedClosers(f"{depth} tags left open at end of message")
    return tuple(tokens)


def stbd(msg: EncryptedMessage, st: SymbolTable, tat: TagTable,
         ctx: TatContext) -> tuple:
    """Inverse of stbe; rebuilds the tag table exactly as the encoder did."""
    texts, new = _decoded_nonvars(msg.words, st, tat, tat_lookup=False)
    ctx.begin_message(len(tat), len(new))
    return _rebuild_stream(msg.words, texts, st, tat, ctx)


def tatbd(msg: EncryptedMessage, st: SymbolTable, tat: TagTable,
          ctx: TatContext) -> tuple:
    """Inverse of tatbe: tag-table lookup first, character decoding as the
    fallback for words introduced in this message."""
    texts, new = _decoded_nonvars(msg.words, st, tat, tat_lookup=True)
    ctx.begin_message(len(tat), len(new))
    return _rebuild_stream(msg.words, texts, st, tat, ctx)


@dataclass
class Session:
    """Per-peer state: one key, its symbol table, and the shared tag table."""

    key: TenElementKey
    st: SymbolTable
    tat: TagTable
    ctx: TatContext

    @classmethod
    def for_key(cls, key: TenElementKey) -> "Session":
        return cls(key, build_st(key), TagTable(), TatContext())

    def encrypt(self, stream, mode: str = "st", access=()) -> EncryptedMessage:
        if mode == "st":
            return stbe(stream, self.st, self.tat, self.ctx, access)
        if mode == "tat":
            return tatbe(stream, self.st, self.tat, self.ctx, access)
        raise ValueError(f"unknown mode {mode!r}")

    def decrypt(self, msg: EncryptedMessage, mode: str = "tat") -> tuple:
        if mode == "st":
            return stbd(msg, self.st, self.tat, self.ctx)
        if mode == "tat":
            return tatbd(msg, self.st, self.tat, self.ctx)
        raise ValueError(f"unknown mode {mode!r}")
