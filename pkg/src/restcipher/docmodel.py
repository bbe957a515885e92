"""One canonical word-stream for XML and JSON payloads.

Equivalent XML and JSON documents tokenize to the identical stream, so both
encrypt to the identical ciphertext and either form can be emitted back.  The
supported subset is deliberately small: elements, attributes, and text
leaves, all within printable ASCII.  Mixed content, comments, processing
instructions, CDATA, DOCTYPEs, and namespaces are rejected.
"""

import json
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass

from .charsets import is_printable
from .errors import (
    MalformedJson,
    MalformedXml,
    MixedContentUnsupported,
    UnsupportedCharacter,
    UnsupportedShape,
)


@dataclass(frozen=True)
class Open:
    name: str


@dataclass(frozen=True)
class AttrName:
    name: str


@dataclass(frozen=True)
class AttrValue:
    text: str


@dataclass(frozen=True)
class Variable:
    text: str


@dataclass(frozen=True)
class Close:
    pass


CLOSE = Close()

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.\-]*")


def _check_printable(text: str, what: str) -> None:
    if not is_printable(text):
        bad = next(c for c in text if not is_printable(c))
        raise UnsupportedCharacter(f"{what} contains non-printable {bad!r} (U+{ord(bad):04X})")


def _check_name(name: str, exc=MalformedXml) -> None:
    _check_printable(name, "name")
    if not _NAME_RE.fullmatch(name):
        raise exc(f"invalid name {name!r}")


# XML side


def _reject_unsupported_markup(text: str) -> None:
    # markup cannot occur unescaped inside text or attributes, so a raw scan
    # is sound for a well-formed document
    if "<!--" in text:
        raise MalformedXml("comments are not supported")
    if "<![CDATA[" in text:
        raise MalformedXml("CDATA sections are not supported")
    if "<!DOCTYPE" in text:
        raise MalformedXml("DOCTYPEs are not supported")
    if re.search(r"<\?(?!xml[\s?])", text):
        raise MalformedXml("processing instructions are not supported")


def parse_xml(text: str) -> tuple:
    """Tokenize an XML document into the canonical word stream."""
    _reject_unsupported_markup(text)
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise MalformedXml(str(exc)) from None
    tokens = []
    _walk_xml(root, tokens)
    return tuple(tokens)


def _walk_xml(elem, tokens: list) -> None:
    name = elem.tag
    if not isinstance(name, str):
        raise MalformedXml("only plain elements are supported")
    if "{" in name or ":" in name:
        raise MalformedXml(f"namespaced element {name!r} is not supported")
    _check_name(name)
    tokens.append(Open(name))
    for attr, value in elem.attrib.items():
        if "{" in attr or ":" in attr or attr.startswith("xmlns"):
            raise MalformedXml(f"namespaced attribute {attr!r} is not supported")
        _check_name(attr)
        if value == "":
            raise UnsupportedShape(f"empty value for attribute {attr!r}")
        _check_printable(value, f"attribute {attr!r}")
        tokens.append(AttrName(attr))
        tokens.append(AttrValue(value))
    children = list(elem)
    if children:
        if elem.text and elem.text.strip():
            raise MixedContentUnsupported(f"element {name!r} mixes text and children")
        for child in children:
            _walk_xml(child, tokens)
            if child.tail and child.tail.strip():
                raise MixedContentUnsupported(f"element {name!r} mixes text and children")
    elif elem.text and elem.text.strip():
        # leaf text is kept verbatim; whitespace-only text counts as
        # inter-element whitespace and yields an empty element
        _check_printable(elem.text, f"text of {name!r}")
        tokens.append(Variable(elem.text))
    tokens.append(CLOSE)


# JSON side


def parse_json(text: str) -> tuple:
    """Tokenize a JSON document (XML-mapping convention) into the stream.

    Names are tags, names prefixed "-" are attributes, scalars are variable
    words, and an array repeats its tag once per element.
    """
    try:
        data = json.loads(text)
    except ValueError as exc:
        raise MalformedJson(str(exc)) from None
    if not isinstance(data, dict):
        raise UnsupportedShape("top level must be a JSON object")
    if len(data) != 1:
        raise UnsupportedShape("exactly one root name is required")
    ((name, value),) = data.items()
    if name.startswith("-"):
        raise UnsupportedShape("the root name cannot be an attribute")
    if isinstance(value, list):
        raise UnsupportedShape("the root cannot be an array")
    tokens = []
    _walk_json(name, value, tokens)
    return tuple(tokens)


def _scalar_text(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, (int, float)):
        return json.dumps(value)
    raise UnsupportedShape(f"expected a scalar, got {type(value).__name__}")


def _walk_json(name: str, value, tokens: list) -> None:
    _check_name(name, exc=UnsupportedShape)
    tokens.append(Open(name))
    if isinstance(value, dict):
        seen_child = False
        for key, item in value.items():
            if key.startswith("-"):
                if seen_child:
                    raise UnsupportedShape("attributes must precede child names")
                attr = key[1:]
                if not attr:
                    raise UnsupportedShape("empty attribute name")
                _check_name(attr, exc=UnsupportedShape)
                text = _scalar_text(item)
                if text == "":
                    raise UnsupportedShape(f"empty value for attribute {attr!r}")
                _check_printable(text, f"attribute {attr!r}")
                tokens.append(AttrName(attr))
                tokens.append(AttrValue(text))
            else:
                seen_child = True
                if isinstance(item, list):
                    if not item:
                        raise UnsupportedShape(f"empty array under {key!r}")
                    for member in item:
                        if isinstance(member, list):
                            raise UnsupportedShape("nested arrays are not supported")
                        _walk_json(key, member, tokens)
                else:
                    _walk_json(key, item, tokens)
    else:
        text = _scalar_text(value)
        if not text.strip():
            raise UnsupportedShape("variable text must contain a non-space character")
        _check_printable(text, f"value of {name!r}")
        tokens.append(Variable(text))
    tokens.append(CLOSE)


# stream validation and emission


def validate_stream(stream) -> None:
    """Assert the word-stream invariants; raises ValueError on structural
    violations and UnsupportedShape on unrepresentable values."""

    def element(i: int) -> int:
        if i >= len(stream) or not isinstance(stream[i], Open):
            raise ValueError(f"expected an opening tag at token {i}")
        _check_name(stream[i].name, exc=ValueError)
        i += 1
        while i < len(stream) and isinstance(stream[i], AttrName):
            _check_name(stream[i].name, exc=ValueError)
            if i + 1 >= len(stream) or not isinstance(stream[i + 1], AttrValue):
                raise ValueError(f"attribute name without value at token {i}")
            if stream[i + 1].text == "":
                raise UnsupportedShape("empty attribute value")
            _check_printable(stream[i + 1].text, "attribute value")
            i += 2
        if i < len(stream) and isinstance(stream[i], Variable):
            if not stream[i].text.strip():
                raise UnsupportedShape("variable text must contain a non-space character")
            _check_printable(stream[i].text, "variable text")
            i += 1
        else:
            while i < len(stream) and isinstance(stream[i], Open):
                i = element(i)
        if i >= len(stream) or not isinstance(stream[i], Close):
            raise ValueError(f"unterminated or mixed element at token {i}")
        return i + 1

    if not stream:
        raise ValueError("empty stream")
    end = element(0)
    if end != len(stream):
        raise ValueError("content after the root element")


def _escape_text(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _escape_attr(text: str) -> str:
    return _escape_text(text).replace('"', "&quot;")


def emit_xml(stream) -> str:
    """Canonical XML: double-quoted attributes, single spaces, no self-closing."""
    validate_stream(stream)
    parts = []
    stack = []
    i = 0
    while i < len(stream):
        token = stream[i]
        if isinstance(token, Open):
            parts.append(f"<{token.name}")
            stack.append(token.name)
            i += 1
            while isinstance(stream[i], AttrName):
                parts.append(f' {stream[i].name}="{_escape_attr(stream[i + 1].text)}"')
                i += 2
            parts.append(">")
        elif isinstance(token, Variable):
            parts.append(_escape_text(token.text))
            i += 1
        else:  # Close
            parts.append(f"</{stack.pop()}>")
            i += 1
    return "".join(parts)


class _Node:
    __slots__ = ("name", "attrs", "children", "text")

    def __init__(self, name):
        self.name = name
        self.attrs = []
        self.children = []
        self.text = None


def _build_tree(stream) -> _Node:
    root = None
    stack = []
    i = 0
    while i < len(stream):
        token = stream[i]
        if isinstance(token, Open):
            node = _Node(token.name)
            if stack:
                stack[-1].children.append(node)
            else:
                root = node
            stack.append(node)
        elif isinstance(token, AttrName):
            stack[-1].attrs.append((token.name, stream[i + 1].text))
            i += 1
        elif isinstance(token, Variable):
            stack[-1].text = token.text
        else:
            stack.pop()
        i += 1
    return root


def _node_value(node: _Node):
    if node.text is not None:
        if node.attrs:
            raise UnsupportedShape(
                f"element {node.name!r} has both attributes and text; "
                "JSON cannot represent it"
            )
        return node.text
    if not node.attrs and not node.children:
        return {}
    obj = {}
    for name, value in node.attrs:
        obj["-" + name] = value
    runs = []
    for child in node.children:
        if runs and runs[-1][0] == child.name:
            runs[-1][1].append(child)
        else:
            runs.append((child.name, [child]))
    names = [name for name, _ in runs]
    if len(names) != len(set(names)):
        raise UnsupportedShape(
            "same-name siblings must be adjacent to map onto a JSON array"
        )
    for name, members in runs:
        if len(members) == 1:
            obj[name] = _node_value(members[0])
        else:
            obj[name] = [_node_value(m) for m in members]
    return obj


def emit_json(stream) -> str:
    """Canonical JSON for the stream; all scalars emit as strings."""
    validate_stream(stream)
    root = _build_tree(stream)
    return json.dumps({root.name: _node_value(root)})


def tag_ordinals(stream) -> dict:
    """Stream index of each opening tag -> its 1-based document-order ordinal."""
    ordinals = {}
    count = 0
    for i, token in enumerate(stream):
        if isinstance(token, Open):
            count += 1
            ordinals[i] = count
    return ordinals


def tag_names(stream) -> dict:
    """Ordinal -> tag name, for policy display and configuration."""
    return {
        ordinal: stream[index].name for index, ordinal in tag_ordinals(stream).items()
    }


_NUMBER_RE = re.compile(r"-?(?:0|[1-9][0-9]*)(?:\.[0-9]+)?(?:[eE][+-]?[0-9]+)?")


def variable_type(text: str) -> str:
    """Best-effort type tag recovered from decrypted variable text."""
    if text in ("true", "false"):
        return "boolean"
    if text == "null":
        return "null"
    if _NUMBER_RE.fullmatch(text):
        return "number"
    return "string"
