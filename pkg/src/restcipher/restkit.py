"""Loopback HTTP demonstration harness.

Two pieces: a resource server / client pair exercising the two-party flow
(key exchange, symbol-table first response, tag-table responses after), and
a three-party composition pipeline in which a main server S fans a multi-key
signed document out to providers SP1 and SP2, each of which edits only the
variables of its own tags and passes everything else through byte-identical.

Everything runs over plain HTTP on loopback; real deployments terminate TLS
in front.  Bodies are text/plain and no custom header is used.
"""

import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .codec import EncryptedMessage, Session
from .composition import (
    CompositionPolicy,
    KeyRing,
    OpaqueRun,
    Status,
    access_header,
    attach_digests,
    compose_decrypt,
    compose_encrypt,
    compose_reencrypt,
    recipient_resolver,
    refresh_digests,
    strip_digests,
    subtree_spans,
    verify_digests,
)
from .docmodel import Close, Open, Variable, emit_xml, parse_json, parse_xml, tag_ordinals
from .errors import BadRequest, Bind, RestCipherError, VerificationFailed
from .keycore import TenElementKey, parse_key, validate_key
from .keyxchg import GET_KEY_COMMAND, KeyStore, handle_key_request, http_get, http_post

PLAIN_HTTP_WARNING = (
    "serving plain HTTP on loopback; the key exchange is unprotected, "
    "terminate TLS in front for anything beyond demonstration"
)


@dataclass
class TranscriptEntry:
    direction: str
    uri: str
    body: str
    kind: str = "message"


def format_transcript(entries) -> str:
    return "\n".join(f"{e.direction}\t{e.uri}\t{e.body}" for e in entries)


def _parse_document(text: str):
    if text.lstrip().startswith("<"):
        return parse_xml(text)
    return parse_json(text)


class _QuietHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    def log_message(self, format, *args):  # noqa: A002 - stdlib signature
        pass

    def _read_body(self) -> str:
        length = int(self.headers.get("Content-Length") or 0)
        return self.rfile.read(length).decode("ascii")

    def _reply(self, status: int, body: str) -> None:
        data = body.encode("ascii")
        self.send_response(status)
        self.send_header("Content-Type", "text/plain")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)


class _HttpService:
    """Thread-backed ThreadingHTTPServer wrapper."""

    def __init__(self, handler_cls, host: str, port: int):
        try:
            self._httpd = ThreadingHTTPServer((host, port), handler_cls)
        except OSError as exc:
            raise Bind(f"cannot bind {host}:{port}: {exc}") from None
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self):
        self._thread.start()
        return self

    def close(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()


@dataclass
class _PeerState:
    session: Session
    st_sent: bool = False
    lock: threading.Lock = field(default_factory=threading.Lock)


class ResourceServer(_HttpService):
    """Encrypting resource server for the two-party flow.

    POST /<peer> "Get key"  -> new session key for that peer
    GET  /<peer>            -> encrypted resource (ST first, TAT after)
    POST /<peer> ""         -> ST-encrypted resource representation
    POST /<peer> <message>  -> decode update, store it, reply encrypted
    """

    def __init__(self, document: str, *, host: str = "127.0.0.1", port: int = 0,
                 rng=None, bounds=None):
        self.stream = _parse_document(document)
        self.store = KeyStore()
        self.peers = {}
        self._rng = rng
        self._bounds = bounds
        server = self

        class Handler(_QuietHandler):
            def do_POST(self):
                server._handle(self, self._read_body())

            def do_GET(self):
                server._handle(self, None)

        super().__init__(Handler, host, port)

    def _handle(self, http, body) -> None:
        peer_id = http.path.strip("/")
        if not peer_id or "/" in peer_id:
            http._reply(404, "error: BadRequest: unknown resource")
            return
        try:
            if body is not None and body == GET_KEY_COMMAND:
                reply = handle_key_request(body, peer_id, self.store,
                                           rng=self._rng, bounds=self._bounds)
                key = self.store.get(peer_id, "session").key
                self.peers[peer_id] = _PeerState(Session.for_key(key))
                http._reply(200, reply)
                return
            state = self.peers.get(peer_id)
            if state is None:
                http._reply(409, "no session key")
                return
            with state.lock:
                if body:
                    # non-empty POST carries an encrypted update of the resource
                    msg = EncryptedMessage.parse(body)
                    self.stream = state.session.decrypt(msg, mode="tat")
                if body == "" or not state.st_sent:
                    # empty POST asks for the resource representation; the first
                    # response of a session is always symbol-table encrypted
                    reply = state.session.encrypt(self.stream, mode="st", access=(1,))
                    state.st_sent = True
                else:
                    reply = state.session.encrypt(self.stream, mode="tat", access=(1,))
            http._reply(200, reply.serialize())
        except RestCipherError as exc:
            http._reply(400, f"error: {exc.name}: {exc}")


def serve(document: str, **kwargs) -> ResourceServer:
    """Start a ResourceServer; caller closes it."""
    server = ResourceServer(document, **kwargs)
    server.start()
    return server


class ResourceClient:
    """Client side of the two-party flow against one peer id."""

    def __init__(self, base_url: str, peer_id: str = "client"):
        self.url = f"{base_url}/{peer_id}"
        self.peer_id = peer_id
        self.session = None

    def exchange_key(self) -> TenElementKey:
        key = parse_key(http_post(self.url, GET_KEY_COMMAND))
        self.session = Session.for_key(key)
        return key

    def fetch(self):
        """GET the resource; returns (message, decoded stream)."""
        if self.session is None:
            raise BadRequest("exchange a key first")
        msg = EncryptedMessage.parse(http_get(self.url))
        return msg, self.session.decrypt(msg, mode="tat")

    def fetch_representation(self):
        """Empty POST; returns the ST-encrypted resource representation."""
        if self.session is None:
            raise BadRequest("exchange a key first")
        msg = EncryptedMessage.parse(http_post(self.url, ""))
        return msg, self.session.decrypt(msg, mode="tat")

    def push(self, stream, mode: str = "tat"):
        """POST an encrypted update; returns the decoded reply."""
        if self.session is None:
            raise BadRequest("exchange a key first")
        body = self.session.encrypt(stream, mode=mode, access=(1,)).serialize()
        msg = EncryptedMessage.parse(http_post(self.url, body))
        return msg, self.session.decrypt(msg, mode="tat")


# three-party composition pipeline

#: keys of the worked three-party exchange
SCENARIO_KEYS = {
    "K1": (12, 6, 1, 1, 1, 14, 4, 1, 3, 2),
    "K2": (6, 12, 1, 0, 1, 14, 3, 1, 3, 2),
    "K3": (7, 10, 0, 0, 1, 14, 3, 0, 3, 2),
}

SCENARIO_DOCUMENT = (
    '<root attr1="value1" attr2="value2">'
    "<name>iiti</name><value>2</value><nv>a1</nv></root>"
)


@dataclass
class ScenarioConfig:
    document: str = SCENARIO_DOCUMENT
    keys: dict = None                    # key id -> TenElementKey
    group_id: str = "K3"
    policy: dict = None                  # ordinal -> key id
    providers: dict = None               # provider name -> its pairwise key id
    edits: dict = None                   # provider -> {ordinal: new variable text}
    mode: str = "tat"
    tamper: tuple = None                 # (provider name, foreign ordinal)
    host: str = "127.0.0.1"

    def __post_init__(self):
        if self.keys is None:
            self.keys = {kid: validate_key(k) for kid, k in SCENARIO_KEYS.items()}
        if self.policy is None:
            self.policy = {2: "K1", 3: "K2", 4: "K2"}
        if self.providers is None:
            self.providers = {"SP1": "K1", "SP2": "K2"}
        if self.edits is None:
            self.edits = {"SP1": {2: "iitd"}, "SP2": {3: "7", 4: "b2"}}


@dataclass
class ScenarioResult:
    transcript: list
    verdicts: dict                       # stage label -> list of Verdict
    final_document: str = None
    final_stream: tuple = None
    halted: bool = False
    reject_ordinals: tuple = ()


def _subtree_token_span(stream, ordinal: int):
    """(start, end) token indexes of a tag subtree, closer inclusive."""
    ordinals = tag_ordinals(stream)
    start = next(i for i, o in ordinals.items() if o == ordinal)
    depth = 0
    for i in range(start, len(stream)):
        if isinstance(stream[i], Open):
            depth += 1
        elif isinstance(stream[i], Close):
            depth -= 1
            if depth == 0:
                return start, i
    raise ValueError(f"no subtree for ordinal {ordinal}")


def _apply_edits(items: list, edits: dict) -> list:
    """Replace the variable text under the given tag ordinals (token items)."""
    out = list(items)
    ordinal = 0
    stack = []
    for i, item in enumerate(out):
        if isinstance(item, OpaqueRun):
            ordinal += 1 + item.opens_inside
        elif isinstance(item, Open):
            ordinal += 1
            stack.append(ordinal)
        elif isinstance(item, Close):
            stack.pop()
        elif isinstance(item, Variable) and stack and stack[-1] in edits:
            out[i] = Variable(edits[stack[-1]])
    return out


def _tamper_words(words: list, spans_ordinal: int) -> list:
    """Flip the last digit of a word inside the given subtree."""
    spans, digests = subtree_spans(words, allow_digests=True)
    span = spans[spans_ordinal]
    digest_indexes = set(digests.values())
    out = list(words)
    for i in range(span.start, span.end + 1):
        word = out[i]
        if i not in digest_indexes and len(word) > 1:
            last = word[-1]
            flipped = str((int(last) + 1) % 10) if last.isdigit() else "0"
            out[i] = word[:-1] + flipped
            return out
    raise ValueError(f"no word to tamper inside tag {spans_ordinal}")


class _Provider(_HttpService):
    """Intermediary service: verify, decode own tags, edit, re-sign, reply."""

    def __init__(self, name: str, pairwise: tuple, group: tuple, config):
        self.name = name
        self.ring = KeyRing()
        self.ring.add_key(pairwise[0], pairwise[1])
        self.ring.add_key(group[0], group[1], is_group=True)
        self.edits = config.edits.get(name, {})
        self.mode = config.mode
        self.tamper = config.tamper if config.tamper and config.tamper[0] == name else None
        self.verdicts = []
        self._lock = threading.Lock()
        provider = self

        class Handler(_QuietHandler):
            def do_POST(self):
                body = self._read_body()
                try:
                    with provider._lock:
                        reply = provider.process(body)
                    self._reply(200, reply)
                except RestCipherError as exc:
                    self._reply(400, f"error: {exc.name}: {exc}")

        super().__init__(Handler, config.host, 0)

    def process(self, body: str) -> str:
        msg = EncryptedMessage.parse(body)
        verdicts = verify_digests(msg, self.ring)
        self.verdicts = verdicts
        if any(v.status is Status.REJECT for v in verdicts):
            raise VerificationFailed(f"{self.name} rejects the incoming message")
        stripped, preserved = strip_digests(msg.words)
        items = compose_decrypt(EncryptedMessage(msg.access, tuple(stripped)), self.ring)
        items = _apply_edits(items, self.edits)
        resolve = recipient_resolver(msg.access, self.ring)
        policy_view = CompositionPolicy({o: resolve(o) for o in msg.access})
        words = compose_reencrypt(items, policy_view, self.ring, self.mode)
        signed = refresh_digests(words, self.ring, resolve, preserved)
        if self.tamper:
            signed = _tamper_words(signed, self.tamper[1])
        return EncryptedMessage(msg.access, tuple(signed)).serialize()


def run_composition_scenario(config: ScenarioConfig = None) -> ScenarioResult:
    """S -> SP1/SP2 -> S: encrypt, sign, edit, verify, assemble.

    The honest run returns the final edited document; a tampering provider
    halts the pipeline with Reject verdicts on the touched tags.
    """
    config = config or ScenarioConfig()
    stream = _parse_document(config.document)
    policy = CompositionPolicy(dict(config.policy))
    tag_count = len(tag_ordinals(stream))

    ring = KeyRing()
    for key_id, key in config.keys.items():
        ring.add_key(key_id, key, is_group=(key_id == config.group_id))

    providers = {}
    for name, pair_id in config.providers.items():
        provider = _Provider(
            name, (pair_id, config.keys[pair_id]),
            (config.group_id, config.keys[config.group_id]), config,
        )
        provider.start()
        providers[name] = provider

    transcript = []
    verdicts = {}
    try:
        body = compose_encrypt(stream, policy, ring, config.mode)
        signed = attach_digests(body, policy, ring)

        replies = {}
        for name, provider in providers.items():
            access = access_header(policy, ring, [config.providers[name]], tag_count)
            message = EncryptedMessage(access, tuple(signed)).serialize()
            uri = f"{provider.url}/process"
            transcript.append(TranscriptEntry(f"S->{name}", uri, message))
            reply = http_post(uri, message)
            transcript.append(TranscriptEntry(f"{name}->S", uri, reply))
            reply_msg = EncryptedMessage.parse(reply)
            stage = verify_digests(reply_msg, ring, policy)
            verdicts[f"S<-{name}"] = stage
            rejected = tuple(v.ordinal for v in stage if v.status is Status.REJECT)
            if rejected:
                return ScenarioResult(transcript, verdicts, halted=True,
                                      reject_ordinals=rejected)
            replies[name] = reply_msg

        # assemble: take each provider's edited subtrees, everything else from S's copy
        final = list(stream)
        for name, provider in providers.items():
            stripped, _ = strip_digests(replies[name].words)
            items = compose_decrypt(
                EncryptedMessage(replies[name].access, tuple(stripped)), ring, policy
            )
            decoded = tuple(items)  # full ring + policy: no opaque runs remain
            for ordinal in replies[name].access:
                src = _subtree_token_span(decoded, ordinal)
                dst = _subtree_token_span(tuple(final), ordinal)
                final[dst[0]:dst[1] + 1] = list(decoded[src[0]:src[1] + 1])
        final = tuple(final)
        document = emit_xml(final)
        transcript.append(TranscriptEntry("S", "final", document, kind="document"))
        return ScenarioResult(transcript, verdicts, final_document=document,
                              final_stream=final)
    finally:
        for provider in providers.values():
            provider.close()
