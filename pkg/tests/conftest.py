import pytest

from restcipher import CompositionPolicy, KeyRing, Session, parse_key

XML1 = '<root attr1="value1" attr2="value2"><name>iiti</name><value>2</value></root>'
XML2 = (
    '<root attr1="value1" attr2="value2">'
    "<name>iiti</name><value>2</value><nv>a1</nv></root>"
)
JSON1 = '{"root": {"-attr1": "value1", "-attr2": "value2", "name": "iiti", "value": "2"}}'

K1_TEXT = "[12,6,1,1,1,14,4,1,3,2]"
K2_TEXT = "[6,12,1,0,1,14,3,1,3,2]"
K3_TEXT = "[7,10,0,0,1,14,3,0,3,2]"

STENC_XML1 = (
    "1, 0117126126104 00153104104117340 000850153137820146340 "
    "00153104104117349 000850153137820146349 0116153109146 122122104122 0 "
    "0850153137820146 349 0 0"
)
TATENC_XML1 = "1, 04 008 0002 009 0003 05 122122104122 0 06 349 0 0"
TATENC_XML2 = "1, 04 008 0002 009 0003 05 122122104122 0 06 349 0 0116850 153340 0 0"

COMPOSE_ST_BODY = (
    "0232325325180 00137180180232257 000136137126157314257 "
    "00137180180232226 000136137126157314226 0116153109146 122122104122 0 "
    "0291356265326320 313 0 0410291 356290 0 0"
)

D1 = "adc1aeffe1fe867740f976fd55c0c481"
D2 = "72afa9838090da9c5d82d2060c42f48c"


@pytest.fixture
def k1():
    return parse_key(K1_TEXT)


@pytest.fixture
def k2():
    return parse_key(K2_TEXT)


@pytest.fixture
def k3():
    return parse_key(K3_TEXT)


@pytest.fixture
def session_k1(k1):
    return Session.for_key(k1)


@pytest.fixture
def ring(k1, k2, k3):
    ring = KeyRing()
    ring.add_key("K1", k1)
    ring.add_key("K2", k2)
    ring.add_key("K3", k3, is_group=True)
    return ring


@pytest.fixture
def policy():
    return CompositionPolicy({2: "K1", 3: "K2", 4: "K2"})


def make_ring(k1, k2, k3, *ids):
    """Ring restricted to the given key ids; K3 is always the group key."""
    keys = {"K1": k1, "K2": k2, "K3": k3}
    ring = KeyRing()
    for key_id in ids:
        ring.add_key(key_id, keys[key_id], is_group=(key_id == "K3"))
    return ring
