import random

import pytest

from restcipher import build_st, generate_key, parse_key, serialize_key, validate_key
from restcipher.errors import (
    CapacityExceeded,
    Malformed,
    NoValidKeyInBounds,
    OutOfRange,
    WidthTooSmall,
)

from conftest import K1_TEXT, K2_TEXT, K3_TEXT
from oracle import oracle_max_cell_value


def test_paper_key_is_valid():
    key = validate_key([12, 6, 1, 1, 1, 14, 4, 1, 3, 2])
    assert key.rows == 12 and key.cols == 6 and key.power == 2


def test_start_with_must_be_a_bit():
    with pytest.raises(OutOfRange) as exc:
        validate_key([12, 6, 2, 1, 1, 14, 4, 1, 3, 2])
    assert exc.value.index == 2


@pytest.mark.parametrize(
    "index,candidate",
    [
        (0, [0, 6, 1, 1, 1, 14, 4, 1, 3, 2]),
        (1, [12, 0, 1, 1, 1, 14, 4, 1, 3, 2]),
        (3, [12, 6, 1, 2, 1, 14, 4, 1, 3, 2]),
        (4, [12, 6, 1, 1, -1, 14, 4, 1, 3, 2]),
        (5, [12, 6, 1, 1, 1, 64, 4, 1, 3, 2]),
        (6, [12, 6, 1, 1, 1, 14, 0, 1, 3, 2]),
        (6, [12, 6, 1, 1, 1, 14, 73, 1, 3, 2]),
        (7, [12, 6, 1, 1, 1, 14, 4, 5, 3, 2]),
        (8, [12, 6, 1, 1, 1, 14, 4, 1, 0, 2]),
        (9, [12, 6, 1, 1, 1, 14, 4, 1, 3, 0]),
    ],
)
def test_out_of_range_elements(index, candidate):
    with pytest.raises(OutOfRange) as exc:
        validate_key(candidate)
    assert exc.value.index == index


def test_width_too_small():
    # the widest header pair is 18,6 -> 360, three digits
    key = [12, 6, 1, 1, 1, 14, 4, 1, 2, 2]
    assert len(str(oracle_max_cell_value(key))) == 3
    with pytest.raises(WidthTooSmall):
        validate_key(key)


def test_charset_must_fit_the_table():
    # arrangement 14 holds 62 characters, a 6x6 table only 36 cells
    with pytest.raises(CapacityExceeded):
        validate_key([6, 6, 1, 1, 1, 14, 4, 1, 3, 2])


def test_code_space_must_fit_the_charset():
    # one-digit codes offer 9 values; no arrangement is that small, so any
    # final_sum=1 key dies on capacity before the width check can pass
    with pytest.raises(CapacityExceeded):
        validate_key([4, 3, 0, 0, 0, 2, 1, 0, 1, 1])


def test_group_size_may_reach_rows_times_cols():
    assert validate_key([12, 6, 1, 1, 1, 14, 72, 1, 3, 2]).group_size == 72


def test_wrong_arity_is_malformed():
    with pytest.raises(Malformed):
        validate_key([12, 6])


def test_generate_within_bounds():
    rng = random.Random(11)
    key = generate_key({"rows": (4, 16), "cols": (4, 16), "power": (1, 3)}, rng=rng)
    assert 4 <= key.rows <= 16 and 4 <= key.cols <= 16 and 1 <= key.power <= 3
    assert validate_key(key.as_tuple()) == key


def test_generate_impossible_bounds():
    rng = random.Random(5)
    with pytest.raises(NoValidKeyInBounds):
        generate_key(
            {"rows": (1, 1), "cols": (1, 1), "symbol_type": (63, 63)},
            rng=rng, attempts=50,
        )


def test_generate_is_deterministic_under_seed():
    first = generate_key(rng=random.Random(99))
    second = generate_key(rng=random.Random(99))
    assert first == second


def test_generate_raises_final_sum_to_passing_width():
    rng = random.Random(3)
    for _ in range(50):
        key = generate_key({"final_sum": (1, 1)}, rng=rng)
        assert validate_key(key.as_tuple()) == key


@pytest.mark.parametrize("text", [K1_TEXT, K2_TEXT, K3_TEXT])
def test_serialize_matches_published_form(text):
    assert serialize_key(parse_key(text)) == text


def test_parse_rejects_wrong_arity():
    with pytest.raises(Malformed):
        parse_key("[12,6]")


def test_parse_rejects_whitespace():
    with pytest.raises(Malformed):
        parse_key("[12, 6,1,1,1,14,4,1,3,2]")


@pytest.mark.parametrize("text", ["", "12,6,1,1,1,14,4,1,3,2", "[12,6,1,1,1,14,4,1,3,2", "[]"])
def test_parse_rejects_malformed(text):
    with pytest.raises(Malformed):
        parse_key(text)


def test_round_trip_on_random_keys():
    rng = random.Random(21)
    for _ in range(50):
        key = generate_key(rng=rng)
        assert parse_key(serialize_key(key)) == key


def test_accepted_keys_always_build_tables():
    """Exhaustive small-bound sweep: validate_key admits nothing build_st
    cannot handle."""
    rng = random.Random(7)
    checked = 0
    for _ in range(4000):
        candidate = [
            rng.randint(1, 9), rng.randint(1, 9), rng.randint(0, 1),
            rng.randint(0, 1), rng.randint(0, 1), rng.randint(0, 63),
            rng.randint(1, 81), rng.randint(0, 1), rng.randint(1, 5),
            rng.randint(1, 3),
        ]
        try:
            key = validate_key(candidate)
        except (OutOfRange, CapacityExceeded, WidthTooSmall):
            continue
        table = build_st(key)
        assert len(table) > 0
        checked += 1
    assert checked > 20
