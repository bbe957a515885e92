"""Independent brute-force re-derivation of the table construction.

Everything here is recomputed from first principles (header numbering, fill
order, group reversal, cell values, collision chains) with deliberately
different data layouts than the library, so tests can compare the two
implementations entry by entry.  Keep this module free of imports from the
package under test.
"""

from itertools import combinations, permutations

SMALL = "abcdefghijklmnopqrstuvwxyz"
CAPITAL = SMALL.upper()
DIGIT = "0123456789"
SPECIAL = "".join(
    chr(c) for c in range(0x20, 0x7F) if chr(c) not in SMALL + CAPITAL + DIGIT
)
CLASS_CHARS = {"small": SMALL, "capital": CAPITAL, "digit": DIGIT, "special": SPECIAL}


def oracle_arrangements():
    ranked = ("small", "capital", "digit", "special")
    table = []
    for size in (1, 2, 3, 4):
        for subset in combinations(ranked, size):
            table.extend(permutations(subset))
    table[14], table[21] = table[21], table[14]
    return table


def oracle_charset(symbol_type):
    return "".join(CLASS_CHARS[c] for c in oracle_arrangements()[symbol_type])


def oracle_headers(key):
    """Row headers top-to-bottom and column headers left-to-right."""
    rows, cols, start_with, row_rev, col_rev = key[:5]
    if start_with == 1:
        col_nums = list(range(1, cols + 1))
        row_nums = list(range(cols + 1, cols + rows + 1))
    else:
        row_nums = list(range(1, rows + 1))
        col_nums = list(range(rows + 1, rows + cols + 1))
    if row_rev == 1:
        row_nums = row_nums[::-1]
    if col_rev == 1:
        col_nums = col_nums[::-1]
    return row_nums, col_nums


def oracle_layout(key):
    """Map character -> (rh, ch), using index arithmetic instead of a grid."""
    rows, cols = key[0], key[1]
    group_size, reverse = key[6], key[7]
    chars = oracle_charset(key[5])
    row_nums, col_nums = oracle_headers(key)
    placed = {}
    for i, ch in enumerate(chars):
        if reverse == 1:
            group, offset = divmod(i, group_size)
            last = min(group_size - 1, len(chars) - 1 - group * group_size)
            cell = group * group_size + (last - offset)
        else:
            cell = i
        r, c = divmod(cell, cols)
        if r >= rows:
            raise AssertionError("charset does not fit the table")
        placed[ch] = (row_nums[r], col_nums[c])
    return placed


def oracle_symbol_table(key):
    """Character -> code map with the increment-and-wrap collision rule."""
    rows, cols = key[0], key[1]
    final_sum, power = key[8], key[9]
    placed = oracle_layout(key)
    row_nums, col_nums = oracle_headers(key)
    # visit non-header cells row-major, top-left to bottom-right
    by_cell = {pos: ch for ch, pos in placed.items()}
    lo, hi = 10 ** (final_sum - 1), 10 ** final_sum - 1
    table = {}
    used = set()
    for r in range(rows):
        for c in range(cols):
            ch = by_cell.get((row_nums[r], col_nums[c]))
            if ch is None:
                continue
            value = row_nums[r] ** power + col_nums[c] ** power
            digits = len(str(value))
            if digits <= final_sum:
                code = value * 10 ** (final_sum - digits)
            else:
                code = value // 10 ** (digits - final_sum)
            start = code
            while code in used:
                code = lo if code == hi else code + 1
                if code == start:
                    raise AssertionError("code space exhausted")
            used.add(code)
            table[ch] = code
    return table


def oracle_tat_code(st, existing_codes, word, digits_for_words):
    """Tag-table code for one word given the codes already taken."""
    total = sum(st[c] for c in word)
    width = len(str(total))
    if width <= digits_for_words:
        code = total * 10 ** (digits_for_words - width)
    else:
        code = total // 10 ** (width - digits_for_words)
    modulus = 10 ** digits_for_words
    for _ in range(modulus + 1):
        if code != 0 and code not in existing_codes:
            return code
        code = (code + 1) % modulus
    raise AssertionError("tag code space exhausted")


def oracle_tat_replay(st, words_per_message):
    """Replay message-by-message insertion; returns word -> code."""
    table = {}
    for words in words_per_message:
        new = [w for w in dict.fromkeys(words) if w not in table]
        count = len(table) + len(new)
        digits = len(str(count))
        for w in words:
            if w in table:
                continue
            code = oracle_tat_code(st, set(table.values()), w, digits)
            table[w] = code
    return table


def oracle_max_cell_value(key):
    """Largest rh^power + ch^power over every header pair."""
    row_nums, col_nums = oracle_headers(key)
    return max(r ** key[9] + c ** key[9] for r in row_nums for c in col_nums)
