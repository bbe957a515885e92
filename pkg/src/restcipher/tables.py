"""Key-derived tables.

``build_tt`` lays the key's charset into a header-numbered grid, ``build_st``
reads the grid into a character ↔ fixed-width-code bijection, and the tag
table maps whole non-variable words to short agreed integers, grown
identically by encoder and decoder.  The temporary table is only an
intermediate: callers normally go straight to ``build_st`` and drop it.
"""

from dataclasses import dataclass

from .charsets import arrangement_for, charset_for  # noqa: F401  (re-exported)
from .errors import CodeSpaceExhausted, UnknownCode, UnsupportedCharacter
from .keycore import TenElementKey


@dataclass(frozen=True)
class TempTable:
    """Character grid with numbered row/column headers."""

    rows: int
    cols: int
    row_headers: tuple          # top to bottom
    col_headers: tuple          # left to right
    grid: tuple                 # rows of cells; a cell is one character or None

    def cells(self):
        """Yield (char, rh, ch) over non-empty cells, row-major."""
        for r, row in enumerate(self.grid):
            for c, char in enumerate(row):
                if char is not None:
                    yield char, self.row_headers[r], self.col_headers[c]

    def locate(self, char: str) -> tuple:
        """(rh, ch) of a character."""
        for cell, rh, ch in self.cells():
            if cell == char:
                return rh, ch
        raise ValueError(f"character {char!r} not in table")


def _grouped_reverse(chars: list, size: int) -> list:
    out = []
    for i in range(0, len(chars), size):
        out.extend(reversed(chars[i:i + size]))
    return out


def build_tt(key: TenElementKey) -> TempTable:
    """Number the headers, fill the charset row-major, reverse groups in place."""
    if key.start_with == 1:
        col_nums = list(range(1, key.cols + 1))
        row_nums = list(range(key.cols + 1, key.cols + key.rows + 1))
    else:
        row_nums = list(range(1, key.rows + 1))
        col_nums = list(range(key.rows + 1, key.rows + key.cols + 1))
    if key.row_rev:
        row_nums.reverse()
    if key.col_rev:
        col_nums.reverse()

    chars = list(charset_for(key.symbol_type))
    if key.reverse:
        chars = _grouped_reverse(chars, key.group_size)
    chars += [None] * (key.rows * key.cols - len(chars))
    grid = tuple(
        tuple(chars[r * key.cols:(r + 1) * key.cols]) for r in range(key.rows)
    )
    return TempTable(key.rows, key.cols, tuple(row_nums), tuple(col_nums), grid)


def cell_value(tt: TempTable, cell: tuple, power: int) -> int:
    """rh**power + ch**power for a non-empty cell given as (row, col)."""
    r, c = cell
    if tt.grid[r][c] is None:
        raise ValueError(f"cell {cell} is empty")
    return tt.row_headers[r] ** power + tt.col_headers[c] ** power


class SymbolTable:
    """Bijection between characters and fixed-width decimal codes."""

    def __init__(self, width: int, entries):
        self.width = width
        self._by_char = {}
        self._by_code = {}
        for char, code in entries:
            if char in self._by_char or code in self._by_code:
                raise ValueError("symbol table entries must be bijective")
            if len(str(code)) != width or str(code)[0] == "0":
                raise ValueError(f"code {code} is not a {width}-digit code")
            self._by_char[char] = code
            self._by_code[code] = char

    def __len__(self):
        return len(self._by_char)

    def __contains__(self, char):
        return char in self._by_char

    def code_for(self, char: str) -> int:
        try:
            return self._by_char[char]
        except KeyError:
            raise UnsupportedCharacter(f"character {char!r} not in symbol table") from None

    def char_for(self, code: int) -> str:
        try:
            return self._by_code[code]
        except KeyError:
            raise UnknownCode(f"no symbol table entry for code {code}") from None

    def items(self):
        """(char, code) pairs in construction order."""
        return list(self._by_char.items())


def _adjust_width(value: int, width: int) -> int:
    """Pad with zeros up to width, or floor-truncate down to it."""
    digits = len(str(value))
    if digits <= width:
        return value * 10 ** (width - digits)
    return value // 10 ** (digits - width)


def build_st(key: TenElementKey) -> SymbolTable:
    """Derive the symbol table; the temporary table is discarded afterwards.

    Cells are visited row-major; a colliding code is incremented until free,
    wrapping from the largest width-digit value to the smallest.
    """
    tt = build_tt(key)
    lo = 10 ** (key.final_sum - 1)
    hi = 10 ** key.final_sum - 1
    entries = []
    used = set()
    for char, rh, ch in tt.cells():
        code = _adjust_width(rh ** key.power + ch ** key.power, key.final_sum)
        start = code
        while code in used:
            code = lo if code == hi else code + 1
            if code == start:
                raise CodeSpaceExhausted(
                    f"no free {key.final_sum}-digit code for {char!r}"
                )
        used.add(code)
        entries.append((char, code))
    return SymbolTable(key.final_sum, entries)


class TagTable:
    """Map from non-variable words to agreed integers, stable once assigned."""

    def __init__(self):
        self._by_word = {}      # word -> (code, kind)
        self._by_code = {}

    def __len__(self):
        return len(self._by_word)

    def __contains__(self, word):
        return word in self._by_word

    def code_for(self, word: str) -> int:
        return self._by_word[word][0]

    def kind_for(self, word: str) -> str:
        return self._by_word[word][1]

    def has_code(self, code: int) -> bool:
        return code in self._by_code

    def word_for(self, code: int) -> str:
        return self._by_code[code]

    def insert(self, word: str, code: int, kind: str) -> None:
        if word in self._by_word or code in self._by_code:
            raise ValueError("tag table entries must be bijective")
        if code < 1:
            raise ValueError("tag codes are positive")
        self._by_word[word] = (code, kind)
        self._by_code[code] = word

    def items(self):
        """(word, code, kind) in insertion order."""
        return [(w, c, k) for w, (c, k) in self._by_word.items()]


@dataclass
class TatContext:
    """Per-message insertion counters for the tag table.

    ``word_count`` is the number of non-variable words in play once the
    current message is fully absorbed; ``code_digits`` the width used for new
    codes.  Both are fixed by begin_message before any insertion.
    """

    word_count: int = 0
    code_digits: int = 0

    def begin_message(self, existing: int, new: int) -> None:
        self.word_count = existing + new
        # ceil(log10(n+1)) equals the decimal digit count of n for n >= 1
        self.code_digits = len(str(self.word_count)) if self.word_count else 0


def tat_upsert(tat: TagTable, ctx: TatContext, word: str, kind: str,
               st: SymbolTable) -> int:
    """Return the word's agreed code, inserting it on first sight.

    ctx must already account for every new word of the current message; both
    peers replay the same insertion order and land on identical codes.
    """
    if word in tat:
        return tat.code_for(word)
    total = sum(st.code_for(char) for char in word)
    code = _adjust_width(total, ctx.code_digits) if ctx.code_digits else 0
    modulus = 10 ** ctx.code_digits
    for _ in range(modulus + 1):
        if code != 0 and not tat.has_code(code):
            tat.insert(word, code, kind)
            return code
        code = (code + 1) % modulus
    raise CodeSpaceExhausted(f"no free {ctx.code_digits}-digit tag code")
