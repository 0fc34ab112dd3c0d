"""Runtime values and the operators over them.

Every runtime error is the first-class value FAIL, never an exception;
callers propagate it. The interpreter and the symbolic engine both route
their arithmetic through bv_binop/unop/bit_extract/builtin so the two
cannot disagree about operator semantics.

Pointers are (region, byte offset) pairs. They type as bitvectors of the
region's pointer width but stay tagged at runtime: equality against a plain
bitvector is false, not an error, and only b+/b- (offset adjustment, modulo
the pointer width taken from the bitvector operand) and same-region
unsigned comparisons are defined. Everything else on a pointer fails.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .ast import BinOp, UnOp


class Value:
    __slots__ = ()


@dataclass(frozen=True)
class BoolVal(Value):
    value: bool

    def __str__(self) -> str:
        return "true" if self.value else "false"


@dataclass(frozen=True)
class IntVal(Value):
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class Bitvec(Value):
    width: int
    bits: int

    def __post_init__(self) -> None:
        if self.width <= 0:
            raise ValueError(f"bitvector width must be positive, got {self.width}")
        if not 0 <= self.bits < (1 << self.width):
            raise ValueError(f"bits 0x{self.bits:x} do not fit in {self.width}")

    def __str__(self) -> str:
        if self.width % 4 == 0:
            return f"0x{self.bits:0{self.width // 4}x}"
        return f"0b{self.bits:0{self.width}b}"


@dataclass(frozen=True)
class Pointer(Value):
    region: str
    offset: int

    def __post_init__(self) -> None:
        if self.offset < 0:
            raise ValueError("pointer offsets are non-negative")

    def __str__(self) -> str:
        return f"[{self.region}, {self.offset}]"


@dataclass(frozen=True)
class RegRef(Value):
    """The identity of a register; letstate allocates one per declaration."""
    reg: str

    def __str__(self) -> str:
        return self.reg


@dataclass(frozen=True)
class RegSetVal(Value):
    width: int
    members: frozenset[str]

    def __str__(self) -> str:
        return "{" + ", ".join(sorted(self.members)) + "}"


@dataclass(frozen=True)
class StrVal(Value):
    value: str

    def __str__(self) -> str:
        return repr(self.value)


@dataclass(frozen=True)
class FailVal(Value):
    def __str__(self) -> str:
        return "fail"


FAIL = FailVal()
TRUE = BoolVal(True)
FALSE = BoolVal(False)


def _mask(width: int) -> int:
    return (1 << width) - 1


def to_signed(bits: int, width: int) -> int:
    if bits & (1 << (width - 1)):
        return bits - (1 << width)
    return bits


_INT_ARITH = {BinOp.ADD, BinOp.SUB, BinOp.MUL, BinOp.DIV}
_INT_CMP = {BinOp.LT, BinOp.LE, BinOp.GT, BinOp.GE}
_BV_ARITH = {BinOp.BADD, BinOp.BSUB, BinOp.BMUL, BinOp.BDIV}
_BV_BITS = {BinOp.BAND, BinOp.BOR, BinOp.BXOR, BinOp.SHL, BinOp.SHR, BinOp.SHRS}
_BV_UCMP = {BinOp.ULT, BinOp.ULE, BinOp.UGT, BinOp.UGE}
_BV_SCMP = {BinOp.SLT, BinOp.SLE, BinOp.SGT, BinOp.SGE}
_SET_OPS = {BinOp.UNION, BinOp.INTER, BinOp.SUBSET, BinOp.SETMINUS}


def unop(op: UnOp, v: Value) -> Value:
    if isinstance(v, FailVal):
        return FAIL
    if op is UnOp.NOT:
        return BoolVal(not v.value) if isinstance(v, BoolVal) else FAIL
    if op is UnOp.NEG:
        return IntVal(-v.value) if isinstance(v, IntVal) else FAIL
    if op is UnOp.BNEG:
        if isinstance(v, Bitvec):
            return Bitvec(v.width, (-v.bits) & _mask(v.width))
        return FAIL
    if op is UnOp.BNOT:
        if isinstance(v, Bitvec):
            return Bitvec(v.width, ~v.bits & _mask(v.width))
        return FAIL
    return FAIL


def _cmp(op: BinOp, a: int, b: int) -> bool:
    if op in (BinOp.LT, BinOp.ULT, BinOp.SLT):
        return a < b
    if op in (BinOp.LE, BinOp.ULE, BinOp.SLE):
        return a <= b
    if op in (BinOp.GT, BinOp.UGT, BinOp.SGT):
        return a > b
    return a >= b


def values_equal(v1: Value, v2: Value) -> Optional[bool]:
    """Equality per the language: pointers and bitvectors never compare
    equal to each other even when the bit patterns agree. None means the
    comparison itself is an error (width mismatch, kind mismatch)."""
    if isinstance(v1, Pointer) and isinstance(v2, Pointer):
        return v1.region == v2.region and v1.offset == v2.offset
    if isinstance(v1, Pointer) and isinstance(v2, Bitvec):
        return False
    if isinstance(v1, Bitvec) and isinstance(v2, Pointer):
        return False
    if isinstance(v1, Bitvec) and isinstance(v2, Bitvec):
        if v1.width != v2.width:
            return None
        return v1.bits == v2.bits
    if type(v1) is not type(v2):
        return None
    if isinstance(v1, (BoolVal, IntVal, StrVal)):
        return v1.value == v2.value
    if isinstance(v1, RegRef):
        return v1.reg == v2.reg
    if isinstance(v1, RegSetVal):
        return v1.members == v2.members
    return None


def bv_binop(op: BinOp, v1: Value, v2: Value) -> Value:
    """Apply a binary operator to two concrete values."""
    if isinstance(v1, FailVal) or isinstance(v2, FailVal):
        return FAIL

    if op is BinOp.EQ or op is BinOp.NE:
        eq = values_equal(v1, v2)
        if eq is None:
            return FAIL
        return BoolVal(eq if op is BinOp.EQ else not eq)

    if op in (BinOp.AND, BinOp.OR, BinOp.XOR):
        if isinstance(v1, BoolVal) and isinstance(v2, BoolVal):
            a, b = v1.value, v2.value
            r = (a and b) if op is BinOp.AND else (a or b) if op is BinOp.OR else (a != b)
            return BoolVal(r)
        return FAIL

    if op in _INT_ARITH or op in _INT_CMP:
        if not (isinstance(v1, IntVal) and isinstance(v2, IntVal)):
            return FAIL
        a, b = v1.value, v2.value
        if op is BinOp.ADD:
            return IntVal(a + b)
        if op is BinOp.SUB:
            return IntVal(a - b)
        if op is BinOp.MUL:
            return IntVal(a * b)
        if op is BinOp.DIV:
            if b == 0:
                return FAIL
            q = abs(a) // abs(b)
            return IntVal(q if (a >= 0) == (b >= 0) else -q)
        return BoolVal(_cmp(op, a, b))

    if op in (BinOp.BADD, BinOp.BSUB):
        # pointer +/- bitvector moves the offset, wrapping in the pointer
        # width, which the bitvector operand carries
        if isinstance(v1, Pointer) and isinstance(v2, Bitvec):
            delta = v2.bits if op is BinOp.BADD else -v2.bits
            return Pointer(v1.region, (v1.offset + delta) & _mask(v2.width))
        if isinstance(v1, Bitvec) and isinstance(v2, Pointer) and op is BinOp.BADD:
            return Pointer(v2.region, (v2.offset + v1.bits) & _mask(v1.width))
        if isinstance(v1, Pointer) or isinstance(v2, Pointer):
            return FAIL

    if op in _BV_ARITH or op in _BV_BITS:
        if not (isinstance(v1, Bitvec) and isinstance(v2, Bitvec)):
            return FAIL
        if v1.width != v2.width:
            return FAIL
        w, a, b = v1.width, v1.bits, v2.bits
        if op is BinOp.BADD:
            return Bitvec(w, (a + b) & _mask(w))
        if op is BinOp.BSUB:
            return Bitvec(w, (a - b) & _mask(w))
        if op is BinOp.BMUL:
            return Bitvec(w, (a * b) & _mask(w))
        if op is BinOp.BDIV:
            return FAIL if b == 0 else Bitvec(w, a // b)
        if op is BinOp.BAND:
            return Bitvec(w, a & b)
        if op is BinOp.BOR:
            return Bitvec(w, a | b)
        if op is BinOp.BXOR:
            return Bitvec(w, a ^ b)
        if op is BinOp.SHL:
            return Bitvec(w, (a << b) & _mask(w)) if b < w else Bitvec(w, 0)
        if op is BinOp.SHR:
            return Bitvec(w, a >> b) if b < w else Bitvec(w, 0)
        if op is BinOp.SHRS:
            s = to_signed(a, w)
            return Bitvec(w, (s >> min(b, w - 1)) & _mask(w))

    if op in _BV_UCMP or op in _BV_SCMP:
        if isinstance(v1, Pointer) and isinstance(v2, Pointer):
            # ordering only exists within one region, and only unsigned
            if op in _BV_SCMP or v1.region != v2.region:
                return FAIL
            return BoolVal(_cmp(op, v1.offset, v2.offset))
        if not (isinstance(v1, Bitvec) and isinstance(v2, Bitvec)):
            return FAIL
        if v1.width != v2.width:
            return FAIL
        if op in _BV_SCMP:
            return BoolVal(_cmp(op, to_signed(v1.bits, v1.width), to_signed(v2.bits, v2.width)))
        return BoolVal(_cmp(op, v1.bits, v2.bits))

    if op in _SET_OPS:
        if not (isinstance(v1, RegSetVal) and isinstance(v2, RegSetVal)):
            return FAIL
        if v1.width != v2.width:
            return FAIL
        if op is BinOp.UNION:
            return RegSetVal(v1.width, v1.members | v2.members)
        if op is BinOp.INTER:
            return RegSetVal(v1.width, v1.members & v2.members)
        if op is BinOp.SETMINUS:
            return RegSetVal(v1.width, v1.members - v2.members)
        return BoolVal(v1.members <= v2.members)

    if op is BinOp.IN:
        if isinstance(v1, RegRef) and isinstance(v2, RegSetVal):
            return BoolVal(v1.reg in v2.members)
        return FAIL

    return FAIL


def bit_extract(v: Value, lo: int, hi: Optional[int] = None) -> Value:
    """e[lo] or e[lo, hi); bit 0 is the least significant. Pointers have
    no accessible bits."""
    if not isinstance(v, Bitvec):
        return FAIL
    if hi is None:
        if not 0 <= lo < v.width:
            return FAIL
        return Bitvec(1, (v.bits >> lo) & 1)
    if not (0 <= lo < hi <= v.width):
        return FAIL
    return Bitvec(hi - lo, (v.bits >> lo) & _mask(hi - lo))


# ------------------------------------------------------------------- builtins

# Format placeholders come in two interchangeable spellings, "{1}" and "$1",
# both 1-based. "$$" escapes a dollar sign, "{{" and "}}" escape braces.


def _scan_format(fmt: str, args: Optional[list[str]]) -> tuple[int, Optional[str]]:
    """Walk a format string once; returns (max placeholder index, expansion).
    The expansion is None when args is None (arity-only scan) or on a
    reference past the end of args."""
    out: Optional[list[str]] = None if args is None else []
    arity = 0
    i = 0
    bad = False

    def emit(s: str) -> None:
        if out is not None:
            out.append(s)

    def subst(idx: int) -> None:
        nonlocal arity, bad
        arity = max(arity, idx)
        if args is not None:
            if 1 <= idx <= len(args):
                emit(args[idx - 1])
            else:
                bad = True

    while i < len(fmt):
        c = fmt[i]
        if c == "$" and i + 1 < len(fmt):
            if fmt[i + 1] == "$":
                emit("$")
                i += 2
                continue
            if fmt[i + 1].isdigit():
                j = i + 1
                while j < len(fmt) and fmt[j].isdigit():
                    j += 1
                subst(int(fmt[i + 1:j]))
                i = j
                continue
        if c == "{" and i + 1 < len(fmt):
            if fmt[i + 1] == "{":
                emit("{")
                i += 2
                continue
            j = i + 1
            while j < len(fmt) and fmt[j].isdigit():
                j += 1
            if j > i + 1 and j < len(fmt) and fmt[j] == "}":
                subst(int(fmt[i + 1:j]))
                i = j + 1
                continue
        if c == "}" and i + 1 < len(fmt) and fmt[i + 1] == "}":
            emit("}")
            i += 2
            continue
        emit(c)
        i += 1

    if bad:
        return arity, None
    return arity, None if out is None else "".join(out)


def format_arity(fmt: str) -> int:
    """Highest placeholder index in a format string."""
    return _scan_format(fmt, None)[0]


def _format(fmt: str, args: list[str]) -> Optional[str]:
    return _scan_format(fmt, args)[1]


def builtin(name: str, args: list[Value]) -> Value:
    """The pure built-in functions. lbl and textlabel need evaluator context
    (label identities, extraction state) and live in the interpreter."""
    if any(isinstance(a, FailVal) for a in args):
        return FAIL

    if name == "empty":
        if len(args) == 1 and isinstance(args[0], IntVal) and args[0].value > 0:
            return RegSetVal(args[0].value, frozenset())
        return FAIL

    if name in ("hex", "dec", "bin"):
        if len(args) != 1:
            return FAIL
        v = args[0]
        if isinstance(v, IntVal):
            n, width = v.value, None
        elif isinstance(v, Bitvec):
            n, width = v.bits, v.width
        else:
            return FAIL
        if name == "dec":
            return StrVal(str(n))
        if name == "hex":
            if width is not None and width % 4 == 0:
                return StrVal(f"0x{n:0{width // 4}x}")
            return StrVal(hex(n))
        if width is not None:
            return StrVal(f"0b{n:0{width}b}")
        return StrVal(bin(n))

    if name == "bv_to_len":
        if len(args) == 2 and isinstance(args[0], IntVal) and isinstance(args[1], Bitvec):
            w = args[0].value
            if w <= 0:
                return FAIL
            return Bitvec(w, args[1].bits & _mask(w))
        return FAIL

    if name == "bv_to_uint":
        if len(args) == 1 and isinstance(args[0], Bitvec):
            return IntVal(args[0].bits)
        return FAIL

    if name == "uint_to_bv_l":
        if len(args) == 2 and isinstance(args[0], IntVal) and isinstance(args[1], IntVal):
            w = args[0].value
            if w <= 0:
                return FAIL
            return Bitvec(w, args[1].value & _mask(w))
        return FAIL

    if name in ("isptr", "is_ptr"):
        if len(args) == 1 and isinstance(args[0], (Bitvec, Pointer)):
            return BoolVal(isinstance(args[0], Pointer))
        return FAIL

    if name == "format":
        if not args or not all(isinstance(a, StrVal) for a in args):
            return FAIL
        fmt = args[0].value
        rest = [a.value for a in args[1:]]
        if format_arity(fmt) != len(rest):
            return FAIL
        out = _format(fmt, rest)
        return FAIL if out is None else StrVal(out)

    return FAIL


PURE_BUILTINS = frozenset(
    ["empty", "hex", "dec", "bin", "bv_to_len", "bv_to_uint", "uint_to_bv_l",
     "isptr", "is_ptr", "format"]
)

CONTEXT_BUILTINS = frozenset(["lbl", "textlabel"])

ALL_BUILTINS = PURE_BUILTINS | CONTEXT_BUILTINS
