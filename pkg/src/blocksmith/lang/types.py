"""Type algebra shared by the machine-description and portable spec languages.

Base types are unit, int, bool, string, width-indexed bitvectors, and the
three register-ish types (reg, regset, label), all parameterized by a bit
width. Memory regions and functions are second class and never nest inside
base types. Widths are plain Python ints; the portable spec language additionally
allows an identifier where a width is expected, which is resolved away
during lowering (see SymWidth). Positivity is the typechecker's
well-formedness judgment, not a construction invariant, so that parsed
types can be rejected with a source position.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

# A width is either a resolved positive int or, in portable specs only, a
# named symbolic constant that lowering must resolve.
Width = Union[int, "SymWidth"]


@dataclass(frozen=True)
class SymWidth:
    name: str

    def __str__(self) -> str:
        return self.name


class Type:
    """Root of the type hierarchy. Concrete types are frozen dataclasses."""

    __slots__ = ()


@dataclass(frozen=True)
class UnitType(Type):
    def __str__(self) -> str:
        return "unit"


@dataclass(frozen=True)
class IntType(Type):
    def __str__(self) -> str:
        return "int"


@dataclass(frozen=True)
class BoolType(Type):
    def __str__(self) -> str:
        return "bool"


@dataclass(frozen=True)
class StringType(Type):
    def __str__(self) -> str:
        return "string"


@dataclass(frozen=True)
class BitType(Type):
    width: Width


    def __str__(self) -> str:
        return f"{self.width} bit"


@dataclass(frozen=True)
class RegType(Type):
    width: Width


    def __str__(self) -> str:
        return f"{self.width} reg"


@dataclass(frozen=True)
class RegSetType(Type):
    width: Width


    def __str__(self) -> str:
        return f"{self.width} regset"


@dataclass(frozen=True)
class LabelType(Type):
    width: Width


    def __str__(self) -> str:
        return f"{self.width} label"


@dataclass(frozen=True)
class PtrType(Type):
    """Portable-spec pointer type; erased to BitType by lowering."""

    width: Width


    def __str__(self) -> str:
        return f"{self.width} ptr"


@dataclass(frozen=True)
class MemType(Type):
    """cell_width bit cells, length of them, addressed by ref_width pointers."""

    cell_width: Width
    length: Width
    ref_width: Width


    def __str__(self) -> str:
        return f"{self.cell_width} bit {self.length} len {self.ref_width} ref"


@dataclass(frozen=True)
class FuncType(Type):
    params: tuple[Type, ...]
    result: Type

    def __str__(self) -> str:
        ps = " ".join(str(p) for p in self.params)
        return f"({ps}) -> {self.result}"


@dataclass(frozen=True)
class AliasType(Type):
    name: str

    def __str__(self) -> str:
        return self.name


UNIT = UnitType()
INT = IntType()
BOOL = BoolType()
STRING = StringType()


def is_base(t: Type) -> bool:
    """Base types may appear in lets, operands, and function signatures."""
    return not isinstance(t, (MemType, FuncType))


def resolve_alias(t: Type, aliases: dict[str, Type]) -> Type:
    """Chase alias names to the underlying type. Cycles are a caller bug;
    the parser and typechecker reject rebinding, so chains are finite."""
    while isinstance(t, AliasType):
        if t.name not in aliases:
            raise KeyError(f"unknown type alias {t.name!r}")
        t = aliases[t.name]
    return t
