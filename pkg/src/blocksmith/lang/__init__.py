"""Core language definitions shared by every stage of the pipeline."""

from . import ast, types, values
from .state import (
    EXT,
    EXTBRANCH,
    NEXT,
    BExt,
    BNext,
    BranchState,
    BSkip,
    MachineDesc,
    MachineState,
)
from .types import (
    BOOL,
    INT,
    STRING,
    UNIT,
    AliasType,
    BitType,
    BoolType,
    FuncType,
    IntType,
    LabelType,
    MemType,
    PtrType,
    RegSetType,
    RegType,
    StringType,
    SymWidth,
    Type,
    UnitType,
    is_base,
    resolve_alias,
)
from .values import (
    FAIL,
    FALSE,
    TRUE,
    Bitvec,
    BoolVal,
    FailVal,
    IntVal,
    Pointer,
    RegRef,
    RegSetVal,
    StrVal,
    Value,
    bit_extract,
    builtin,
    bv_binop,
    unop,
    values_equal,
)

__all__ = [
    "ast", "types", "values",
    "BranchState", "BNext", "BSkip", "BExt", "NEXT", "EXT", "EXTBRANCH",
    "MachineState", "MachineDesc",
    "Type", "UnitType", "IntType", "BoolType", "StringType", "BitType",
    "RegType", "RegSetType", "LabelType", "PtrType", "MemType", "FuncType",
    "AliasType", "SymWidth", "UNIT", "INT", "BOOL", "STRING",
    "is_base", "resolve_alias",
    "Value", "BoolVal", "IntVal", "Bitvec", "Pointer", "RegRef", "RegSetVal",
    "StrVal", "FailVal", "FAIL", "TRUE", "FALSE",
    "unop", "bv_binop", "bit_extract", "builtin", "values_equal",
]
