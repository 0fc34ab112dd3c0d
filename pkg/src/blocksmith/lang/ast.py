"""Abstract syntax for machine descriptions, specs, lowerings, and programs.

Nodes are frozen dataclasses so they hash and compare structurally; the
golden-file tests rely on that. Every node carries an optional source
position for diagnostics (None for synthesized nodes).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

from .types import Type, Width


@dataclass(frozen=True)
class Pos:
    file: str
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}"


class UnOp(Enum):
    NEG = "-"        # int negation
    BNEG = "b-"      # bitvector two's complement negate
    NOT = "!"        # boolean not
    BNOT = "bnot"    # bitwise not


class BinOp(Enum):
    EQ = "=="
    NE = "!="
    ADD = "+"
    SUB = "-"
    MUL = "*"
    DIV = "/"
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="
    AND = "&&"
    OR = "||"
    XOR = "^^"
    SHL = "<<"
    SHR = ">>"
    SHRS = ">>s"
    BAND = "band"
    BOR = "bor"
    BXOR = "bxor"
    BADD = "b+"
    BSUB = "b-"
    BMUL = "b*"
    BDIV = "b/"
    ULT = "b<"
    ULE = "b<="
    UGT = "b>"
    UGE = "b>="
    SLT = "bs<"
    SLE = "bs<="
    SGT = "bs>"
    SGE = "bs>="
    UNION = "union"
    INTER = "inter"
    SUBSET = "subset"
    SETMINUS = "setminus"
    IN = "in"


# ---------------------------------------------------------------- expressions

class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class EInt(Expr):
    value: int
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class EBitvec(Expr):
    width: int
    value: int
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class EBool(Expr):
    value: bool
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class EString(Expr):
    value: str
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class EId(Expr):
    name: str
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class EUnop(Expr):
    op: UnOp
    arg: Expr
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class EBinop(Expr):
    op: BinOp
    left: Expr
    right: Expr
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class EDeref(Expr):
    """*e reads the register e names."""
    arg: Expr
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class EFetch(Expr):
    """fetch(e, C) reads a C-bit cell through the pointer e."""
    addr: Expr
    width: Width
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class EIndex(Expr):
    """e[C], a single bit; bit 0 is least significant."""
    arg: Expr
    index: Width
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class ESlice(Expr):
    """e[C1, C2], bits C1 inclusive to C2 exclusive."""
    arg: Expr
    lo: Width
    hi: Width
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class EApp(Expr):
    func: str
    args: tuple[Expr, ...]
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class ELet(Expr):
    var: str
    ty: Type
    bound: Expr
    body: Expr
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class EIf(Expr):
    cond: Expr
    then: Expr
    els: Expr
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class EPtr(Expr):
    """[region, e] pointer literal; spec files only."""
    region: str
    offset: Expr
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class ETxt(Expr):
    """e.txt, the assembler spelling of a register; extraction-time only."""
    arg: Expr
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class EBranchTo(Expr):
    """branchto(x): did the block leave through the external label x."""
    label: str
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class ERegSet(Expr):
    members: tuple[str, ...]
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class EAscribe(Expr):
    """(e : ty). Coerces int literals into bitvectors; otherwise a check."""
    arg: Expr
    ty: Type
    pos: Optional[Pos] = field(default=None, compare=False)


# ----------------------------------------------------------------- statements

class Stmt:
    __slots__ = ()


@dataclass(frozen=True)
class SSkip(Stmt):
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class SCrash(Stmt):
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class SSeq(Stmt):
    stmts: tuple[Stmt, ...]
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class SAssign(Stmt):
    """*dest <- value."""
    dest: Expr
    value: Expr
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class SStore(Stmt):
    """store(addr, C) <- value."""
    addr: Expr
    width: Width
    value: Expr
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class SIf(Stmt):
    cond: Expr
    then: Stmt
    els: Stmt
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class SLet(Stmt):
    var: str
    ty: Type
    bound: Expr
    body: Stmt
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class SFor(Stmt):
    """for x = C1 to C2 do S done; bounds inclusive, binder is an int."""
    var: str
    lo: int
    hi: int
    body: Stmt
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class SAssert(Stmt):
    cond: Expr
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class SBranch(Stmt):
    """BRANCH(e): e is an 8-bit skip count, 0xff meaning the external label."""
    arg: Expr
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class SCall(Stmt):
    proc: str
    args: tuple[Expr, ...]
    pos: Optional[Pos] = field(default=None, compare=False)


# --------------------------------------------------------------- declarations

class Decl:
    __slots__ = ()


@dataclass(frozen=True)
class DType(Decl):
    name: str
    ty: Type
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class DLet(Decl):
    name: str
    ty: Type
    value: Expr
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class DLetTxt(Decl):
    """let x.txt = e, the assembler spelling for register x."""
    reg: str
    value: Expr
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class DDef(Decl):
    name: str
    params: tuple[tuple[str, Type], ...]
    result: Type
    body: Expr
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class DProc(Decl):
    name: str
    params: tuple[tuple[str, Type], ...]
    body: Stmt
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class DRegState(Decl):
    name: str
    ty: Type
    control: bool = False
    dontgate: bool = False
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class DMemState(Decl):
    name: str
    ty: Type  # a MemType
    label: Optional[str] = None
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class DInvariant(Decl):
    cond: Expr
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class DDefop(Decl):
    name: str
    params: tuple[tuple[str, Type], ...]
    txt: Expr
    sem: Stmt
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class DFrameRegs(Decl):
    """frame: modify: r1 r2 ... (spec files and lowering modules)."""
    regs: tuple[str, ...]
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class DFrameMem(Decl):
    """frame: modify-mem: [R, e] ... pointer expressions naming cells."""
    cells: tuple[Expr, ...]
    pos: Optional[Pos] = field(default=None, compare=False)


# ------------------------------------------------------- file-level structures

@dataclass(frozen=True)
class MachineFile:
    decls: tuple[Decl, ...]
    defops: tuple[DDefop, ...]


@dataclass(frozen=True)
class SpecFile:
    """A machine-dependent spec: decls, frames, one pre, one post."""
    decls: tuple[Decl, ...]
    frame_regs: tuple[str, ...]
    frame_mems: tuple[Expr, ...]
    pre: Expr
    post: Expr


@dataclass(frozen=True)
class LoweringModule:
    name: str
    decls: tuple[Decl, ...]
    frame_regs: tuple[str, ...]
    frame_mems: tuple[Expr, ...]
    imports: tuple[str, ...] = ()


@dataclass(frozen=True)
class LoweringFile:
    modules: tuple[LoweringModule, ...]


# Portable (machine-independent) spec declarations.

class AleDecl:
    __slots__ = ()


@dataclass(frozen=True)
class ARequireType(AleDecl):
    name: str
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class ARequireValue(AleDecl):
    name: str
    ty: Type
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class ARequireFunc(AleDecl):
    name: str
    params: tuple[Type, ...]
    result: Type
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class AProvideType(AleDecl):
    name: str
    ty: Type
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class AProvideValue(AleDecl):
    name: str
    ty: Type
    value: Expr
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class AProvideFunc(AleDecl):
    name: str
    params: tuple[tuple[str, Type], ...]
    result: Type
    body: Expr
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class ARegion(AleDecl):
    name: str
    ty: Type  # MemType, possibly with symbolic widths
    label: Optional[str] = None
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class ABlockLet(AleDecl):
    """let x: ty = e outside pre/post; scoped over the whole block and
    evaluated against the initial machine state."""
    name: str
    ty: Type
    value: Expr
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class AleSpec:
    decls: tuple[AleDecl, ...]
    lower_with: tuple[str, ...]
    frame_regs: tuple[str, ...]
    frame_mems: tuple[Expr, ...]
    pre: Expr
    post: Expr


# Instruction-sequence files: one (OP operand ...) per line.

@dataclass(frozen=True)
class Instruction:
    opcode: str
    operands: tuple[Expr, ...]
    pos: Optional[Pos] = field(default=None, compare=False)


Program = tuple[Instruction, ...]
