"""Static checking for machine descriptions, specs, and programs.

Every judgment is syntax-directed over the AST. Environments are threaded
functionally; a failure raises CheckError carrying the nearest position.

Widths may be written symbolically (e.g. `fetch(p, wordsize)`); they are
resolved against the integer-constant environment before any arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .lang import ast
from .lang.types import (
    BOOL, INT, STRING, UNIT, AliasType, BitType, FuncType, IntType, LabelType,
    MemType, PtrType, RegSetType, RegType, SymWidth, Type, Width,
)


class CheckError(Exception):
    def __init__(self, msg: str, pos: ast.Pos | None = None):
        self.msg = msg
        self.pos = pos
        where = f"{pos.line}:{pos.col}: " if pos else ""
        super().__init__(where + msg)


@dataclass
class TypeEnv:
    aliases: dict[str, Type] = field(default_factory=dict)
    vars: dict[str, Type] = field(default_factory=dict)
    consts: dict[str, int] = field(default_factory=dict)
    regions: dict[str, MemType] = field(default_factory=dict)
    txt_regs: set[str] = field(default_factory=set)
    in_post: bool = False

    def child(self) -> "TypeEnv":
        return TypeEnv(self.aliases, dict(self.vars), self.consts,
                       self.regions, self.txt_regs, self.in_post)

    def bind(self, name: str, ty: Type, pos: ast.Pos | None = None) -> None:
        if name in self.vars:
            raise CheckError(f"{name} is already bound", pos)
        self.vars[name] = ty


def resolve_width(env: TypeEnv, w: Width, pos: ast.Pos | None = None) -> int:
    if isinstance(w, SymWidth):
        if w.name not in env.consts:
            raise CheckError(f"width {w.name} is not an integer constant", pos)
        w = env.consts[w.name]
    if w <= 0:
        raise CheckError(f"width must be positive, got {w}", pos)
    return w


def resolve_type(env: TypeEnv, ty: Type, pos: ast.Pos | None = None) -> Type:
    """Chase aliases and force widths to integers."""
    seen = set()
    while isinstance(ty, AliasType):
        if ty.name in seen:
            raise CheckError(f"circular type alias {ty.name}", pos)
        seen.add(ty.name)
        if ty.name not in env.aliases:
            raise CheckError(f"unknown type {ty.name}", pos)
        ty = env.aliases[ty.name]
    if isinstance(ty, BitType):
        return BitType(resolve_width(env, ty.width, pos))
    if isinstance(ty, RegType):
        return RegType(resolve_width(env, ty.width, pos))
    if isinstance(ty, RegSetType):
        return RegSetType(resolve_width(env, ty.width, pos))
    if isinstance(ty, LabelType):
        return LabelType(resolve_width(env, ty.width, pos))
    if isinstance(ty, PtrType):
        return PtrType(resolve_width(env, ty.width, pos))
    if isinstance(ty, MemType):
        cell = resolve_width(env, ty.cell_width, pos)
        length = resolve_width(env, ty.length, pos)
        ref = resolve_width(env, ty.ref_width, pos)
        if cell % 8 != 0:
            raise CheckError(
                f"memory cell width {cell} is not a whole number of bytes", pos)
        return MemType(cell, length, ref)
    return ty


def wf_type(env: TypeEnv, ty: Type, pos: ast.Pos | None = None) -> Type:
    out = resolve_type(env, ty, pos)
    if isinstance(out, FuncType):
        raise CheckError("function types are not first-class", pos)
    return out


def assignable(have: Type, want: Type) -> bool:
    """Subsumption: a label may stand in for a bitvector of the same width."""
    if have == want:
        return True
    return (isinstance(have, LabelType) and isinstance(want, BitType)
            and have.width == want.width)


# -------------------------------------------------------------- expressions

_INT_ARITH = {ast.BinOp.ADD, ast.BinOp.SUB, ast.BinOp.MUL, ast.BinOp.DIV}
_INT_CMP = {ast.BinOp.LT, ast.BinOp.LE, ast.BinOp.GT, ast.BinOp.GE}
_BOOL_OPS = {ast.BinOp.AND, ast.BinOp.OR, ast.BinOp.XOR}
_BV_OPS = {ast.BinOp.BADD, ast.BinOp.BSUB, ast.BinOp.BMUL, ast.BinOp.BDIV,
           ast.BinOp.BAND, ast.BinOp.BOR, ast.BinOp.BXOR,
           ast.BinOp.SHL, ast.BinOp.SHR, ast.BinOp.SHRS}
_BV_CMP = {ast.BinOp.ULT, ast.BinOp.ULE, ast.BinOp.UGT, ast.BinOp.UGE,
           ast.BinOp.SLT, ast.BinOp.SLE, ast.BinOp.SGT, ast.BinOp.SGE}
_SET_OPS = {ast.BinOp.UNION, ast.BinOp.INTER, ast.BinOp.SETMINUS}


def _as_bits(ty: Type) -> BitType | None:
    if isinstance(ty, BitType):
        return ty
    if isinstance(ty, LabelType):
        return BitType(ty.width)
    return None


def type_expr(env: TypeEnv, e: ast.Expr) -> Type:
    if isinstance(e, ast.EInt):
        return INT
    if isinstance(e, ast.EBitvec):
        return BitType(e.width)
    if isinstance(e, ast.EBool):
        return BOOL
    if isinstance(e, ast.EString):
        return STRING
    if isinstance(e, ast.EId):
        if e.name not in env.vars:
            raise CheckError(f"unbound identifier {e.name}", e.pos)
        return env.vars[e.name]

    if isinstance(e, ast.EUnop):
        t = type_expr(env, e.arg)
        if e.op is ast.UnOp.NEG:
            if t != INT:
                raise CheckError("- expects an int", e.pos)
            return INT
        if e.op is ast.UnOp.NOT:
            if t != BOOL:
                raise CheckError("! expects a bool", e.pos)
            return BOOL
        bits = _as_bits(t)
        if bits is None:
            raise CheckError(f"{e.op.value} expects a bitvector, got {t}", e.pos)
        return bits

    if isinstance(e, ast.EBinop):
        return _type_binop(env, e)

    if isinstance(e, ast.EDeref):
        t = type_expr(env, e.arg)
        if not isinstance(t, RegType):
            raise CheckError(f"* expects a register, got {t}", e.pos)
        return BitType(t.width)

    if isinstance(e, ast.EFetch):
        addr = type_expr(env, e.addr)
        if _as_bits(addr) is None:
            raise CheckError(f"fetch address must be a bitvector, got {addr}",
                             e.pos)
        return BitType(resolve_width(env, e.width, e.pos))

    if isinstance(e, ast.EIndex):
        t = _as_bits(type_expr(env, e.arg))
        if t is None:
            raise CheckError("bit index expects a bitvector", e.pos)
        i = resolve_index(env, e.index, e.pos)
        if not 0 <= i < t.width:
            raise CheckError(f"bit {i} out of range for {t}", e.pos)
        return BitType(1)

    if isinstance(e, ast.ESlice):
        t = _as_bits(type_expr(env, e.arg))
        if t is None:
            raise CheckError("bit slice expects a bitvector", e.pos)
        lo = resolve_index(env, e.lo, e.pos)
        hi = resolve_index(env, e.hi, e.pos)
        if not 0 <= lo < hi <= t.width:
            raise CheckError(f"slice [{lo}, {hi}) out of range for {t}", e.pos)
        return BitType(hi - lo)

    if isinstance(e, ast.EApp):
        return _type_app(env, e)

    if isinstance(e, ast.ELet):
        ty = wf_type(env, e.ty, e.pos)
        bound = _check_bound(env, e.bound, ty, e.pos)
        inner = env.child()
        inner.bind(e.var, bound, e.pos)
        return type_expr(inner, e.body)

    if isinstance(e, ast.EIf):
        cond = type_expr(env, e.cond)
        if cond != BOOL:
            raise CheckError(f"if condition must be bool, got {cond}", e.pos)
        t1 = type_expr(env, e.then)
        t2 = type_expr(env, e.els)
        if t1 != t2:
            raise CheckError(f"if arms disagree: {t1} vs {t2}", e.pos)
        return t1

    if isinstance(e, ast.EPtr):
        if e.region not in env.regions:
            raise CheckError(f"unknown memory region {e.region}", e.pos)
        off = type_expr(env, e.offset)
        if off != INT:
            raise CheckError("pointer offset must be an int", e.pos)
        return BitType(env.regions[e.region].ref_width)

    if isinstance(e, ast.ETxt):
        t = type_expr(env, e.arg)
        if not isinstance(t, RegType):
            raise CheckError(".txt expects a register", e.pos)
        return STRING

    if isinstance(e, ast.EBranchTo):
        if not env.in_post:
            raise CheckError("branchto is only meaningful in a postcondition",
                             e.pos)
        return BOOL

    if isinstance(e, ast.ERegSet):
        widths = set()
        for name in e.members:
            t = env.vars.get(name)
            if not isinstance(t, RegType):
                raise CheckError(f"{name} is not a register", e.pos)
            widths.add(t.width)
        if len(widths) > 1:
            raise CheckError("register set mixes widths", e.pos)
        if not widths:
            raise CheckError("register set literal may not be empty", e.pos)
        return RegSetType(widths.pop())

    if isinstance(e, ast.EAscribe):
        ty = wf_type(env, e.ty, e.pos)
        # an int literal ascribed to a bitvector type is a literal of
        # that width (the lowering pass folds these away)
        if isinstance(e.arg, ast.EInt) and isinstance(ty, BitType):
            if e.arg.value >= (1 << ty.width):
                raise CheckError(
                    f"{e.arg.value} does not fit in {ty.width} bits", e.pos)
            return ty
        got = type_expr(env, e.arg)
        if not assignable(got, ty):
            raise CheckError(f"ascription mismatch: {got} is not {ty}", e.pos)
        return ty

    raise CheckError(f"cannot type {type(e).__name__}", getattr(e, "pos", None))


def resolve_index(env: TypeEnv, w: Width, pos: ast.Pos | None) -> int:
    if isinstance(w, SymWidth):
        if w.name not in env.consts:
            raise CheckError(f"{w.name} is not an integer constant", pos)
        return env.consts[w.name]
    return w


def _type_binop(env: TypeEnv, e: ast.EBinop) -> Type:
    op = e.op
    lt = type_expr(env, e.left)
    rt = type_expr(env, e.right)

    if op in (ast.BinOp.EQ, ast.BinOp.NE):
        lb, rb = _as_bits(lt), _as_bits(rt)
        if lb is not None and rb is not None:
            if lb.width != rb.width:
                raise CheckError(
                    f"comparison width mismatch: {lb} vs {rb}", e.pos)
            return BOOL
        if lt != rt:
            raise CheckError(f"cannot compare {lt} with {rt}", e.pos)
        if isinstance(lt, (MemType, FuncType)) or lt == UNIT:
            raise CheckError(f"cannot compare values of type {lt}", e.pos)
        return BOOL

    if op in _INT_ARITH or op in _INT_CMP:
        if lt != INT or rt != INT:
            raise CheckError(f"{op.value} expects ints, got {lt} and {rt}",
                             e.pos)
        return INT if op in _INT_ARITH else BOOL

    if op in _BOOL_OPS:
        if lt != BOOL or rt != BOOL:
            raise CheckError(f"{op.value} expects bools, got {lt} and {rt}",
                             e.pos)
        return BOOL

    if op in _BV_OPS or op in _BV_CMP:
        lb, rb = _as_bits(lt), _as_bits(rt)
        if lb is None or rb is None or lb.width != rb.width:
            raise CheckError(
                f"{op.value} expects bitvectors of one width, "
                f"got {lt} and {rt}", e.pos)
        return lb if op in _BV_OPS else BOOL

    if op in _SET_OPS or op is ast.BinOp.SUBSET:
        if (not isinstance(lt, RegSetType) or not isinstance(rt, RegSetType)
                or lt.width != rt.width):
            raise CheckError(f"{op.value} expects register sets, "
                             f"got {lt} and {rt}", e.pos)
        return lt if op in _SET_OPS else BOOL

    if op is ast.BinOp.IN:
        if not isinstance(lt, RegType) or not isinstance(rt, RegSetType) \
                or lt.width != rt.width:
            raise CheckError(f"in expects a register and a matching set, "
                             f"got {lt} and {rt}", e.pos)
        return BOOL

    raise CheckError(f"unhandled operator {op.value}", e.pos)


def _type_app(env: TypeEnv, e: ast.EApp) -> Type:
    name, args = e.func, e.args

    if name == "empty":
        if len(args) != 1 or not isinstance(args[0], ast.EInt):
            raise CheckError("empty expects a literal width", e.pos)
        if args[0].value <= 0:
            raise CheckError("empty width must be positive", e.pos)
        return RegSetType(args[0].value)

    if name in ("hex", "dec", "bin"):
        if len(args) != 1:
            raise CheckError(f"{name} expects one argument", e.pos)
        t = type_expr(env, args[0])
        if _as_bits(t) is None and t != INT:
            raise CheckError(f"{name} expects a bitvector or int", e.pos)
        return STRING

    if name == "lbl":
        if len(args) != 1:
            raise CheckError("lbl expects one argument", e.pos)
        t = type_expr(env, args[0])
        if not isinstance(t, LabelType):
            raise CheckError(f"lbl expects a label, got {t}", e.pos)
        return STRING

    if name == "textlabel":
        if len(args) != 1:
            raise CheckError("textlabel expects one argument", e.pos)
        t = type_expr(env, args[0])
        if t != BitType(8):
            raise CheckError(f"textlabel expects an 8-bit offset, got {t}",
                             e.pos)
        return STRING

    if name == "format":
        if not args or not isinstance(args[0], ast.EString):
            raise CheckError("format expects a literal format string", e.pos)
        from .lang.values import format_arity
        want = format_arity(args[0].value)
        if want is None:
            raise CheckError("malformed format string", e.pos)
        if len(args) - 1 != want:
            raise CheckError(
                f"format string takes {want} arguments, got {len(args) - 1}",
                e.pos)
        for a in args[1:]:
            if type_expr(env, a) != STRING:
                raise CheckError("format arguments must be strings", e.pos)
        return STRING

    if name == "bv_to_len":
        if len(args) != 2:
            raise CheckError("bv_to_len expects a width and a bitvector", e.pos)
        w = _const_int_arg(env, args[0], e.pos, "bv_to_len")
        if _as_bits(type_expr(env, args[1])) is None:
            raise CheckError("bv_to_len expects a bitvector", e.pos)
        return BitType(w)

    if name == "bv_to_uint":
        if len(args) != 1 or _as_bits(type_expr(env, args[0])) is None:
            raise CheckError("bv_to_uint expects a bitvector", e.pos)
        return INT

    if name == "uint_to_bv_l":
        if len(args) != 2:
            raise CheckError("uint_to_bv_l expects a width and an int", e.pos)
        w = _const_int_arg(env, args[0], e.pos, "uint_to_bv_l")
        if type_expr(env, args[1]) != INT:
            raise CheckError("uint_to_bv_l expects an int", e.pos)
        return BitType(w)

    if name in ("isptr", "is_ptr"):
        if len(args) != 1 or _as_bits(type_expr(env, args[0])) is None:
            raise CheckError(f"{name} expects a bitvector", e.pos)
        return BOOL

    sig = env.vars.get(name)
    if sig is None:
        raise CheckError(f"unknown function {name}", e.pos)
    if not isinstance(sig, FuncType):
        raise CheckError(f"{name} is not a function", e.pos)
    if len(args) != len(sig.params):
        raise CheckError(f"{name} expects {len(sig.params)} arguments, "
                         f"got {len(args)}", e.pos)
    for a, want in zip(args, sig.params):
        got = type_expr(env, a)
        if not assignable(got, resolve_type(env, want, e.pos)):
            raise CheckError(
                f"argument of {name} has type {got}, expected {want}", e.pos)
    return resolve_type(env, sig.result, e.pos)


def _const_int_arg(env: TypeEnv, a: ast.Expr, pos, who: str) -> int:
    if isinstance(a, ast.EInt):
        return a.value
    if isinstance(a, ast.EId) and a.name in env.consts:
        return env.consts[a.name]
    raise CheckError(f"{who} width must be an integer constant", pos)


def _check_bound(env: TypeEnv, bound: ast.Expr, ty: Type,
                 pos: ast.Pos | None) -> Type:
    """Type a let binding against its annotation, returning the annotation."""
    if isinstance(bound, ast.EInt) and isinstance(ty, BitType):
        # `let x: 8 bit = 0` style literal coercion is not allowed; the
        # concrete syntax always uses sized literals or ascriptions
        raise CheckError("integer literal bound to a bitvector type; "
                         "write a sized literal", pos)
    got = type_expr(env, bound)
    if not assignable(got, ty):
        raise CheckError(f"let annotation says {ty} but value has {got}", pos)
    return ty


# --------------------------------------------------------------- statements

def type_stmt(env: TypeEnv, s: ast.Stmt) -> None:
    if isinstance(s, (ast.SSkip, ast.SCrash)):
        return
    if isinstance(s, ast.SSeq):
        for sub in s.stmts:
            type_stmt(env, sub)
        return
    if isinstance(s, ast.SAssert):
        if type_expr(env, s.cond) != BOOL:
            raise CheckError("assert expects a bool", s.pos)
        return
    if isinstance(s, ast.SBranch):
        if type_expr(env, s.arg) != BitType(8):
            raise CheckError("BRANCH expects an 8-bit displacement", s.pos)
        return
    if isinstance(s, ast.SAssign):
        t = type_expr(env, s.dest)
        if not isinstance(t, RegType):
            raise CheckError("assignment target must be a register", s.pos)
        got = type_expr(env, s.value)
        if not assignable(got, BitType(t.width)):
            raise CheckError(
                f"cannot store {got} into a {t.width}-bit register", s.pos)
        return
    if isinstance(s, ast.SStore):
        addr = type_expr(env, s.addr)
        if _as_bits(addr) is None:
            raise CheckError("store address must be a bitvector", s.pos)
        w = resolve_width(env, s.width, s.pos)
        got = type_expr(env, s.value)
        if not assignable(got, BitType(w)):
            raise CheckError(f"store of {got} does not match width {w}", s.pos)
        return
    if isinstance(s, ast.SIf):
        if type_expr(env, s.cond) != BOOL:
            raise CheckError("if condition must be bool", s.pos)
        type_stmt(env, s.then)
        type_stmt(env, s.els)
        return
    if isinstance(s, ast.SLet):
        ty = wf_type(env, s.ty, s.pos)
        bound = _check_bound(env, s.bound, ty, s.pos)
        inner = env.child()
        inner.bind(s.var, bound, s.pos)
        type_stmt(inner, s.body)
        return
    if isinstance(s, ast.SFor):
        if s.lo > s.hi:
            raise CheckError(f"empty loop range {s.lo}..{s.hi}", s.pos)
        inner = env.child()
        inner.bind(s.var, INT, s.pos)
        type_stmt(inner, s.body)
        return
    if isinstance(s, ast.SCall):
        sig = env.vars.get(s.proc)
        if not isinstance(sig, FuncType) or sig.result != UNIT:
            raise CheckError(f"{s.proc} is not a procedure", s.pos)
        if len(s.args) != len(sig.params):
            raise CheckError(f"{s.proc} expects {len(sig.params)} arguments",
                             s.pos)
        for a, want in zip(s.args, sig.params):
            got = type_expr(env, a)
            if not assignable(got, resolve_type(env, want, s.pos)):
                raise CheckError(
                    f"argument of {s.proc} has type {got}, expected {want}",
                    s.pos)
        return
    raise CheckError(f"cannot check {type(s).__name__}", getattr(s, "pos", None))


# -------------------------------------------------------------- declarations

_OPERAND_FORBIDDEN = "operands may not have string, unit, or register-set type"


def _check_params(env: TypeEnv, params, pos, *, operands: bool) -> list:
    out = []
    seen = set()
    for pname, pty in params:
        if pname in seen:
            raise CheckError(f"duplicate parameter {pname}", pos)
        seen.add(pname)
        ty = wf_type(env, pty, pos)
        if operands and (ty in (STRING, UNIT) or isinstance(
                ty, (RegSetType, MemType, FuncType))):
            raise CheckError(_OPERAND_FORBIDDEN, pos)
        out.append((pname, ty))
    return out


def type_decl(env: TypeEnv, d: ast.Decl) -> None:
    """Check one declaration and extend env in place."""
    if isinstance(d, ast.DType):
        if d.name in env.aliases:
            raise CheckError(f"type {d.name} is already defined", d.pos)
        env.aliases[d.name] = wf_type(env, d.ty, d.pos)
        return

    if isinstance(d, ast.DLet):
        ty = wf_type(env, d.ty, d.pos)
        got = _check_bound(env, d.value, ty, d.pos)
        env.bind(d.name, got, d.pos)
        if ty == INT and isinstance(d.value, ast.EInt):
            env.consts[d.name] = d.value.value
        return

    if isinstance(d, ast.DLetTxt):
        t = env.vars.get(d.reg)
        if not isinstance(t, RegType):
            raise CheckError(f"{d.reg} is not a register", d.pos)
        if d.reg in env.txt_regs:
            raise CheckError(f"{d.reg} already has assembly text", d.pos)
        if type_expr(env, d.value) != STRING:
            raise CheckError("register text must be a string", d.pos)
        env.txt_regs.add(d.reg)
        return

    if isinstance(d, ast.DRegState):
        ty = wf_type(env, d.ty, d.pos)
        if not isinstance(ty, RegType):
            raise CheckError(f"letstate {d.name} must have register type",
                             d.pos)
        env.bind(d.name, ty, d.pos)
        return

    if isinstance(d, ast.DMemState):
        ty = wf_type(env, d.ty, d.pos)
        if not isinstance(ty, MemType):
            raise CheckError(f"letstate {d.name} must have memory type", d.pos)
        if d.name in env.regions:
            raise CheckError(f"region {d.name} is already declared", d.pos)
        env.regions[d.name] = ty
        if d.label is not None:
            env.bind(d.label, LabelType(ty.ref_width), d.pos)
        return

    if isinstance(d, ast.DInvariant):
        if type_expr(env, d.cond) != BOOL:
            raise CheckError("invariant must be a bool", d.pos)
        return

    if isinstance(d, ast.DDef):
        params = _check_params(env, d.params, d.pos, operands=False)
        result = wf_type(env, d.result, d.pos)
        inner = env.child()
        for pname, pty in params:
            inner.bind(pname, pty, d.pos)
        got = type_expr(inner, d.body)
        if not assignable(got, result):
            raise CheckError(
                f"def {d.name} declares {result} but returns {got}", d.pos)
        env.bind(d.name, FuncType(tuple(t for _, t in params), result), d.pos)
        return

    if isinstance(d, ast.DProc):
        params = _check_params(env, d.params, d.pos, operands=False)
        inner = env.child()
        for pname, pty in params:
            inner.bind(pname, pty, d.pos)
        type_stmt(inner, d.body)
        env.bind(d.name, FuncType(tuple(t for _, t in params), UNIT), d.pos)
        return

    raise CheckError(f"cannot check {type(d).__name__}", getattr(d, "pos", None))


def type_defop(env: TypeEnv, op: ast.DDefop,
               declared: set[str]) -> list[tuple[str, Type]]:
    if op.name in declared:
        raise CheckError(f"defop {op.name} is already defined", op.pos)
    params = _check_params(env, op.params, op.pos, operands=True)
    inner = env.child()
    for pname, pty in params:
        inner.bind(pname, pty, op.pos)
    if type_expr(inner, op.txt) != STRING:
        raise CheckError(f"txt of {op.name} must be a string", op.pos)
    type_stmt(inner, op.sem)
    return params


# ------------------------------------------------------- machines and specs

@dataclass
class MachineTypes:
    """Result of checking one machine description."""
    env: TypeEnv
    registers: dict[str, RegType]
    control: set[str]
    dontgate: set[str]
    labels: dict[str, str]      # label name -> region
    ops: dict[str, list[tuple[str, Type]]]


def type_machine(m: ast.MachineFile) -> MachineTypes:
    env = TypeEnv()
    registers: dict[str, RegType] = {}
    control: set[str] = set()
    dontgate: set[str] = set()
    labels: dict[str, str] = {}
    for d in m.decls:
        type_decl(env, d)
        if isinstance(d, ast.DRegState):
            registers[d.name] = env.vars[d.name]
            if d.control:
                control.add(d.name)
            if d.dontgate:
                dontgate.add(d.name)
        elif isinstance(d, ast.DMemState) and d.label is not None:
            labels[d.label] = d.name
    ops: dict[str, list[tuple[str, Type]]] = {}
    for op in m.defops:
        ops[op.name] = type_defop(env, op, set(ops))
    return MachineTypes(env, registers, control, dontgate, labels, ops)


def type_spec(mt: MachineTypes, spec: ast.SpecFile) -> TypeEnv:
    # deep-copy the pieces spec declarations may extend
    env = TypeEnv(dict(mt.env.aliases), dict(mt.env.vars),
                  dict(mt.env.consts), dict(mt.env.regions),
                  set(mt.env.txt_regs))
    for d in spec.decls:
        if isinstance(d, (ast.DLet, ast.DMemState, ast.DType, ast.DDef)):
            type_decl(env, d)
        else:
            raise CheckError(
                f"{type(d).__name__} not allowed in a specification",
                getattr(d, "pos", None))
    for r in spec.frame_regs:
        if not isinstance(env.vars.get(r), RegType):
            raise CheckError(f"frame names {r}, which is not a register")
    for cell in spec.frame_mems:
        if not isinstance(cell, ast.EPtr):
            raise CheckError("frame memory entries must be pointer literals",
                             getattr(cell, "pos", None))
        type_expr(env, cell)
    if type_expr(env, spec.pre) != BOOL:
        raise CheckError("pre must be a bool")
    post_env = env.child()
    post_env.in_post = True
    if type_expr(post_env, spec.post) != BOOL:
        raise CheckError("post must be a bool")
    return env


def type_program(mt: MachineTypes, prog: ast.Program) -> None:
    for idx, ins in enumerate(prog):
        params = mt.ops.get(ins.opcode)
        if params is None:
            raise CheckError(f"instruction {idx}: unknown op {ins.opcode}")
        if len(ins.operands) != len(params):
            raise CheckError(
                f"instruction {idx}: {ins.opcode} expects {len(params)} "
                f"operands, got {len(ins.operands)}")
        for arg, (pname, want) in zip(ins.operands, params):
            got = type_expr(mt.env, arg)
            if not assignable(got, want):
                raise CheckError(
                    f"instruction {idx}: operand {pname} of {ins.opcode} "
                    f"has type {got}, expected {want}")
            if isinstance(want, RegType) and not isinstance(arg, ast.EId):
                raise CheckError(
                    f"instruction {idx}: operand {pname} must name a register")
