"""Concrete evaluator for machine descriptions, programs, and specs.

This is the ground truth everything else is tested against: the symbolic
engine must agree with it pointwise, and every synthesized program is
re-checked here on randomized states.

Expression failures are the first-class Fail value. Statement-level
failures (a failed assert, a bad store) become a crash, which aborts the
instruction and makes the whole program run bottom.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from .lang import ast
from .lang.state import (
    EXT, EXTBRANCH, NEXT, BExt, BNext, BranchState, BSkip, MachineDesc,
    MachineState,
)
from .lang.types import (
    BitType, MemType, RegType, SymWidth, Width, resolve_alias,
)
from .lang.values import (
    FAIL, Bitvec, BoolVal, FailVal, IntVal, Pointer, RegRef, RegSetVal,
    StrVal, Value, bit_extract, builtin, bv_binop, unop, values_equal,
)


class InterpError(Exception):
    """Malformed input to the evaluator (not a runtime Fail/crash)."""


@dataclass
class Env:
    """An elaborated machine: static tables plus the global value bindings."""
    machine: MachineDesc
    globals: dict[str, Value]


# ------------------------------------------------------------- declarations

def eval_decls(mfile: ast.MachineFile, name: str = "machine") -> Env:
    """Elaborate a machine file: registers become identities, lets are
    evaluated, labels become base pointers. State is not initialized."""
    m = MachineDesc(name=name)
    g: dict[str, Value] = {}
    env = Env(m, g)
    for d in mfile.decls:
        _eval_decl(env, d)
    for op in mfile.defops:
        if op.name in m.defops:
            raise InterpError(f"duplicate op {op.name}")
        m.defops[op.name] = op
    m.control = frozenset(m.control)
    m.dontgate = frozenset(m.dontgate)
    return env


def _eval_decl(env: Env, d: ast.Decl) -> None:
    m, g = env.machine, env.globals
    if isinstance(d, ast.DType):
        m.aliases[d.name] = d.ty
        return
    if isinstance(d, ast.DLet):
        v = eval_expr(env, None, g, d.value)
        if isinstance(v, FailVal):
            raise InterpError(f"let {d.name} failed to evaluate")
        g[d.name] = v
        m.consts[d.name] = v
        return
    if isinstance(d, ast.DLetTxt):
        v = eval_expr(env, None, g, d.value)
        if not isinstance(v, StrVal):
            raise InterpError(f"text of {d.reg} is not a string")
        m.reg_txt[d.reg] = v.value
        return
    if isinstance(d, ast.DRegState):
        ty = _resolve_reg_type(m, d.ty)
        m.registers[d.name] = ty
        if d.control:
            m.control = frozenset(m.control) | {d.name}
        if d.dontgate:
            m.dontgate = frozenset(m.dontgate) | {d.name}
        g[d.name] = RegRef(d.name)
        return
    if isinstance(d, ast.DMemState):
        ty = _resolve_mem_type(m, d.ty)
        m.regions[d.name] = ty
        if d.label is not None:
            m.labels[d.label] = d.name
            g[d.label] = Pointer(d.name, 0)
        return
    if isinstance(d, ast.DInvariant):
        m.invariants.append(d.cond)
        return
    if isinstance(d, ast.DDef):
        m.defs[d.name] = d
        return
    if isinstance(d, ast.DProc):
        m.procs[d.name] = d
        return
    raise InterpError(f"cannot evaluate declaration {type(d).__name__}")


def _concrete_width(m: MachineDesc, w: Width) -> int:
    if isinstance(w, SymWidth):
        v = m.consts.get(w.name)
        if not isinstance(v, IntVal):
            raise InterpError(f"width {w.name} is not an integer constant")
        return v.value
    return w


def _resolve_reg_type(m: MachineDesc, ty) -> RegType:
    ty = resolve_alias(ty, m.aliases)
    if not isinstance(ty, RegType):
        raise InterpError(f"expected a register type, got {ty}")
    return RegType(_concrete_width(m, ty.width))


def _resolve_mem_type(m: MachineDesc, ty) -> MemType:
    ty = resolve_alias(ty, m.aliases)
    if not isinstance(ty, MemType):
        raise InterpError(f"expected a memory type, got {ty}")
    return MemType(_concrete_width(m, ty.cell_width),
                   _concrete_width(m, ty.length),
                   _concrete_width(m, ty.ref_width))


# -------------------------------------------------------------- expressions

LabelCtx = Callable[[int], str]


def _width(env: Env, w: Width) -> int:
    if isinstance(w, SymWidth):
        v = env.machine.consts.get(w.name) or env.globals.get(w.name)
        if not isinstance(v, IntVal):
            raise InterpError(f"width {w.name} is not an integer constant")
        return v.value
    return w


def eval_expr(env: Env, state: Optional[MachineState],
              values: dict[str, Value], e: ast.Expr,
              labelctx: Optional[LabelCtx] = None) -> Value:
    """Big-step expression evaluation. `values` is the current scope
    (globals plus any lets/params); `state` may be None for stateless
    contexts, in which case deref and fetch fail."""

    if isinstance(e, ast.EInt):
        return IntVal(e.value)
    if isinstance(e, ast.EBitvec):
        return Bitvec(e.width, e.value)
    if isinstance(e, ast.EBool):
        return BoolVal(e.value)
    if isinstance(e, ast.EString):
        return StrVal(e.value)

    if isinstance(e, ast.EId):
        if e.name not in values:
            raise InterpError(f"unbound identifier {e.name}")
        return values[e.name]

    if isinstance(e, ast.EUnop):
        return unop(e.op, eval_expr(env, state, values, e.arg, labelctx))

    if isinstance(e, ast.EBinop):
        if e.op in (ast.BinOp.AND, ast.BinOp.OR):
            left = eval_expr(env, state, values, e.left, labelctx)
            if not isinstance(left, BoolVal):
                return FAIL
            if e.op is ast.BinOp.AND and not left.value:
                return BoolVal(False)
            if e.op is ast.BinOp.OR and left.value:
                return BoolVal(True)
            right = eval_expr(env, state, values, e.right, labelctx)
            return right if isinstance(right, BoolVal) else FAIL
        left = eval_expr(env, state, values, e.left, labelctx)
        right = eval_expr(env, state, values, e.right, labelctx)
        return bv_binop(e.op, left, right)

    if isinstance(e, ast.EDeref):
        v = eval_expr(env, state, values, e.arg, labelctx)
        if not isinstance(v, RegRef) or state is None:
            return FAIL
        if v.reg not in state.regs:
            return FAIL
        return state.regs[v.reg]

    if isinstance(e, ast.EFetch):
        addr = eval_expr(env, state, values, e.addr, labelctx)
        return _fetch(env, state, addr, _width(env, e.width))

    if isinstance(e, ast.EIndex):
        v = eval_expr(env, state, values, e.arg, labelctx)
        return bit_extract(v, _width(env, e.index))

    if isinstance(e, ast.ESlice):
        v = eval_expr(env, state, values, e.arg, labelctx)
        return bit_extract(v, _width(env, e.lo), _width(env, e.hi))

    if isinstance(e, ast.EApp):
        return _apply(env, state, values, e, labelctx)

    if isinstance(e, ast.ELet):
        bound = eval_expr(env, state, values, e.bound, labelctx)
        if isinstance(bound, FailVal):
            return FAIL
        inner = dict(values)
        inner[e.var] = bound
        return eval_expr(env, state, inner, e.body, labelctx)

    if isinstance(e, ast.EIf):
        cond = eval_expr(env, state, values, e.cond, labelctx)
        if not isinstance(cond, BoolVal):
            return FAIL
        arm = e.then if cond.value else e.els
        return eval_expr(env, state, values, arm, labelctx)

    if isinstance(e, ast.EPtr):
        if e.region not in env.machine.regions:
            return FAIL
        off = eval_expr(env, state, values, e.offset, labelctx)
        if not isinstance(off, IntVal):
            return FAIL
        _, _, ref = env.machine.cell_geometry(e.region)
        if not 0 <= off.value < (1 << ref):
            return FAIL
        return Pointer(e.region, off.value)

    if isinstance(e, ast.ETxt):
        v = eval_expr(env, state, values, e.arg, labelctx)
        if isinstance(v, RegRef) and v.reg in env.machine.reg_txt:
            return StrVal(env.machine.reg_txt[v.reg])
        return FAIL

    if isinstance(e, ast.EBranchTo):
        b = values.get(EXTBRANCH)
        if not isinstance(b, BranchState):
            return FAIL
        return BoolVal(isinstance(b, BExt))

    if isinstance(e, ast.ERegSet):
        if not e.members:
            return FAIL
        first = values.get(e.members[0])
        if not isinstance(first, RegRef):
            return FAIL
        width = env.machine.reg_width(first.reg)
        names = []
        for n in e.members:
            v = values.get(n)
            if not isinstance(v, RegRef):
                return FAIL
            names.append(v.reg)
        return RegSetVal(width, frozenset(names))

    if isinstance(e, ast.EAscribe):
        try:
            ty = resolve_alias(e.ty, env.machine.aliases)
        except KeyError:
            ty = e.ty
        if isinstance(e.arg, ast.EInt) and isinstance(ty, BitType):
            w = _width(env, ty.width)
            return Bitvec(w, e.arg.value & ((1 << w) - 1))
        return eval_expr(env, state, values, e.arg, labelctx)

    raise InterpError(f"cannot evaluate {type(e).__name__}")


def _fetch(env: Env, state: Optional[MachineState], addr: Value,
           width: int) -> Value:
    if not isinstance(addr, Pointer) or state is None:
        return FAIL
    region = addr.region
    if region not in env.machine.regions:
        return FAIL
    cw, _, _ = env.machine.cell_geometry(region)
    if cw != width:
        return FAIL
    cells = state.mem.get(region, {})
    if addr.offset not in cells:
        return FAIL
    return cells[addr.offset]


def _apply(env: Env, state, values, e: ast.EApp,
           labelctx: Optional[LabelCtx]) -> Value:
    m = env.machine
    args = [eval_expr(env, state, values, a, labelctx) for a in e.args]

    if e.func == "lbl":
        if len(args) != 1 or not isinstance(args[0], Pointer):
            return FAIL
        for name, region in m.labels.items():
            if region == args[0].region and args[0].offset == 0:
                return StrVal(name)
        return FAIL

    if e.func == "textlabel":
        if len(args) != 1 or not isinstance(args[0], Bitvec) \
                or args[0].width != 8:
            return FAIL
        if labelctx is not None:
            return StrVal(labelctx(args[0].bits))
        return StrVal(str(args[0].bits))

    if e.func in m.defs:
        if any(isinstance(a, FailVal) for a in args):
            return FAIL
        d = m.defs[e.func]
        if len(args) != len(d.params):
            return FAIL
        inner = dict(env.globals)
        for (pname, _), v in zip(d.params, args):
            inner[pname] = v
        return eval_expr(env, state, inner, d.body, labelctx)

    return builtin(e.func, args)


# --------------------------------------------------------------- statements

class _Crash(Exception):
    def __init__(self, cause: str):
        self.cause = cause
        super().__init__(cause)


@dataclass
class _ExecCtx:
    env: Env
    state: MachineState
    branch: BranchState = NEXT


@dataclass(frozen=True)
class ExecResult:
    crashed: bool
    state: MachineState
    branch: BranchState
    cause: Optional[str] = None


def exec_stmt(env: Env, state: MachineState, values: dict[str, Value],
              s: ast.Stmt) -> ExecResult:
    """Execute one statement on a copy of `state`."""
    ctx = _ExecCtx(env, state.copy())
    try:
        _exec(ctx, values, s)
    except _Crash as c:
        return ExecResult(True, ctx.state, ctx.branch, c.cause)
    return ExecResult(False, ctx.state, ctx.branch)


def _exec(ctx: _ExecCtx, values: dict[str, Value], s: ast.Stmt) -> None:
    env, state = ctx.env, ctx.state

    if isinstance(s, ast.SSkip):
        return
    if isinstance(s, ast.SCrash):
        raise _Crash("crash statement")
    if isinstance(s, ast.SSeq):
        for sub in s.stmts:
            _exec(ctx, values, sub)
        return

    if isinstance(s, ast.SAssert):
        v = eval_expr(env, state, values, s.cond)
        if not isinstance(v, BoolVal):
            raise _Crash("assert condition failed to evaluate")
        if not v.value:
            raise _Crash("assert is false")
        return

    if isinstance(s, ast.SBranch):
        v = eval_expr(env, state, values, s.arg)
        if not isinstance(v, Bitvec) or v.width != 8:
            raise _Crash("branch displacement failed to evaluate")
        if v.bits == 0:
            ctx.branch = NEXT
        elif v.bits == 0xFF:
            ctx.branch = EXT
        else:
            ctx.branch = BSkip(v.bits)
        return

    if isinstance(s, ast.SAssign):
        dest = eval_expr(env, state, values, s.dest)
        if not isinstance(dest, RegRef):
            raise _Crash("assignment target is not a register")
        v = eval_expr(env, state, values, s.value)
        width = env.machine.reg_width(dest.reg)
        if not _fits(env, v, width):
            raise _Crash(f"cannot store into {dest.reg}")
        state.regs[dest.reg] = v
        return

    if isinstance(s, ast.SStore):
        addr = eval_expr(env, state, values, s.addr)
        if not isinstance(addr, Pointer) or addr.region not in \
                env.machine.regions:
            raise _Crash("store address is not a pointer")
        cw, _, _ = env.machine.cell_geometry(addr.region)
        w = _width(env, s.width)
        cells = state.mem.get(addr.region, {})
        if cw != w or addr.offset not in cells:
            raise _Crash("store misses the region's cells")
        v = eval_expr(env, state, values, s.value)
        if not _fits(env, v, w):
            raise _Crash("stored value has the wrong width")
        cells[addr.offset] = v
        return

    if isinstance(s, ast.SIf):
        cond = eval_expr(env, state, values, s.cond)
        if not isinstance(cond, BoolVal):
            raise _Crash("if condition failed to evaluate")
        _exec(ctx, values, s.then if cond.value else s.els)
        return

    if isinstance(s, ast.SLet):
        bound = eval_expr(env, state, values, s.bound)
        if isinstance(bound, FailVal):
            raise _Crash("let binding failed to evaluate")
        inner = dict(values)
        inner[s.var] = bound
        _exec(ctx, inner, s.body)
        return

    if isinstance(s, ast.SFor):
        for i in range(s.lo, s.hi + 1):
            inner = dict(values)
            inner[s.var] = IntVal(i)
            _exec(ctx, inner, s.body)
        return

    if isinstance(s, ast.SCall):
        p = env.machine.procs.get(s.proc)
        if p is None:
            raise _Crash(f"unknown procedure {s.proc}")
        args = [eval_expr(env, state, values, a) for a in s.args]
        if any(isinstance(a, FailVal) for a in args):
            raise _Crash(f"argument of {s.proc} failed to evaluate")
        inner = dict(env.globals)
        for (pname, _), v in zip(p.params, args):
            inner[pname] = v
        _exec(ctx, inner, p.body)
        return

    raise InterpError(f"cannot execute {type(s).__name__}")


def _fits(env: Env, v: Value, width: int) -> bool:
    if isinstance(v, Bitvec):
        return v.width == width
    if isinstance(v, Pointer):
        if v.region not in env.machine.regions:
            return False
        _, _, ref = env.machine.cell_geometry(v.region)
        return ref == width
    return False


# ----------------------------------------------------------------- programs

@dataclass(frozen=True)
class Bottom:
    """A program run that failed: crashed, or branched out of range."""
    index: int
    cause: str

    def __bool__(self) -> bool:
        return False


RunResult = Union[tuple[MachineState, bool], Bottom]


def op_values(env: Env, ins: ast.Instruction) -> dict[str, Value]:
    """Bind one instruction's operands to its defop parameters."""
    op = env.machine.defops.get(ins.opcode)
    if op is None:
        raise InterpError(f"unknown op {ins.opcode}")
    if len(ins.operands) != len(op.params):
        raise InterpError(f"{ins.opcode} takes {len(op.params)} operands")
    values = dict(env.globals)
    for (pname, _), arg in zip(op.params, ins.operands):
        v = eval_expr(env, None, env.globals, arg)
        if isinstance(v, FailVal):
            raise InterpError(f"operand {pname} of {ins.opcode} is invalid")
        values[pname] = v
    return values


def run_program(env: Env, state: MachineState,
                prog: ast.Program) -> RunResult:
    """Execute instructions in order. A skip of n drops the next n
    instructions; skipping exactly to the end is a clean exit, skipping
    past it is bottom."""
    cur = state.copy()
    i = 0
    while i < len(prog):
        ins = prog[i]
        values = op_values(env, ins)
        op = env.machine.defops[ins.opcode]
        ctx = _ExecCtx(env, cur)
        try:
            _exec(ctx, values, op.sem)
        except _Crash as c:
            return Bottom(i, c.cause)
        cur = ctx.state
        if isinstance(ctx.branch, BExt):
            return cur, True
        if isinstance(ctx.branch, BSkip):
            remaining = len(prog) - i - 1
            if ctx.branch.count > remaining:
                return Bottom(i, f"branch skips {ctx.branch.count} of "
                                 f"{remaining} remaining instructions")
            i += ctx.branch.count
        i += 1
    return cur, False


# ----------------------------------------------------------- state validity

def check_state_valid(env: Env, state: MachineState) -> Optional[str]:
    """None when the state matches the machine exactly, else a complaint."""
    m = env.machine
    if set(state.regs) != set(m.registers):
        missing = set(m.registers) - set(state.regs)
        extra = set(state.regs) - set(m.registers)
        return f"register domain mismatch (missing {sorted(missing)}, " \
               f"extra {sorted(extra)})"
    for r, v in state.regs.items():
        if not _fits(env, v, m.reg_width(r)):
            return f"register {r} holds {v}, which does not fit"
    if set(state.mem) != set(m.regions):
        return "memory region domain mismatch"
    for region in m.regions:
        want = m.cell_offsets(region)
        cells = state.mem[region]
        if set(cells) != set(want):
            return f"region {region} offsets do not match the description"
        cw, _, _ = m.cell_geometry(region)
        for off, v in cells.items():
            if not _fits(env, v, cw):
                return f"cell {region}[{off}] holds {v}, which does not fit"
    return None


# ------------------------------------------------------------ spec checking

@dataclass
class SpecContext:
    """A specification elaborated against a machine.

    env is a copy of the machine env extended with the spec's regions and
    labels; lets are re-evaluated against each initial state of interest.
    """
    env: Env
    spec: ast.SpecFile
    lets: list[ast.DLet] = field(default_factory=list)


def prepare_spec(env: Env, spec: ast.SpecFile) -> SpecContext:
    m = env.machine
    m2 = MachineDesc(
        name=m.name, aliases=dict(m.aliases), consts=dict(m.consts),
        defs=dict(m.defs), procs=dict(m.procs), registers=dict(m.registers),
        control=m.control, dontgate=m.dontgate, reg_txt=dict(m.reg_txt),
        regions=dict(m.regions), labels=dict(m.labels),
        invariants=list(m.invariants), defops=dict(m.defops))
    env2 = Env(m2, dict(env.globals))
    lets: list[ast.DLet] = []
    for d in spec.decls:
        if isinstance(d, ast.DMemState):
            ty = _resolve_mem_type(m2, d.ty)
            m2.regions[d.name] = ty
            if d.label is not None:
                m2.labels[d.label] = d.name
                env2.globals[d.label] = Pointer(d.name, 0)
        elif isinstance(d, ast.DLet):
            lets.append(d)
        elif isinstance(d, ast.DType):
            m2.aliases[d.name] = d.ty
        elif isinstance(d, ast.DDef):
            m2.defs[d.name] = d
        else:
            raise InterpError(
                f"{type(d).__name__} not allowed in a specification")
    return SpecContext(env2, spec, lets)


def spec_values(ctx: SpecContext, state: MachineState) -> dict[str, Value]:
    """Globals plus the spec's lets evaluated against `state`."""
    values = dict(ctx.env.globals)
    for d in ctx.lets:
        values[d.name] = eval_expr(ctx.env, state, values, d.value)
    return values


def _holds(v: Value) -> bool:
    return isinstance(v, BoolVal) and v.value


def pre_holds(ctx: SpecContext, state: MachineState) -> bool:
    """Precondition plus every machine invariant, evaluated on `state`."""
    values = spec_values(ctx, state)
    if not _holds(eval_expr(ctx.env, state, values, ctx.spec.pre)):
        return False
    return all(_holds(eval_expr(ctx.env, state, ctx.env.globals, inv))
               for inv in ctx.env.machine.invariants)


def frame_cells(ctx: SpecContext) -> set[tuple[str, int]]:
    """Memory cells the frame declaration explicitly allows destroying."""
    out = set()
    for cell in ctx.spec.frame_mems:
        v = eval_expr(ctx.env, None, ctx.env.globals, cell)
        if isinstance(v, Pointer):
            out.add((v.region, v.offset))
    return out


def _used_lets(ctx: SpecContext, roots: list[ast.Expr]) -> list[ast.DLet]:
    """The spec lets the given expressions transitively reference."""
    by_name = {d.name: d for d in ctx.lets}
    used: set[str] = set()
    stack = [i for e in roots for i in _idents(e)]
    while stack:
        n = stack.pop()
        if n in by_name and n not in used:
            used.add(n)
            stack.extend(_idents(by_name[n].value))
    return [d for d in ctx.lets if d.name in used]


def _idents(e: ast.Expr) -> list[str]:
    out = []
    def walk(x):
        if isinstance(x, ast.EId):
            out.append(x.name)
        for f in getattr(x, "__dataclass_fields__", {}):
            v = getattr(x, f)
            if isinstance(v, ast.Expr):
                walk(v)
            elif isinstance(v, tuple):
                for item in v:
                    if isinstance(item, ast.Expr):
                        walk(item)
    walk(e)
    return out


def _subexprs(e: ast.Expr):
    yield e
    for f in getattr(e, "__dataclass_fields__", {}):
        v = getattr(e, f)
        if isinstance(v, ast.Expr):
            yield from _subexprs(v)
        elif isinstance(v, tuple):
            for item in v:
                if isinstance(item, ast.Expr):
                    yield from _subexprs(item)


def spec_mentions(ctx: SpecContext, state: MachineState,
                  include_pre: bool = False, through_lets: bool = False
                  ) -> tuple[set[str], set[tuple[str, int]]]:
    """Registers and memory cells a spec talks about.

    Every subexpression of the postcondition (optionally the precondition
    too) is evaluated against the initial state; the register identities
    and pointers that show up are the mentioned locations. A pointer- or
    register-valued let used in the condition counts through its value.

    The frame judgment wants exactly that (lets capture initial values,
    so a location named only inside a let body is not promised to the
    program for writing). Read-permission analysis passes through_lets
    to widen the scan into the bodies of the lets the conditions use."""
    roots = [ctx.spec.post] + ([ctx.spec.pre] if include_pre else [])
    exprs = list(roots)
    if through_lets:
        exprs += [d.value for d in _used_lets(ctx, roots)]
    values = spec_values(ctx, state)
    values[EXTBRANCH] = NEXT
    regs: set[str] = set()
    cells: set[tuple[str, int]] = set()
    for root in exprs:
        for sub in _subexprs(root):
            try:
                v = eval_expr(ctx.env, state, values, sub)
            except InterpError:
                continue  # under a binder we did not enter
            if isinstance(v, RegRef):
                regs.add(v.reg)
            elif isinstance(v, Pointer):
                cells.add((v.region, v.offset))
    return regs, cells


def check_spec(ctx: SpecContext, state_in: MachineState,
               state_out: MachineState, branch: bool) -> bool:
    """pre(state_in) implies post(state_out) and the frame condition."""
    if not pre_holds(ctx, state_in):
        return True
    values = spec_values(ctx, state_in)
    values[EXTBRANCH] = EXT if branch else NEXT
    if not _holds(eval_expr(ctx.env, state_out, values, ctx.spec.post)):
        return False
    # frame: everything not named may not change
    regs, cells = spec_mentions(ctx, state_in)
    writable_regs = regs | set(ctx.spec.frame_regs)
    writable_cells = cells | frame_cells(ctx)
    for r in ctx.env.machine.registers:
        if r not in writable_regs and state_out.regs[r] != state_in.regs[r]:
            return False
    for region in ctx.env.machine.regions:
        for off, v in state_in.mem[region].items():
            if (region, off) not in writable_cells \
                    and state_out.mem[region][off] != v:
                return False
    return True


def run_and_check(ctx: SpecContext, prog: ast.Program,
                  state: MachineState) -> bool:
    """One randomized soundness check: does the program take `state` to a
    post/frame-satisfying state? States outside the precondition pass
    vacuously; bottom never satisfies anything."""
    if not pre_holds(ctx, state):
        return True
    result = run_program(ctx.env, state, prog)
    if isinstance(result, Bottom):
        return False
    out, branch = result
    return check_spec(ctx, state, out, branch)


# ------------------------------------------------------------ random states

def register_pins(ctx: SpecContext) -> dict[str, Value]:
    """Registers pinned to exact initial values.

    The scan walks the conjunct spine of the precondition and the machine
    invariants looking for `*r == <stateless expression>`. Two consumers:
    the random generator seeds these directly (a pinned value like a
    pointer or an all-zero word is never hit by uniform sampling), and the
    symbolic side uses the pointer-valued ones to decide which locations
    may hold pointers at all."""
    out: dict[str, Value] = {}
    stateless = spec_values_stateless(ctx)

    def scan(e: ast.Expr) -> None:
        if isinstance(e, ast.EBinop):
            if e.op is ast.BinOp.AND:
                scan(e.left)
                scan(e.right)
                return
            if e.op is ast.BinOp.EQ:
                for a, b in ((e.left, e.right), (e.right, e.left)):
                    if not isinstance(a, ast.EDeref):
                        continue
                    try:
                        # the target may be named through a spec let
                        reg = eval_expr(ctx.env, None, stateless, a.arg)
                        v = eval_expr(ctx.env, None, stateless, b)
                    except InterpError:
                        continue
                    if isinstance(reg, RegRef) \
                            and isinstance(v, (Bitvec, Pointer)):
                        out[reg.reg] = v

    scan(ctx.spec.pre)
    for inv in ctx.env.machine.invariants:
        scan(inv)
    return out


def pointer_requirements(ctx: SpecContext) -> dict[str, Pointer]:
    """Registers the precondition requires to hold pointers. Everything
    else is constrained pointer-free in valid initial states."""
    return {r: v for r, v in register_pins(ctx).items()
            if isinstance(v, Pointer)}


def spec_values_stateless(ctx: SpecContext) -> dict[str, Value]:
    values = dict(ctx.env.globals)
    for d in ctx.lets:
        values[d.name] = eval_expr(ctx.env, None, values, d.value)
    return values


def random_state(env: Env, rng: random.Random) -> MachineState:
    """Uniform bits everywhere; no pointers."""
    st = MachineState()
    for r in env.machine.registers:
        w = env.machine.reg_width(r)
        st.regs[r] = Bitvec(w, rng.getrandbits(w))
    for region in env.machine.regions:
        cw, _, _ = env.machine.cell_geometry(region)
        st.mem[region] = {off: Bitvec(cw, rng.getrandbits(cw))
                          for off in env.machine.cell_offsets(region)}
    return st


def random_valid_state(
        ctx: SpecContext, rng: random.Random, cap: int = 10_000,
        fallback: Optional[Callable[[], Optional[MachineState]]] = None
) -> Optional[MachineState]:
    """Rejection-sample a state satisfying pre and the machine invariants.
    Pinned registers are seeded directly (their values have negligible
    mass under uniform sampling); the rejection test then rechecks the
    whole precondition, so a wrong pin costs attempts but never soundness.
    Falls back to a solver-backed generator (when provided) after `cap`
    rejections."""
    pins = register_pins(ctx)
    for _ in range(cap):
        st = random_state(ctx.env, rng)
        for reg, v in pins.items():
            st.regs[reg] = v
        if pre_holds(ctx, st):
            return st
    return fallback() if fallback is not None else None
