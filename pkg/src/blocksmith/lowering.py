"""Compile portable block specifications down to a single machine.

A portable spec names the types, values, and functions it needs; a
lowering file supplies machine-specific bindings for them, grouped into
named modules so one file can serve several specs. Compilation checks
that every requirement is met by the machine description or a selected
module, rewrites types by resolving symbolic widths and erasing pointer
types to plain bitvectors, and emits one machine-level specification.

Module bindings are emitted as declarations rather than substituted
into use sites, which keeps the output reviewable and the translation
total; `tidy_spec` afterwards folds away the indirections that cannot
change meaning (lets bound to a bare register or literal, helper
functions applied exactly once) so the result reads like a spec written
by hand for that machine. Emitted declarations are ordered by their
dependencies, with ties broken by source order, so output is stable
across runs.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Optional, Sequence

from .lang import ast
from .lang.types import (AliasType, BitType, BoolType, FuncType, IntType,
                         LabelType, MemType, PtrType, RegSetType, RegType,
                         StringType, SymWidth, Type, UnitType, Width, INT)
from .lang.values import CONTEXT_BUILTINS, PURE_BUILTINS
from .typecheck import MachineTypes, TypeEnv, type_decl, type_machine, type_spec


class LowerError(Exception):
    def __init__(self, msg: str, pos: ast.Pos | None = None):
        self.msg = msg
        self.pos = pos
        where = f"{pos.line}:{pos.col}: " if pos else ""
        super().__init__(where + msg)


# ------------------------------------------------------------------ constants

def extract_constants(decls: Iterable[ast.Decl]) -> dict[str, int]:
    """Integer constants usable as symbolic widths.

    Only a let of type int bound to a literal counts; a computed value
    such as `let x: int = 3 + 4` binds nothing here, matching what the
    typechecker will accept in width position.
    """
    sigma: dict[str, int] = {}
    for d in decls:
        if (isinstance(d, ast.DLet) and d.ty == INT
                and isinstance(d.value, ast.EInt)):
            sigma[d.name] = d.value.value
    return sigma


def _width(sigma: Mapping[str, int], w: Width,
           pos: Optional[ast.Pos]) -> int:
    if isinstance(w, SymWidth):
        if w.name not in sigma:
            raise LowerError(f"no integer constant named {w.name}", pos)
        return sigma[w.name]
    return w


# ---------------------------------------------------------------------- types

def lower_type(sigma: Mapping[str, int], aliases: Mapping[str, Type],
               ty: Type, pos: Optional[ast.Pos] = None) -> Type:
    """Resolve symbolic widths and erase pointer types.

    Pointers have no machine representation of their own; a `w ptr`
    becomes a `w bit` and the distinction survives only dynamically.
    Type aliases are kept by name (the machine already defines them).
    """
    if isinstance(ty, BitType):
        return BitType(_width(sigma, ty.width, pos))
    if isinstance(ty, PtrType):
        return BitType(_width(sigma, ty.width, pos))
    if isinstance(ty, RegType):
        return RegType(_width(sigma, ty.width, pos))
    if isinstance(ty, RegSetType):
        return RegSetType(_width(sigma, ty.width, pos))
    if isinstance(ty, LabelType):
        return LabelType(_width(sigma, ty.width, pos))
    if isinstance(ty, MemType):
        return MemType(_width(sigma, ty.cell_width, pos),
                       _width(sigma, ty.length, pos),
                       _width(sigma, ty.ref_width, pos))
    if isinstance(ty, AliasType):
        if ty.name not in aliases:
            raise LowerError(f"no type named {ty.name}", pos)
        return ty
    if isinstance(ty, FuncType):
        return FuncType(tuple(lower_type(sigma, aliases, p, pos)
                              for p in ty.params),
                        lower_type(sigma, aliases, ty.result, pos))
    if isinstance(ty, (UnitType, IntType, BoolType, StringType)):
        return ty
    raise LowerError(f"cannot lower {ty}", pos)


def _concrete(sigma: Mapping[str, int], aliases: Mapping[str, Type],
              ty: Type, pos: Optional[ast.Pos] = None) -> Type:
    """Fully resolved shape of a type, for compatibility comparison."""
    seen: set[str] = set()
    while isinstance(ty, AliasType):
        if ty.name in seen:
            raise LowerError(f"type {ty.name} is defined in terms of itself",
                             pos)
        seen.add(ty.name)
        if ty.name not in aliases:
            raise LowerError(f"no type named {ty.name}", pos)
        ty = aliases[ty.name]
    ty = lower_type(sigma, aliases, ty, pos)
    if isinstance(ty, FuncType):
        return FuncType(tuple(_concrete(sigma, aliases, p, pos)
                              for p in ty.params),
                        _concrete(sigma, aliases, ty.result, pos))
    return ty


# ----------------------------------------------------------------- expressions

@dataclass
class _Scope:
    """What the lowered world can resolve, for early unbound-name errors."""
    sigma: dict[str, int]
    aliases: dict[str, Type]
    names: set[str]                # values: registers, lets, labels
    funcs: set[str]                # defs plus the builtins
    regions: set[str]


def lower_expr(sc: _Scope, e: ast.Expr,
               bound: frozenset[str] = frozenset()) -> ast.Expr:
    """Translate one portable expression.

    The tree shape is preserved; only widths, ascription types, and the
    literals they coerce change. Identifiers must resolve somewhere in
    the machine, a module, or the spec itself, except branch target
    names, which refer to labels outside the block and pass through.
    """
    if isinstance(e, (ast.EInt, ast.EBitvec, ast.EBool, ast.EString,
                      ast.EBranchTo)):
        return e
    if isinstance(e, ast.EId):
        if e.name not in bound and e.name not in sc.names:
            raise LowerError(f"nothing supplies a value named {e.name}", e.pos)
        return e
    if isinstance(e, ast.EUnop):
        return ast.EUnop(e.op, lower_expr(sc, e.arg, bound), pos=e.pos)
    if isinstance(e, ast.EBinop):
        return ast.EBinop(e.op, lower_expr(sc, e.left, bound),
                          lower_expr(sc, e.right, bound), pos=e.pos)
    if isinstance(e, ast.EDeref):
        return ast.EDeref(lower_expr(sc, e.arg, bound), pos=e.pos)
    if isinstance(e, ast.EFetch):
        return ast.EFetch(lower_expr(sc, e.addr, bound),
                          _width(sc.sigma, e.width, e.pos), pos=e.pos)
    if isinstance(e, ast.EIndex):
        return ast.EIndex(lower_expr(sc, e.arg, bound),
                          _width(sc.sigma, e.index, e.pos), pos=e.pos)
    if isinstance(e, ast.ESlice):
        return ast.ESlice(lower_expr(sc, e.arg, bound),
                          _width(sc.sigma, e.lo, e.pos),
                          _width(sc.sigma, e.hi, e.pos), pos=e.pos)
    if isinstance(e, ast.EApp):
        if e.func not in sc.funcs and e.func not in PURE_BUILTINS \
                and e.func not in CONTEXT_BUILTINS:
            raise LowerError(f"nothing supplies a function named {e.func}",
                             e.pos)
        return ast.EApp(e.func, tuple(lower_expr(sc, a, bound)
                                      for a in e.args), pos=e.pos)
    if isinstance(e, ast.ELet):
        return ast.ELet(e.var, lower_type(sc.sigma, sc.aliases, e.ty, e.pos),
                        lower_expr(sc, e.bound, bound),
                        lower_expr(sc, e.body, bound | {e.var}), pos=e.pos)
    if isinstance(e, ast.EIf):
        return ast.EIf(lower_expr(sc, e.cond, bound),
                       lower_expr(sc, e.then, bound),
                       lower_expr(sc, e.els, bound), pos=e.pos)
    if isinstance(e, ast.EPtr):
        if e.region not in sc.regions:
            raise LowerError(f"no memory region named {e.region}", e.pos)
        return ast.EPtr(e.region, lower_expr(sc, e.offset, bound), pos=e.pos)
    if isinstance(e, ast.ETxt):
        return ast.ETxt(lower_expr(sc, e.arg, bound), pos=e.pos)
    if isinstance(e, ast.ERegSet):
        for m in e.members:
            if m not in bound and m not in sc.names:
                raise LowerError(f"nothing supplies a register named {m}",
                                 e.pos)
        return e
    if isinstance(e, ast.EAscribe):
        arg = lower_expr(sc, e.arg, bound)
        ty = lower_type(sc.sigma, sc.aliases, e.ty, e.pos)
        res = ty
        seen: set[str] = set()
        while isinstance(res, AliasType) and res.name not in seen:
            seen.add(res.name)
            res = sc.aliases[res.name]
        if isinstance(arg, ast.EInt) and isinstance(res, BitType) \
                and isinstance(res.width, int):
            if not 0 <= arg.value < (1 << res.width):
                raise LowerError(
                    f"{arg.value} does not fit in {res.width} bits", e.pos)
            return ast.EBitvec(res.width, arg.value, pos=e.pos)
        return ast.EAscribe(arg, ty, pos=e.pos)
    raise LowerError(f"cannot lower {type(e).__name__}", getattr(e, "pos", None))


# ------------------------------------------------------------------- modules

def _select_modules(lowering: ast.LoweringFile,
                    names: Sequence[str]) -> list[ast.LoweringModule]:
    """Modules in request order with imports expanded ahead of importers.

    A module pulled in twice (directly and through an import) appears
    once, at its first position.
    """
    by_name = {m.name: m for m in lowering.modules}
    out: list[ast.LoweringModule] = []
    included: set[str] = set()
    expanding: list[str] = []

    def visit(name: str) -> None:
        if name in included:
            return
        if name in expanding:
            raise LowerError("module imports form a cycle: "
                             + " -> ".join(expanding + [name]))
        if name not in by_name:
            raise LowerError(f"no lowering module named {name}")
        expanding.append(name)
        mod = by_name[name]
        for imp in mod.imports:
            visit(imp)
        expanding.pop()
        included.add(name)
        out.append(mod)

    for n in names:
        visit(n)
    return out


# ---------------------------------------------------------------- dependencies

def _type_refs(ty: Type, acc: set[str]) -> None:
    if isinstance(ty, AliasType):
        acc.add(ty.name)
    elif isinstance(ty, (BitType, RegType, RegSetType, LabelType, PtrType)):
        if isinstance(ty.width, SymWidth):
            acc.add(ty.width.name)
    elif isinstance(ty, MemType):
        for w in (ty.cell_width, ty.length, ty.ref_width):
            if isinstance(w, SymWidth):
                acc.add(w.name)
    elif isinstance(ty, FuncType):
        for p in ty.params:
            _type_refs(p, acc)
        _type_refs(ty.result, acc)


def _expr_refs(e: ast.Expr, bound: frozenset[str], acc: set[str]) -> None:
    """Names an expression may resolve at evaluation time.

    Branch targets are included: they are usually external, but when
    one names a declared region label the declaration must come first.
    """
    if isinstance(e, ast.EId):
        if e.name not in bound:
            acc.add(e.name)
    elif isinstance(e, ast.EApp):
        acc.add(e.func)
        for a in e.args:
            _expr_refs(a, bound, acc)
    elif isinstance(e, ast.EPtr):
        acc.add(e.region)
        _expr_refs(e.offset, bound, acc)
    elif isinstance(e, ast.ERegSet):
        acc.update(m for m in e.members if m not in bound)
    elif isinstance(e, ast.EBranchTo):
        acc.add(e.label)
    elif isinstance(e, ast.ELet):
        _type_refs(e.ty, acc)
        _expr_refs(e.bound, bound, acc)
        _expr_refs(e.body, bound | {e.var}, acc)
    elif isinstance(e, ast.EAscribe):
        _type_refs(e.ty, acc)
        _expr_refs(e.arg, bound, acc)
    elif isinstance(e, ast.EFetch):
        if isinstance(e.width, SymWidth):
            acc.add(e.width.name)
        _expr_refs(e.addr, bound, acc)
    elif isinstance(e, ast.EIndex):
        if isinstance(e.index, SymWidth):
            acc.add(e.index.name)
        _expr_refs(e.arg, bound, acc)
    elif isinstance(e, ast.ESlice):
        for w in (e.lo, e.hi):
            if isinstance(w, SymWidth):
                acc.add(w.name)
        _expr_refs(e.arg, bound, acc)
    elif isinstance(e, ast.EUnop):
        _expr_refs(e.arg, bound, acc)
    elif isinstance(e, ast.EBinop):
        _expr_refs(e.left, bound, acc)
        _expr_refs(e.right, bound, acc)
    elif isinstance(e, ast.EDeref):
        _expr_refs(e.arg, bound, acc)
    elif isinstance(e, ast.EIf):
        for part in (e.cond, e.then, e.els):
            _expr_refs(part, bound, acc)
    elif isinstance(e, ast.ETxt):
        _expr_refs(e.arg, bound, acc)


def _decl_names(d: ast.Decl) -> tuple[str, ...]:
    if isinstance(d, ast.DMemState):
        return (d.name,) if d.label is None else (d.name, d.label)
    return (d.name,)  # DLet, DDef, DType


def _decl_refs(d: ast.Decl) -> set[str]:
    acc: set[str] = set()
    if isinstance(d, ast.DLet):
        _type_refs(d.ty, acc)
        _expr_refs(d.value, frozenset(), acc)
    elif isinstance(d, ast.DDef):
        for _, t in d.params:
            _type_refs(t, acc)
        _type_refs(d.result, acc)
        _expr_refs(d.body, frozenset(n for n, _ in d.params), acc)
    elif isinstance(d, ast.DType):
        _type_refs(d.ty, acc)
    elif isinstance(d, ast.DMemState):
        _type_refs(d.ty, acc)
    return acc


def _dependency_order(decls: list[ast.Decl]) -> list[ast.Decl]:
    """Stable topological sort: earliest declaration whose needs are met.

    Only references between the declarations being placed count; names
    supplied by the machine are ambient. A cycle is a genuine error, not
    something to paper over with a fallback order.
    """
    providers: dict[str, int] = {}
    for i, d in enumerate(decls):
        for n in _decl_names(d):
            providers[n] = i
    refs = [{providers[n] for n in _decl_refs(d) if n in providers}
            for i, d in enumerate(decls)]
    for i, d in enumerate(decls):
        if i in refs[i]:
            raise LowerError(
                f"{_decl_names(d)[0]} is defined in terms of itself",
                getattr(d, "pos", None))
    placed: set[int] = set()
    order: list[ast.Decl] = []
    remaining = list(range(len(decls)))
    while remaining:
        for i in remaining:
            if refs[i] <= placed:
                placed.add(i)
                order.append(decls[i])
                remaining.remove(i)
                break
        else:
            stuck = ", ".join(_decl_names(decls[i])[0] for i in remaining)
            raise LowerError(f"declarations form a cycle: {stuck}")
    return order


# ------------------------------------------------------------------- lowering

def lower_spec(machine: ast.MachineFile, lowering: ast.LoweringFile,
               ale: ast.AleSpec,
               use: Optional[Sequence[str]] = None) -> ast.SpecFile:
    """Compile a portable spec against one machine and its lowering file.

    `use` overrides the spec's own lower-with module list, for driving
    the compiler from tests; normally the spec says what it needs.

    The output declares everything the modules and the spec contribute
    (machine declarations stay ambient), frames are the union of spec
    and module frames, and the machine's invariants are conjoined onto
    both the pre- and postcondition: the block may assume them and must
    also reestablish them.
    """
    mt = type_machine(machine)
    mods = _select_modules(lowering, ale.lower_with if use is None else use)

    env = TypeEnv(dict(mt.env.aliases), dict(mt.env.vars),
                  dict(mt.env.consts), dict(mt.env.regions),
                  set(mt.env.txt_regs))
    emitted: list[ast.Decl] = []
    for mod in mods:
        for d in mod.decls:
            if not isinstance(d, (ast.DLet, ast.DDef, ast.DType,
                                  ast.DMemState)):
                raise LowerError(
                    f"{type(d).__name__} not allowed in a lowering module",
                    getattr(d, "pos", None))
            type_decl(env, d)  # CheckError here points at the module
            emitted.append(d)

    sigma = extract_constants(machine.decls)
    for mod in mods:
        sigma.update(extract_constants(mod.decls))

    sc = _Scope(
        sigma=sigma,
        aliases=env.aliases,
        names=set(env.vars),
        funcs={n for n, t in env.vars.items() if isinstance(t, FuncType)},
        regions=set(env.regions),
    )

    # Names first, bodies second: a declaration may use one written
    # below it, since the output is reordered by dependency anyway.
    for d in ale.decls:
        if isinstance(d, ast.ARequireType):
            if d.name not in sc.aliases:
                raise LowerError(f"machine does not define type {d.name}",
                                 d.pos)
        elif isinstance(d, ast.ARequireValue):
            have = env.vars.get(d.name)
            if have is None:
                raise LowerError(f"nothing supplies a value named {d.name}",
                                 d.pos)
            want = _concrete(sigma, sc.aliases, d.ty, d.pos)
            if _concrete(sigma, sc.aliases, have, d.pos) != want:
                raise LowerError(
                    f"{d.name} is supplied at type {have}, not {d.ty}", d.pos)
        elif isinstance(d, ast.ARequireFunc):
            have = env.vars.get(d.name)
            if not isinstance(have, FuncType):
                raise LowerError(
                    f"nothing supplies a function named {d.name}", d.pos)
            want = FuncType(d.params, d.result)
            if _concrete(sigma, sc.aliases, have, d.pos) \
                    != _concrete(sigma, sc.aliases, want, d.pos):
                raise LowerError(
                    f"{d.name} is supplied at type {have}, not {want}", d.pos)
        elif isinstance(d, ast.AProvideType):
            if d.name in sc.aliases:
                raise LowerError(f"type {d.name} is already defined", d.pos)
            sc.aliases[d.name] = lower_type(sigma, sc.aliases, d.ty, d.pos)
        elif isinstance(d, ast.AProvideFunc):
            sc.names.add(d.name)
            sc.funcs.add(d.name)
        elif isinstance(d, ast.ARegion):
            sc.regions.add(d.name)
            if d.label is not None:
                sc.names.add(d.label)
        elif isinstance(d, (ast.AProvideValue, ast.ABlockLet)):
            sc.names.add(d.name)
        else:
            raise LowerError(f"cannot lower {type(d).__name__}",
                             getattr(d, "pos", None))

    for d in ale.decls:
        if isinstance(d, ast.AProvideType):
            emitted.append(ast.DType(d.name, sc.aliases[d.name], pos=d.pos))
        elif isinstance(d, (ast.AProvideValue, ast.ABlockLet)):
            emitted.append(ast.DLet(d.name,
                                    lower_type(sigma, sc.aliases, d.ty, d.pos),
                                    lower_expr(sc, d.value), pos=d.pos))
        elif isinstance(d, ast.AProvideFunc):
            params = tuple((n, lower_type(sigma, sc.aliases, t, d.pos))
                           for n, t in d.params)
            emitted.append(ast.DDef(
                d.name, params,
                lower_type(sigma, sc.aliases, d.result, d.pos),
                lower_expr(sc, d.body, frozenset(n for n, _ in params)),
                pos=d.pos))
        elif isinstance(d, ast.ARegion):
            ty = lower_type(sigma, sc.aliases, d.ty, d.pos)
            if not isinstance(ty, MemType):
                raise LowerError(f"region {d.name} must have memory type",
                                 d.pos)
            emitted.append(ast.DMemState(d.name, ty, d.label, pos=d.pos))

    frame_regs: list[str] = []
    for r in list(ale.frame_regs) + [r for m in mods for r in m.frame_regs]:
        if r not in frame_regs:
            frame_regs.append(r)
    frame_mems = tuple(lower_expr(sc, c) for c in ale.frame_mems) \
        + tuple(c for m in mods for c in m.frame_mems)

    pre = lower_expr(sc, ale.pre)
    post = lower_expr(sc, ale.post)
    for d in machine.decls:
        if isinstance(d, ast.DInvariant):
            pre = ast.EBinop(ast.BinOp.AND, pre, d.cond)
            post = ast.EBinop(ast.BinOp.AND, post, d.cond)

    spec = ast.SpecFile(tuple(_dependency_order(emitted)), tuple(frame_regs),
                        frame_mems, pre, post)
    type_spec(mt, spec)  # translation bugs stop here, not at the solver
    return spec


# ----------------------------------------------------------------- tidying

class _CannotSubst(Exception):
    """Replacement would not be expressible at this occurrence."""


def _subst(e: ast.Expr, sub: Mapping[str, ast.Expr]) -> ast.Expr:
    if not sub:
        return e
    if isinstance(e, ast.EId):
        return sub.get(e.name, e)
    if isinstance(e, ast.EUnop):
        return replace(e, arg=_subst(e.arg, sub))
    if isinstance(e, ast.EBinop):
        return replace(e, left=_subst(e.left, sub), right=_subst(e.right, sub))
    if isinstance(e, ast.EDeref):
        return replace(e, arg=_subst(e.arg, sub))
    if isinstance(e, ast.EFetch):
        return replace(e, addr=_subst(e.addr, sub))
    if isinstance(e, (ast.EIndex, ast.ESlice, ast.ETxt)):
        return replace(e, arg=_subst(e.arg, sub))
    if isinstance(e, ast.EApp):
        if e.func in sub:
            raise _CannotSubst
        return replace(e, args=tuple(_subst(a, sub) for a in e.args))
    if isinstance(e, ast.ELet):
        inner = {k: v for k, v in sub.items() if k != e.var}
        return replace(e, bound=_subst(e.bound, sub),
                       body=_subst(e.body, inner))
    if isinstance(e, ast.EIf):
        return replace(e, cond=_subst(e.cond, sub), then=_subst(e.then, sub),
                       els=_subst(e.els, sub))
    if isinstance(e, ast.EPtr):
        return replace(e, offset=_subst(e.offset, sub))
    if isinstance(e, ast.ERegSet):
        members = []
        for m in e.members:
            r = sub.get(m)
            if r is None:
                members.append(m)
            elif isinstance(r, ast.EId):
                members.append(r.name)
            else:
                raise _CannotSubst  # a register set holds names only
        return replace(e, members=tuple(members))
    if isinstance(e, ast.EAscribe):
        return replace(e, arg=_subst(e.arg, sub))
    return e


def _subst_decl(d: ast.Decl, sub: Mapping[str, ast.Expr]) -> ast.Decl:
    if isinstance(d, ast.DLet):
        return replace(d, value=_subst(d.value, sub))
    if isinstance(d, ast.DDef):
        inner = {k: v for k, v in sub.items()
                 if k not in {n for n, _ in d.params}}
        return replace(d, body=_subst(d.body, inner))
    return d


def _count_uses(decls: list[ast.Decl], exprs: list[ast.Expr],
                name: str) -> int:
    n = sum(_occurrences(e, name) for e in exprs)
    for d in decls:
        if isinstance(d, ast.DLet):
            n += _occurrences(d.value, name)
        elif isinstance(d, ast.DDef):
            n += _occurrences(d.body, name)
        tacc: set[str] = set()
        if isinstance(d, (ast.DLet, ast.DType, ast.DMemState)):
            _type_refs(d.ty, tacc)
        elif isinstance(d, ast.DDef):
            for _, t in d.params:
                _type_refs(t, tacc)
            _type_refs(d.result, tacc)
        if name in tacc:
            n += 1
    return n


def _occurrences(e: ast.Expr, name: str) -> int:
    if isinstance(e, ast.EId):
        return 1 if e.name == name else 0
    if isinstance(e, ast.EApp):
        return (1 if e.func == name else 0) \
            + sum(_occurrences(a, name) for a in e.args)
    if isinstance(e, ast.EPtr):
        return (1 if e.region == name else 0) + _occurrences(e.offset, name)
    if isinstance(e, ast.ERegSet):
        return sum(1 for m in e.members if m == name)
    if isinstance(e, ast.EBranchTo):
        return 1 if e.label == name else 0
    if isinstance(e, ast.ELet):
        inner = 0 if e.var == name else _occurrences(e.body, name)
        return _occurrences(e.bound, name) + inner
    if isinstance(e, (ast.EUnop, ast.EDeref, ast.ETxt, ast.EAscribe)):
        return _occurrences(e.arg, name)
    if isinstance(e, ast.EBinop):
        return _occurrences(e.left, name) + _occurrences(e.right, name)
    if isinstance(e, ast.EFetch):
        return _occurrences(e.addr, name)
    if isinstance(e, (ast.EIndex, ast.ESlice)):
        return _occurrences(e.arg, name)
    if isinstance(e, ast.EIf):
        return sum(_occurrences(x, name) for x in (e.cond, e.then, e.els))
    return 0


def _beta_once(e: ast.Expr, d: ast.DDef) -> ast.Expr:
    """Rewrite the one application of d in e to d's substituted body."""
    if isinstance(e, ast.EApp) and e.func == d.name:
        return _subst(d.body, {n: a for (n, _), a in zip(d.params, e.args)})
    if isinstance(e, ast.EUnop):
        return replace(e, arg=_beta_once(e.arg, d))
    if isinstance(e, ast.EBinop):
        return replace(e, left=_beta_once(e.left, d),
                       right=_beta_once(e.right, d))
    if isinstance(e, ast.EDeref):
        return replace(e, arg=_beta_once(e.arg, d))
    if isinstance(e, ast.EFetch):
        return replace(e, addr=_beta_once(e.addr, d))
    if isinstance(e, (ast.EIndex, ast.ESlice, ast.ETxt, ast.EAscribe)):
        return replace(e, arg=_beta_once(e.arg, d))
    if isinstance(e, ast.EApp):
        return replace(e, args=tuple(_beta_once(a, d) for a in e.args))
    if isinstance(e, ast.ELet):
        return replace(e, bound=_beta_once(e.bound, d),
                       body=_beta_once(e.body, d))
    if isinstance(e, ast.EIf):
        return replace(e, cond=_beta_once(e.cond, d),
                       then=_beta_once(e.then, d), els=_beta_once(e.els, d))
    if isinstance(e, ast.EPtr):
        return replace(e, offset=_beta_once(e.offset, d))
    return e


def _has_binder(e: ast.Expr) -> bool:
    if isinstance(e, ast.ELet):
        return True
    if isinstance(e, (ast.EUnop, ast.EDeref, ast.ETxt, ast.EAscribe)):
        return _has_binder(e.arg)
    if isinstance(e, ast.EBinop):
        return _has_binder(e.left) or _has_binder(e.right)
    if isinstance(e, ast.EFetch):
        return _has_binder(e.addr)
    if isinstance(e, (ast.EIndex, ast.ESlice)):
        return _has_binder(e.arg)
    if isinstance(e, ast.EApp):
        return any(_has_binder(a) for a in e.args)
    if isinstance(e, ast.EIf):
        return any(_has_binder(x) for x in (e.cond, e.then, e.els))
    if isinstance(e, ast.EPtr):
        return _has_binder(e.offset)
    return False


def tidy_spec(mt: MachineTypes, spec: ast.SpecFile) -> ast.SpecFile:
    """Fold away indirections the lowering introduced.

    Three rewrites, each meaning-preserving, run to a fixpoint:

      - a let bound to a bare register, label, or literal is inlined
        into its uses and dropped (such a binding cannot fail, so an
        unused one can go too);
      - a helper function applied exactly once, whose body binds
        nothing, is beta-reduced at its sole call site;
      - an unreferenced def or type is dropped.

    Lets with computed bodies stay: they can fail, and they carry the
    names the spec's author chose. State declarations always stay.
    """
    decls = list(spec.decls)
    pre, post = spec.pre, spec.post
    bare = set(mt.registers) | set(mt.labels)

    def is_atomic(e: ast.Expr) -> bool:
        if isinstance(e, ast.EId):
            if e.name in bare:
                return True
            # region labels declared by the spec itself
            return any(isinstance(d, ast.DMemState) and d.label == e.name
                       for d in decls)
        return isinstance(e, (ast.EInt, ast.EBitvec, ast.EBool))

    changed = True
    while changed:
        changed = False

        for i, d in enumerate(decls):
            if isinstance(d, ast.DLet) and is_atomic(d.value):
                sub = {d.name: d.value}
                try:
                    new_decls = [_subst_decl(x, sub)
                                 for x in decls[:i] + decls[i + 1:]]
                    new_pre, new_post = _subst(pre, sub), _subst(post, sub)
                except _CannotSubst:
                    continue
                decls, pre, post = new_decls, new_pre, new_post
                changed = True
                break
        if changed:
            continue

        for i, d in enumerate(decls):
            if not isinstance(d, ast.DDef) or _has_binder(d.body):
                continue
            uses = _count_uses(decls[:i] + decls[i + 1:], [pre, post], d.name)
            if uses != 1:
                continue
            decls = [x if not isinstance(x, (ast.DLet, ast.DDef))
                     else (replace(x, value=_beta_once(x.value, d))
                           if isinstance(x, ast.DLet)
                           else replace(x, body=_beta_once(x.body, d)))
                     for x in decls[:i] + decls[i + 1:]]
            pre, post = _beta_once(pre, d), _beta_once(post, d)
            changed = True
            break
        if changed:
            continue

        for i, d in enumerate(decls):
            if isinstance(d, (ast.DDef, ast.DType)) \
                    and _count_uses(decls[:i] + decls[i + 1:],
                                    [pre, post], d.name) == 0:
                decls = decls[:i] + decls[i + 1:]
                changed = True
                break

    return ast.SpecFile(tuple(decls), spec.frame_regs, spec.frame_mems,
                        pre, post)
