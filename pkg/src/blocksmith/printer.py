"""Render ASTs back to concrete syntax.

The invariant that matters: reparsing printed output yields the same AST.
Parentheses are inserted from operator precedence, statement sequences are
disambiguated against the greedy if/let arms, and a space is forced after
'(' when the next character would otherwise open a comment.
"""

from __future__ import annotations

from .lang import ast
from .lang.types import MemType, SymWidth, Type, Width

_LEVEL: dict[ast.BinOp, int] = {}
for _text, (_lv, _op) in {
    "||": (1, ast.BinOp.OR), "^^": (2, ast.BinOp.XOR), "&&": (3, ast.BinOp.AND),
    "==": (4, ast.BinOp.EQ), "!=": (4, ast.BinOp.NE),
    "<": (4, ast.BinOp.LT), "<=": (4, ast.BinOp.LE),
    ">": (4, ast.BinOp.GT), ">=": (4, ast.BinOp.GE),
    "b<": (4, ast.BinOp.ULT), "b<=": (4, ast.BinOp.ULE),
    "b>": (4, ast.BinOp.UGT), "b>=": (4, ast.BinOp.UGE),
    "bs<": (4, ast.BinOp.SLT), "bs<=": (4, ast.BinOp.SLE),
    "bs>": (4, ast.BinOp.SGT), "bs>=": (4, ast.BinOp.SGE),
    "subset": (4, ast.BinOp.SUBSET), "in": (4, ast.BinOp.IN),
    "bor": (5, ast.BinOp.BOR), "union": (5, ast.BinOp.UNION),
    "setminus": (5, ast.BinOp.SETMINUS),
    "bxor": (6, ast.BinOp.BXOR),
    "band": (7, ast.BinOp.BAND), "inter": (7, ast.BinOp.INTER),
    "<<": (8, ast.BinOp.SHL), ">>": (8, ast.BinOp.SHR), ">>s": (8, ast.BinOp.SHRS),
    "+": (9, ast.BinOp.ADD), "-": (9, ast.BinOp.SUB),
    "b+": (9, ast.BinOp.BADD), "b-": (9, ast.BinOp.BSUB),
    "*": (10, ast.BinOp.MUL), "/": (10, ast.BinOp.DIV),
    "b*": (10, ast.BinOp.BMUL), "b/": (10, ast.BinOp.BDIV),
}.items():
    _LEVEL[_op] = _lv

_UNARY = 11
_POSTFIX = 12

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t"}


def _paren(s: str) -> str:
    # "( *x" not "(*x": the latter opens a comment
    if s.startswith("*"):
        return f"( {s} )"
    return f"({s})"


def _args(*parts: str) -> str:
    return _paren(", ".join(parts))


def bv_literal(width: int, bits: int) -> str:
    if width % 4 == 0:
        return f"0x{bits:0{width // 4}x}"
    return f"0b{bits:0{width}b}"


def fmt_width(w: Width) -> str:
    return w.name if isinstance(w, SymWidth) else str(w)


def fmt_type(t: Type) -> str:
    return str(t)


def fmt_string(s: str) -> str:
    return '"' + "".join(_ESCAPES.get(c, c) for c in s) + '"'


def fmt_expr(e: ast.Expr, min_level: int = 0) -> str:
    s, lv = _expr(e)
    return _paren(s) if lv < min_level else s


def _expr(e: ast.Expr) -> tuple[str, int]:
    if isinstance(e, ast.EInt):
        return str(e.value), 13
    if isinstance(e, ast.EBitvec):
        return bv_literal(e.width, e.value), 13
    if isinstance(e, ast.EBool):
        return ("true" if e.value else "false"), 13
    if isinstance(e, ast.EString):
        return fmt_string(e.value), 13
    if isinstance(e, ast.EId):
        return e.name, 13
    if isinstance(e, ast.EUnop):
        op = {ast.UnOp.NEG: "-", ast.UnOp.BNEG: "b- ",
              ast.UnOp.NOT: "!", ast.UnOp.BNOT: "bnot "}[e.op]
        return op + fmt_expr(e.arg, _UNARY), _UNARY
    if isinstance(e, ast.EBinop):
        lv = _LEVEL[e.op]
        return (f"{fmt_expr(e.left, lv)} {e.op.value} {fmt_expr(e.right, lv + 1)}",
                lv)
    if isinstance(e, ast.EDeref):
        return "*" + fmt_expr(e.arg, _UNARY), _UNARY
    if isinstance(e, ast.EFetch):
        return "fetch" + _args(fmt_expr(e.addr), fmt_width(e.width)), 13
    if isinstance(e, ast.EIndex):
        return f"{fmt_expr(e.arg, _POSTFIX)}[{fmt_width(e.index)}]", _POSTFIX
    if isinstance(e, ast.ESlice):
        return (f"{fmt_expr(e.arg, _POSTFIX)}"
                f"[{fmt_width(e.lo)}, {fmt_width(e.hi)}]"), _POSTFIX
    if isinstance(e, ast.EApp):
        return e.func + _args(*(fmt_expr(a) for a in e.args)), _POSTFIX
    if isinstance(e, ast.ELet):
        return (f"let {e.var}: {fmt_type(e.ty)} = {_let_bound(e.bound)} in "
                f"{fmt_expr(e.body)}"), 0
    if isinstance(e, ast.EIf):
        return (f"if {fmt_expr(e.cond)} then {fmt_expr(e.then)} "
                f"else {fmt_expr(e.els)}"), 0
    if isinstance(e, ast.EPtr):
        return f"[{e.region}, {fmt_expr(e.offset)}]", 13
    if isinstance(e, ast.ETxt):
        return fmt_expr(e.arg, _POSTFIX) + ".txt", _POSTFIX
    if isinstance(e, ast.EBranchTo):
        return f"branchto({e.label})", 13
    if isinstance(e, ast.ERegSet):
        return "{" + ", ".join(e.members) + "}", 13
    if isinstance(e, ast.EAscribe):
        arg = fmt_expr(e.arg)
        if arg.startswith("*"):
            return f"( {arg} : {fmt_type(e.ty)})", 13
        return f"({arg} : {fmt_type(e.ty)})", 13
    raise TypeError(f"unprintable expression {type(e).__name__}")


def _let_bound(e: ast.Expr) -> str:
    # a bound expression ends at the first bare "in", so a membership test
    # or a nested let must be wrapped
    s = fmt_expr(e)
    if isinstance(e, (ast.ELet, ast.EIf)) or _has_top_level_in(e):
        return _paren(s)
    return s


def _has_top_level_in(e: ast.Expr) -> bool:
    if isinstance(e, ast.EBinop):
        if e.op is ast.BinOp.IN:
            return True
        return _has_top_level_in(e.left) or _has_top_level_in(e.right)
    if isinstance(e, ast.EUnop):
        return _has_top_level_in(e.arg)
    if isinstance(e, ast.EDeref):
        return _has_top_level_in(e.arg)
    return False


# ---------------------------------------------------------------- statements

def fmt_stmt(s: ast.Stmt, indent: str = "") -> str:
    return "; ".join(_stmt_parts(s, indent))


def _stmt_parts(s: ast.Stmt, indent: str) -> list[str]:
    if isinstance(s, ast.SSeq):
        parts: list[str] = []
        for i, sub in enumerate(s.stmts):
            text = fmt_stmt(sub, indent)
            # a greedy form would swallow the rest of the sequence
            if i + 1 < len(s.stmts) and isinstance(sub, (ast.SIf, ast.SLet)):
                text = _paren(text)
            parts.append(text)
        return parts
    return [_stmt_one(s, indent)]


def _stmt_one(s: ast.Stmt, indent: str) -> str:
    if isinstance(s, ast.SSkip):
        return "skip"
    if isinstance(s, ast.SCrash):
        return "crash"
    if isinstance(s, ast.SAssert):
        return f"assert {_paren(fmt_expr(s.cond))}"
    if isinstance(s, ast.SBranch):
        return "BRANCH" + _args(fmt_expr(s.arg))
    if isinstance(s, ast.SAssign):
        return f"*{fmt_expr(s.dest, _UNARY)} <- {fmt_expr(s.value)}"
    if isinstance(s, ast.SStore):
        return (f"store{_args(fmt_expr(s.addr), fmt_width(s.width))}"
                f" <- {fmt_expr(s.value)}")
    if isinstance(s, ast.SIf):
        # always print the else arm so nested ifs reattach correctly
        return (f"if {fmt_expr(s.cond)} then {fmt_stmt(s.then, indent)} "
                f"else {fmt_stmt(s.els, indent)}")
    if isinstance(s, ast.SLet):
        return (f"let {s.var}: {fmt_type(s.ty)} = {_let_bound(s.bound)} in "
                f"{fmt_stmt(s.body, indent)}")
    if isinstance(s, ast.SFor):
        return (f"for {s.var} = {s.lo} to {s.hi} do "
                f"{fmt_stmt(s.body, indent)} done")
    if isinstance(s, ast.SCall):
        return s.proc + _args(*(fmt_expr(a) for a in s.args))
    raise TypeError(f"unprintable statement {type(s).__name__}")


# -------------------------------------------------------------- declarations

def _fmt_memtype_decl(ty: Type, label: str | None) -> str:
    assert isinstance(ty, MemType)
    suffix = f" memory with {label}" if label else " memory"
    return f"{fmt_type(ty)}{suffix}"


def fmt_decl(d: ast.Decl) -> str:
    if isinstance(d, ast.DLet):
        return f"let {d.name}: {fmt_type(d.ty)} = {fmt_expr(d.value)}"
    if isinstance(d, ast.DLetTxt):
        return f"let {d.reg}.txt = {fmt_expr(d.value)}"
    if isinstance(d, ast.DType):
        return f"type {d.name} = {fmt_type(d.ty)}"
    if isinstance(d, ast.DRegState):
        mods = ("control " if d.control else "") + ("dontgate " if d.dontgate else "")
        return f"letstate {mods}{d.name}: {fmt_type(d.ty)}"
    if isinstance(d, ast.DMemState):
        return f"letstate {d.name}: {_fmt_memtype_decl(d.ty, d.label)}"
    if isinstance(d, ast.DInvariant):
        return f"invariant: {fmt_expr(d.cond)}"
    if isinstance(d, ast.DDef):
        params = " ".join(f"{n}: {fmt_type(t)}" for n, t in d.params)
        sep = " " if params else ""
        return (f"def {d.name}{sep}{params} -> {fmt_type(d.result)} = "
                f"{fmt_expr(d.body)}")
    if isinstance(d, ast.DProc):
        params = " ".join(f"{n}: {fmt_type(t)}" for n, t in d.params)
        sep = " " if params else ""
        return f"proc {d.name}{sep}{params} = ({fmt_stmt(d.body)})"
    if isinstance(d, ast.DDefop):
        params = " ".join(f"{n}: {fmt_type(t)}" for n, t in d.params)
        sep = " " if params else ""
        return (f"defop {d.name}{sep}{params} {{\n"
                f"  txt = {fmt_expr(d.txt)},\n"
                f"  sem = [ {fmt_stmt(d.sem)} ]\n"
                f"}}")
    raise TypeError(f"unprintable declaration {type(d).__name__}")


def _fmt_frame_lines(regs: tuple[str, ...], mems: tuple[ast.Expr, ...],
                     keyword: str) -> list[str]:
    items = list(regs) + [fmt_expr(m) for m in mems]
    if not items:
        return []
    return [f"{keyword} {' '.join(items)}"]


# --------------------------------------------------------------------- files

def fmt_machine(m: ast.MachineFile) -> str:
    lines = [fmt_decl(d) for d in m.decls]
    lines.extend(fmt_decl(op) for op in m.defops)
    return "\n".join(lines) + "\n"


def fmt_spec(s: ast.SpecFile) -> str:
    lines = [fmt_decl(d) for d in s.decls]
    lines.extend(_fmt_frame_lines(s.frame_regs, s.frame_mems, "frame: modify:"))
    lines.append(f"pre: {fmt_expr(s.pre)}")
    lines.append(f"post: {fmt_expr(s.post)}")
    return "\n".join(lines) + "\n"


def fmt_lowering(f: ast.LoweringFile) -> str:
    out = []
    for mod in f.modules:
        body: list[str] = [f"  import {i}" for i in mod.imports]
        body.extend("  " + fmt_decl(d).replace("\n", "\n  ") for d in mod.decls)
        body.extend("  " + ln for ln in
                    _fmt_frame_lines(mod.frame_regs, mod.frame_mems, "modify:"))
        if body:
            out.append(f"lowering {mod.name} {{\n" + "\n".join(body) + "\n}")
        else:
            out.append(f"lowering {mod.name} {{ }}")
    return "\n".join(out) + "\n"


def fmt_ale_decl(d: ast.AleDecl) -> str:
    if isinstance(d, ast.ARequireType):
        return f"require type {d.name}"
    if isinstance(d, ast.ARequireValue):
        return f"require value {d.name}: {fmt_type(d.ty)}"
    if isinstance(d, ast.ARequireFunc):
        params = ", ".join(fmt_type(t) for t in d.params)
        return f"require function {d.name}: ({params}) {fmt_type(d.result)}"
    if isinstance(d, ast.AProvideType):
        return f"provide type {d.name} = {fmt_type(d.ty)}"
    if isinstance(d, ast.AProvideValue):
        return f"provide value {d.name}: {fmt_type(d.ty)} = {fmt_expr(d.value)}"
    if isinstance(d, ast.AProvideFunc):
        params = " ".join(f"{n}: {fmt_type(t)}" for n, t in d.params)
        sep = " " if params else ""
        return (f"provide function {d.name}{sep}{params} -> "
                f"{fmt_type(d.result)} = {fmt_expr(d.body)}")
    if isinstance(d, ast.ARegion):
        suffix = f" with {d.label}" if d.label else ""
        return f"region {d.name}: {fmt_type(d.ty)}{suffix}"
    if isinstance(d, ast.ABlockLet):
        return f"let {d.name}: {fmt_type(d.ty)} = {fmt_expr(d.value)}"
    raise TypeError(f"unprintable declaration {type(d).__name__}")


def fmt_alewife(a: ast.AleSpec) -> str:
    lines: list[str] = []
    emitted_lw = False
    for d in a.decls:
        if isinstance(d, ast.ABlockLet) and not emitted_lw:
            if a.lower_with:
                lines.append("lower-with: " + " ".join(a.lower_with))
            emitted_lw = True
        lines.append(fmt_ale_decl(d))
    if not emitted_lw and a.lower_with:
        lines.append("lower-with: " + " ".join(a.lower_with))
    lines.extend(_fmt_frame_lines(a.frame_regs, a.frame_mems, "modify:"))
    lines.append(f"pre: {fmt_expr(a.pre)}")
    lines.append(f"post: {fmt_expr(a.post)}")
    return "\n".join(lines) + "\n"


def fmt_program(p: ast.Program) -> str:
    return "".join(f"({i.opcode}{''.join(' ' + fmt_expr(op) for op in i.operands)})\n"
                   for i in p)
