"""Lexer and parsers for all five input formats.

The concrete grammar lives in docs/grammar.md; this module follows it
exactly. Parsing is recursive descent with precedence climbing for
expressions. Includes are spliced during parsing, resolved relative to
the including file, with cycle detection on absolute paths.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Callable, Optional, Union

from .lang import ast
from .lang.types import (
    BOOL,
    INT,
    STRING,
    UNIT,
    AliasType,
    BitType,
    LabelType,
    MemType,
    PtrType,
    RegSetType,
    RegType,
    SymWidth,
    Type,
    Width,
)


class ParseError(Exception):
    def __init__(self, msg: str, path: str, line: int, col: int):
        super().__init__(f"{path}:{line}:{col}: {msg}")
        self.path = path
        self.line = line
        self.col = col


# ----------------------------------------------------------------------- lexer

@dataclass(frozen=True)
class Token:
    kind: str  # ident | int | bv | str | op | eof
    text: str
    line: int
    col: int
    value: object = None


# Words reserved in every context. Contextual keywords (modify, pre, bit,
# memory, ...) stay ordinary identifiers and are matched by spelling.
RESERVED = frozenset([
    "let", "letstate", "type", "invariant", "def", "proc", "defop",
    "if", "then", "else", "for", "in", "skip", "crash", "assert",
    "fetch", "store", "true", "false", "BRANCH", "branchto",
])

# Multi-character operators, longest first so maximal munch works.
_B_OPS = ("bs<=", "bs>=", "bs<", "bs>", "b<=", "b>=", "b<", "b>",
          "b+", "b-", "b*", "b/")
_OPS = (">>s", "==", "!=", "<=", ">=", "<<", ">>", "&&", "||", "^^",
        "<-", "->", "+", "-", "*", "/", "<", ">", "=", "!",
        "(", ")", "[", "]", "{", "}", ",", ";", ":", ".")

_IDENT_START = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CONT = _IDENT_START | frozenset("0123456789")
_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


def tokenize(text: str, path: str = "<input>") -> list[Token]:
    toks: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(text)

    def err(msg: str) -> ParseError:
        return ParseError(msg, path, line, col)

    def advance(k: int) -> None:
        nonlocal i, line, col
        for _ in range(k):
            if text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        c = text[i]
        if c in " \t\r\n":
            advance(1)
            continue
        if text.startswith("(*", i):
            depth = 1
            advance(2)
            while depth:
                if i >= n:
                    raise err("unterminated comment")
                if text.startswith("(*", i):
                    depth += 1
                    advance(2)
                elif text.startswith("*)", i):
                    depth -= 1
                    advance(2)
                else:
                    advance(1)
            continue
        tline, tcol = line, col
        if c == '"':
            advance(1)
            buf = []
            while True:
                if i >= n:
                    raise err("unterminated string")
                ch = text[i]
                if ch == '"':
                    advance(1)
                    break
                if ch == "\\":
                    if i + 1 >= n or text[i + 1] not in _ESCAPES:
                        raise err("unknown string escape")
                    buf.append(_ESCAPES[text[i + 1]])
                    advance(2)
                    continue
                if ch == "\n":
                    raise err("newline in string")
                buf.append(ch)
                advance(1)
            s = "".join(buf)
            toks.append(Token("str", s, tline, tcol, s))
            continue
        if text.startswith("0x", i) or text.startswith("0b", i):
            digits = "0123456789abcdefABCDEF" if text[i + 1] == "x" else "01"
            j = i + 2
            while j < n and text[j] in digits:
                j += 1
            if j == i + 2:
                raise err(f"malformed bitvector literal {text[i:i+2]!r}")
            lit = text[i:j]
            if text[i + 1] == "x":
                width, bits = 4 * (j - i - 2), int(lit[2:], 16)
            else:
                width, bits = j - i - 2, int(lit[2:], 2)
            advance(j - i)
            toks.append(Token("bv", lit, tline, tcol, (width, bits)))
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("int", text[i:j], tline, tcol, int(text[i:j])))
            advance(j - i)
            continue
        if text.startswith("lower-with", i) and (
                i + 10 >= n or text[i + 10] not in _IDENT_CONT):
            toks.append(Token("ident", "lower-with", tline, tcol))
            advance(10)
            continue
        if c == "b":
            for op in _B_OPS:
                if text.startswith(op, i):
                    toks.append(Token("op", op, tline, tcol))
                    advance(len(op))
                    break
            else:
                j = i
                while j < n and text[j] in _IDENT_CONT:
                    j += 1
                toks.append(Token("ident", text[i:j], tline, tcol))
                advance(j - i)
            continue
        if c in _IDENT_START:
            j = i
            while j < n and text[j] in _IDENT_CONT:
                j += 1
            toks.append(Token("ident", text[i:j], tline, tcol))
            advance(j - i)
            continue
        for op in _OPS:
            if text.startswith(op, i):
                toks.append(Token("op", op, tline, tcol))
                advance(len(op))
                break
        else:
            raise err(f"unexpected character {c!r}")
    toks.append(Token("eof", "", line, col))
    return toks


# ------------------------------------------------------------------ operators

_BINOP_LEVEL: dict[str, tuple[int, ast.BinOp]] = {
    "||": (1, ast.BinOp.OR),
    "^^": (2, ast.BinOp.XOR),
    "&&": (3, ast.BinOp.AND),
    "==": (4, ast.BinOp.EQ), "=": (4, ast.BinOp.EQ), "!=": (4, ast.BinOp.NE),
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
}

_POSTFIX_BUILTIN = {"hex": "hex", "dec": "dec", "bin": "bin", "lbl": "lbl"}

_TYPE_SUFFIX = frozenset(["bit", "vec", "reg", "regset", "label", "ptr"])


class Parser:
    def __init__(self, text: str, path: str = "<input>",
                 include_stack: tuple[str, ...] = ()):
        self.toks = tokenize(text, path)
        self.path = path
        self.pos = 0
        # absolute paths of every file on the include chain, for cycles
        self.include_stack = include_stack
        # inside a let binding, a bare "in" closes the binding instead of
        # acting as the membership operator; parentheses restore it
        self._in_ok = True

    # -- token plumbing

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        j = min(self.pos + k, len(self.toks) - 1)
        return self.toks[j]

    def err(self, msg: str, tok: Optional[Token] = None) -> ParseError:
        t = tok or self.tok
        return ParseError(msg, self.path, t.line, t.col)

    def here(self) -> ast.Pos:
        return ast.Pos(self.path, self.tok.line, self.tok.col)

    def next(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.pos += 1
        return t

    def at_op(self, text: str) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    def at_word(self, word: str) -> bool:
        return self.tok.kind == "ident" and self.tok.text == word

    def eat_op(self, text: str) -> Token:
        if not self.at_op(text):
            raise self.err(f"expected {text!r}, found {self.tok.text!r}")
        return self.next()

    def eat_word(self, word: str) -> Token:
        if not self.at_word(word):
            raise self.err(f"expected {word!r}, found {self.tok.text!r}")
        return self.next()

    def eat_name(self, what: str = "identifier") -> str:
        t = self.tok
        if t.kind != "ident":
            raise self.err(f"expected {what}, found {t.text!r}")
        if t.text in RESERVED:
            raise self.err(f"{t.text!r} is a reserved word")
        self.next()
        return t.text

    # -- types

    def parse_width(self) -> Width:
        t = self.tok
        if t.kind == "int":
            self.next()
            return t.value  # type: ignore[return-value]
        if t.kind == "ident" and t.text not in RESERVED:
            self.next()
            return SymWidth(t.text)
        raise self.err("expected a width (integer or symbolic constant)")

    def _at_width_type(self) -> bool:
        t, t2 = self.tok, self.peek()
        return (t.kind in ("int", "ident") and t.text not in RESERVED
                and t2.kind == "ident" and t2.text in _TYPE_SUFFIX)

    def parse_type(self) -> Type:
        t = self.tok
        if t.kind == "ident" and t.text in ("unit", "int", "bool", "string"):
            self.next()
            return {"unit": UNIT, "int": INT, "bool": BOOL, "string": STRING}[t.text]
        if self._at_width_type():
            w = self.parse_width()
            suffix = self.next().text
            if suffix in ("bit", "vec"):
                # a memory type continues with "<len> len <ref> ref"
                if (self.tok.kind in ("int", "ident")
                        and self.tok.text not in RESERVED
                        and self.peek().kind == "ident"
                        and self.peek().text == "len"):
                    length = self.parse_width()
                    self.eat_word("len")
                    ref = self.parse_width()
                    self.eat_word("ref")
                    if self.at_word("memory"):
                        self.next()
                    return MemType(w, length, ref)
                return BitType(w)
            if suffix == "reg":
                return RegType(w)
            if suffix == "regset":
                return RegSetType(w)
            if suffix == "label":
                return LabelType(w)
            return PtrType(w)
        if t.kind == "ident" and t.text not in RESERVED:
            self.next()
            return AliasType(t.text)
        raise self.err(f"expected a type, found {t.text!r}")

    # -- expressions

    def parse_expr(self) -> ast.Expr:
        p = self.here()
        if self.tok.kind == "ident" and self.tok.text == "if":
            self.next()
            cond = self.parse_expr()
            self.eat_word("then")
            then = self.parse_expr()
            self.eat_word("else")
            els = self.parse_expr()
            return ast.EIf(cond, then, els, pos=p)
        if self.tok.kind == "ident" and self.tok.text == "let":
            self.next()
            name = self.eat_name()
            self.eat_op(":")
            ty = self.parse_type()
            self.eat_op("=")
            bound = self._parse_bound_expr()
            self.eat_word("in")
            body = self.parse_expr()
            return ast.ELet(name, ty, bound, body, pos=p)
        return self._parse_binop(1)

    def _parse_bound_expr(self) -> ast.Expr:
        old = self._in_ok
        self._in_ok = False
        try:
            return self.parse_expr()
        finally:
            self._in_ok = old

    def _parse_nested_expr(self) -> ast.Expr:
        old = self._in_ok
        self._in_ok = True
        try:
            return self.parse_expr()
        finally:
            self._in_ok = old

    def _parse_binop(self, min_level: int) -> ast.Expr:
        left = self._parse_unary()
        while True:
            t = self.tok
            if t.kind not in ("op", "ident"):
                break
            ent = _BINOP_LEVEL.get(t.text)
            if ent is None or ent[0] < min_level:
                break
            if t.text == "in" and not self._in_ok:
                break
            # "in" also terminates let-bodies; as a binop it only follows a
            # complete operand, which is exactly where we are
            level, op = ent
            p = self.here()
            self.next()
            right = self._if_or(lambda: self._parse_binop(level + 1))
            left = ast.EBinop(op, left, right, pos=p)
        return left

    def _if_or(self, sub: Callable[[], ast.Expr]) -> ast.Expr:
        # allow if/let on the right of a binary operator (greedy arms)
        if self.tok.kind == "ident" and self.tok.text in ("if", "let"):
            return self.parse_expr()
        return sub()

    def _parse_unary(self) -> ast.Expr:
        t = self.tok
        p = self.here()
        if t.kind == "op" and t.text in ("-", "!", "b-"):
            self.next()
            op = {"-": ast.UnOp.NEG, "!": ast.UnOp.NOT, "b-": ast.UnOp.BNEG}[t.text]
            return ast.EUnop(op, self._parse_unary(), pos=p)
        if t.kind == "ident" and t.text == "bnot":
            self.next()
            return ast.EUnop(ast.UnOp.BNOT, self._parse_unary(), pos=p)
        if t.kind == "op" and t.text == "*":
            self.next()
            return ast.EDeref(self._parse_unary(), pos=p)
        return self._parse_postfix()

    def _parse_postfix(self) -> ast.Expr:
        e = self._parse_primary()
        while True:
            p = self.here()
            if self.at_op("("):
                if not isinstance(e, ast.EId):
                    raise self.err("only named functions can be applied")
                self.next()
                args = self._parse_args()
                e = ast.EApp(e.name, tuple(args), pos=e.pos)
            elif self.at_op("["):
                self.next()
                lo = self.parse_width()
                if self.at_op(","):
                    self.next()
                    hi = self.parse_width()
                    self.eat_op("]")
                    e = ast.ESlice(e, lo, hi, pos=p)
                else:
                    self.eat_op("]")
                    e = ast.EIndex(e, lo, pos=p)
            elif self.at_op(".") and self.peek().kind == "ident":
                self.next()
                fld = self.next().text
                if fld == "txt":
                    e = ast.ETxt(e, pos=p)
                elif fld in _POSTFIX_BUILTIN:
                    e = ast.EApp(_POSTFIX_BUILTIN[fld], (e,), pos=p)
                else:
                    raise self.err(f"unknown field {fld!r} (txt/hex/dec/bin/lbl)")
            else:
                return e

    def _parse_args(self) -> list[ast.Expr]:
        args: list[ast.Expr] = []
        if self.at_op(")"):
            self.next()
            return args
        args.append(self._parse_nested_expr())
        while self.at_op(","):
            self.next()
            args.append(self._parse_nested_expr())
        self.eat_op(")")
        return args

    def _parse_primary(self) -> ast.Expr:
        t = self.tok
        p = self.here()
        if t.kind == "int":
            self.next()
            return ast.EInt(t.value, pos=p)  # type: ignore[arg-type]
        if t.kind == "bv":
            self.next()
            w, b = t.value  # type: ignore[misc]
            return ast.EBitvec(w, b, pos=p)
        if t.kind == "str":
            self.next()
            return ast.EString(t.value, pos=p)  # type: ignore[arg-type]
        if t.kind == "ident":
            if t.text == "true":
                self.next()
                return ast.EBool(True, pos=p)
            if t.text == "false":
                self.next()
                return ast.EBool(False, pos=p)
            if t.text == "fetch":
                self.next()
                close = self._open_pair()
                addr = self._parse_nested_expr()
                self.eat_op(",")
                w = self.parse_width()
                self.eat_op(close)
                return ast.EFetch(addr, w, pos=p)
            if t.text == "branchto":
                self.next()
                self.eat_op("(")
                name = self.eat_name("label name")
                self.eat_op(")")
                return ast.EBranchTo(name, pos=p)
            if t.text in RESERVED:
                raise self.err(f"{t.text!r} cannot start an expression")
            self.next()
            return ast.EId(t.text, pos=p)
        if self.at_op("("):
            self.next()
            e = self._parse_nested_expr()
            if self.at_op(":"):
                self.next()
                ty = self.parse_type()
                self.eat_op(")")
                return ast.EAscribe(e, ty, pos=p)
            self.eat_op(")")
            return e
        if self.at_op("["):
            self.next()
            region = self.eat_name("region name")
            self.eat_op(",")
            off = self._parse_nested_expr()
            self.eat_op("]")
            return ast.EPtr(region, off, pos=p)
        if self.at_op("{"):
            self.next()
            names: list[str] = []
            if not self.at_op("}"):
                names.append(self.eat_name("register name"))
                while self.at_op(","):
                    self.next()
                    names.append(self.eat_name("register name"))
            self.eat_op("}")
            return ast.ERegSet(tuple(names), pos=p)
        raise self.err(f"expected an expression, found {t.text!r}")

    def _open_pair(self) -> str:
        if self.at_op("("):
            self.next()
            return ")"
        if self.at_op("["):
            self.next()
            return "]"
        raise self.err("expected '(' or '['")

    # -- statements

    def parse_stmt_seq(self) -> ast.Stmt:
        p = self.here()
        stmts = [self.parse_stmt()]
        while self.at_op(";"):
            self.next()
            stmts.append(self.parse_stmt())
        if len(stmts) == 1:
            return stmts[0]
        return ast.SSeq(tuple(stmts), pos=p)

    def parse_stmt(self) -> ast.Stmt:
        t = self.tok
        p = self.here()
        if t.kind == "ident":
            w = t.text
            if w == "skip":
                self.next()
                return ast.SSkip(pos=p)
            if w == "crash":
                self.next()
                return ast.SCrash(pos=p)
            if w == "assert":
                self.next()
                self.eat_op("(")
                cond = self.parse_expr()
                self.eat_op(")")
                return ast.SAssert(cond, pos=p)
            if w == "BRANCH":
                self.next()
                self.eat_op("(")
                arg = self.parse_expr()
                self.eat_op(")")
                return ast.SBranch(arg, pos=p)
            if w == "store":
                self.next()
                close = self._open_pair()
                addr = self._parse_nested_expr()
                self.eat_op(",")
                width = self.parse_width()
                self.eat_op(close)
                self.eat_op("<-")
                val = self.parse_expr()
                return ast.SStore(addr, width, val, pos=p)
            if w == "if":
                self.next()
                cond = self.parse_expr()
                self.eat_word("then")
                then = self.parse_stmt_seq()
                if self.at_word("else"):
                    self.next()
                    els = self.parse_stmt_seq()
                else:
                    els = ast.SSkip(pos=p)
                return ast.SIf(cond, then, els, pos=p)
            if w == "let":
                self.next()
                name = self.eat_name()
                self.eat_op(":")
                ty = self.parse_type()
                self.eat_op("=")
                bound = self._parse_bound_expr()
                self.eat_word("in")
                body = self.parse_stmt_seq()
                return ast.SLet(name, ty, bound, body, pos=p)
            if w == "for":
                self.next()
                var = self.eat_name()
                self.eat_op("=")
                lo = self._parse_int_literal()
                self.eat_word("to")
                hi = self._parse_int_literal()
                self.eat_word("do")
                body = self.parse_stmt_seq()
                self.eat_word("done")
                return ast.SFor(var, lo, hi, body, pos=p)
            if w not in RESERVED and self.peek().kind == "op" \
                    and self.peek().text == "(":
                name = self.eat_name()
                self.next()
                args = self._parse_args()
                return ast.SCall(name, tuple(args), pos=p)
            raise self.err(f"expected a statement, found {w!r}")
        if self.at_op("*"):
            self.next()
            dest = self._parse_unary()
            self.eat_op("<-")
            val = self.parse_expr()
            return ast.SAssign(dest, val, pos=p)
        if self.at_op("("):
            self.next()
            s = self.parse_stmt_seq()
            self.eat_op(")")
            return s
        raise self.err(f"expected a statement, found {t.text!r}")

    def _parse_int_literal(self) -> int:
        neg = False
        if self.at_op("-"):
            self.next()
            neg = True
        t = self.tok
        if t.kind != "int":
            raise self.err("expected an integer literal")
        self.next()
        v = t.value  # type: ignore[assignment]
        return -v if neg else v  # type: ignore[operator,return-value]

    # -- shared declaration pieces

    def _parse_params(self, stop: str) -> tuple[tuple[str, Type], ...]:
        """IDENT ":" type, repeated until the stop operator."""
        params: list[tuple[str, Type]] = []
        while not self.at_op(stop):
            name = self.eat_name("parameter name")
            self.eat_op(":")
            params.append((name, self.parse_type()))
        return tuple(params)

    def _parse_let(self) -> ast.Decl:
        p = self.here()
        self.eat_word("let")
        t = self.tok
        if t.kind != "ident" or t.text in RESERVED:
            raise self.err("expected a name after 'let'")
        if self.peek().kind == "op" and self.peek().text == ".":
            reg = self.eat_name()
            self.eat_op(".")
            self.eat_word("txt")
            self.eat_op("=")
            return ast.DLetTxt(reg, self.parse_expr(), pos=p)
        name = self.eat_name()
        self.eat_op(":")
        ty = self.parse_type()
        self.eat_op("=")
        return ast.DLet(name, ty, self.parse_expr(), pos=p)

    def _parse_letstate(self) -> ast.Decl:
        p = self.here()
        self.eat_word("letstate")
        control = dontgate = False
        if self.at_word("control"):
            self.next()
            control = True
        if self.at_word("dontgate"):
            self.next()
            dontgate = True
        name = self.eat_name()
        self.eat_op(":")
        ty = self.parse_type()
        label: Optional[str] = None
        if self.at_word("with"):
            self.next()
            label = self.eat_name("label name")
        if isinstance(ty, MemType):
            if control or dontgate:
                raise self.err("control/dontgate apply to registers, not memory")
            return ast.DMemState(name, ty, label, pos=p)
        if label is not None:
            raise self.err("'with' labels apply to memory state only")
        return ast.DRegState(name, ty, control, dontgate, pos=p)

    def _parse_def(self) -> ast.DDef:
        p = self.here()
        self.eat_word("def")
        name = self.eat_name()
        params = self._parse_params("->")
        self.eat_op("->")
        result = self.parse_type()
        self.eat_op("=")
        return ast.DDef(name, params, result, self.parse_expr(), pos=p)

    def _parse_frame_items(self) -> tuple[list[str], list[ast.Expr]]:
        """Registers and memory cells after a modify: keyword."""
        regs: list[str] = []
        mems: list[ast.Expr] = []
        while True:
            if self.at_op("["):
                p = self.here()
                self.next()
                region = self.eat_name("region name")
                self.eat_op(",")
                off = self._parse_nested_expr()
                self.eat_op("]")
                mems.append(ast.EPtr(region, off, pos=p))
            elif (self.tok.kind == "ident" and self.tok.text not in RESERVED
                  and self.tok.text not in _SECTION_WORDS):
                regs.append(self.next().text)
            else:
                break
        if not regs and not mems:
            raise self.err("modify: needs at least one register or cell")
        return regs, mems

    # -- machine descriptions

    def parse_machine(self) -> ast.MachineFile:
        decls: list[ast.Decl] = []
        defops: list[ast.DDefop] = []
        while self.tok.kind != "eof":
            d = self._parse_machine_decl(decls, defops)
            if d is not None:
                (defops if isinstance(d, ast.DDefop) else decls).append(d)
        return ast.MachineFile(tuple(decls), tuple(defops))

    def _parse_machine_decl(self, decls: list[ast.Decl],
                            defops: list[ast.DDefop]) -> Optional[ast.Decl]:
        t = self.tok
        if t.kind != "ident":
            raise self.err(f"expected a declaration, found {t.text!r}")
        w = t.text
        if w == "include":
            sub = self._parse_include().parse_machine()
            decls.extend(sub.decls)
            defops.extend(sub.defops)
            return None
        if w == "let":
            return self._parse_let()
        if w == "letstate":
            return self._parse_letstate()
        if w == "type":
            p = self.here()
            self.next()
            name = self.eat_name()
            self.eat_op("=")
            return ast.DType(name, self.parse_type(), pos=p)
        if w == "invariant":
            p = self.here()
            self.next()
            self.eat_op(":")
            return ast.DInvariant(self.parse_expr(), pos=p)
        if w == "def":
            return self._parse_def()
        if w == "proc":
            p = self.here()
            self.next()
            name = self.eat_name()
            params = self._parse_params("=")
            self.eat_op("=")
            self.eat_op("(")
            body = self.parse_stmt_seq()
            self.eat_op(")")
            return ast.DProc(name, params, body, pos=p)
        if w == "defop":
            return self._parse_defop()
        raise self.err(f"unknown declaration keyword {w!r}")

    def _parse_defop(self) -> ast.DDefop:
        p = self.here()
        self.eat_word("defop")
        name = self.eat_name("operation name")
        params: list[tuple[str, Type]] = []
        while not self.at_op("{"):
            pn = self.eat_name("operand name")
            self.eat_op(":")
            params.append((pn, self.parse_type()))
        self.eat_op("{")
        self.eat_word("txt")
        self.eat_op("=")
        txt = self.parse_expr()
        self.eat_op(",")
        self.eat_word("sem")
        self.eat_op("=")
        self.eat_op("[")
        sem = self.parse_stmt_seq()
        self.eat_op("]")
        self.eat_op("}")
        return ast.DDefop(name, tuple(params), txt, sem, pos=p)

    def _parse_include(self) -> "Parser":
        self.eat_word("include")
        t = self.tok
        if t.kind != "str":
            raise self.err("include expects a quoted path")
        self.next()
        base = os.path.dirname(os.path.abspath(self.path))
        target = os.path.normpath(os.path.join(base, t.text))  # type: ignore[arg-type]
        me = os.path.abspath(self.path)
        if target in self.include_stack or target == me:
            raise self.err(f"include cycle through {target}")
        try:
            with open(target, encoding="utf-8") as f:
                text = f.read()
        except OSError as e:
            raise self.err(f"cannot read include {t.text!r}: {e.strerror}")
        return Parser(text, target, self.include_stack + (me,))

    # -- machine-level specs

    def parse_spec(self) -> ast.SpecFile:
        decls: list[ast.Decl] = []
        frame_regs: list[str] = []
        frame_mems: list[ast.Expr] = []
        pre: Optional[ast.Expr] = None
        while self.tok.kind != "eof":
            if self.at_word("let"):
                decls.append(self._parse_let())
            elif self.at_word("letstate"):
                decls.append(self._parse_letstate())
            elif self.at_word("def"):
                decls.append(self._parse_def())
            elif self.at_word("type"):
                p = self.here()
                self.next()
                name = self.eat_name()
                self.eat_op("=")
                decls.append(ast.DType(name, self.parse_type(), pos=p))
            elif self.at_word("include"):
                sub = self._parse_include().parse_spec_decls()
                decls.extend(sub)
            elif self.at_word("frame"):
                self.next()
                self.eat_op(":")
                self.eat_word("modify")
                self.eat_op(":")
                r, m = self._parse_frame_items()
                frame_regs.extend(r)
                frame_mems.extend(m)
            elif self.at_word("modify"):
                self.next()
                self.eat_op(":")
                r, m = self._parse_frame_items()
                frame_regs.extend(r)
                frame_mems.extend(m)
            elif self.at_word("pre"):
                self.next()
                self.eat_op(":")
                pre = self.parse_expr()
                self.eat_word("post")
                self.eat_op(":")
                post = self.parse_expr()
                if self.tok.kind != "eof":
                    raise self.err("trailing input after postcondition")
                if pre is None:
                    raise self.err("missing precondition")
                return ast.SpecFile(tuple(decls), tuple(frame_regs),
                                    tuple(frame_mems), pre, post)
            else:
                raise self.err(
                    f"expected a spec declaration or pre:, found {self.tok.text!r}")
        raise self.err("specification ended without pre:/post:")

    def parse_spec_decls(self) -> list[ast.Decl]:
        """Body of an included spec fragment: declarations only."""
        decls: list[ast.Decl] = []
        while self.tok.kind != "eof":
            if self.at_word("let"):
                decls.append(self._parse_let())
            elif self.at_word("letstate"):
                decls.append(self._parse_letstate())
            elif self.at_word("include"):
                decls.extend(self._parse_include().parse_spec_decls())
            else:
                raise self.err("included spec fragments may only declare")
        return decls

    # -- lowering files

    def parse_lowering(self) -> ast.LoweringFile:
        mods: list[ast.LoweringModule] = []
        while self.tok.kind != "eof":
            self.eat_word("lowering")
            name = self.eat_name("module name")
            self.eat_op("{")
            decls: list[ast.Decl] = []
            regs: list[str] = []
            mems: list[ast.Expr] = []
            imports: list[str] = []
            while not self.at_op("}"):
                if self.at_word("let"):
                    decls.append(self._parse_let())
                elif self.at_word("letstate"):
                    decls.append(self._parse_letstate())
                elif self.at_word("type"):
                    p = self.here()
                    self.next()
                    tn = self.eat_name()
                    self.eat_op("=")
                    decls.append(ast.DType(tn, self.parse_type(), pos=p))
                elif self.at_word("def"):
                    decls.append(self._parse_def())
                elif self.at_word("modify"):
                    self.next()
                    self.eat_op(":")
                    r, m = self._parse_frame_items()
                    regs.extend(r)
                    mems.extend(m)
                elif self.at_word("import"):
                    self.next()
                    imports.append(self.eat_name("module name"))
                else:
                    raise self.err(
                        f"unexpected {self.tok.text!r} in lowering module")
            self.eat_op("}")
            mods.append(ast.LoweringModule(name, tuple(decls), tuple(regs),
                                           tuple(mems), tuple(imports)))
        return ast.LoweringFile(tuple(mods))

    # -- portable specs

    def parse_alewife(self) -> ast.AleSpec:
        decls: list[ast.AleDecl] = []
        lower_with: list[str] = []
        frame_regs: list[str] = []
        frame_mems: list[ast.Expr] = []
        while self.tok.kind != "eof":
            p = self.here()
            if self.at_word("require"):
                self.next()
                if self.at_word("type"):
                    self.next()
                    decls.append(ast.ARequireType(self.eat_name(), pos=p))
                elif self.at_word("value"):
                    self.next()
                    name = self.eat_name()
                    self.eat_op(":")
                    decls.append(ast.ARequireValue(name, self.parse_type(), pos=p))
                elif self.at_word("function"):
                    self.next()
                    name = self.eat_name()
                    self.eat_op(":")
                    self.eat_op("(")
                    ptypes = [self.parse_type()]
                    while self.at_op(","):
                        self.next()
                        ptypes.append(self.parse_type())
                    self.eat_op(")")
                    result = self.parse_type()
                    decls.append(ast.ARequireFunc(name, tuple(ptypes), result, pos=p))
                else:
                    raise self.err("require expects type, value, or function")
            elif self.at_word("provide"):
                self.next()
                if self.at_word("type"):
                    self.next()
                    name = self.eat_name()
                    self.eat_op("=")
                    decls.append(ast.AProvideType(name, self.parse_type(), pos=p))
                elif self.at_word("value"):
                    self.next()
                    name = self.eat_name()
                    self.eat_op(":")
                    ty = self.parse_type()
                    self.eat_op("=")
                    decls.append(ast.AProvideValue(name, ty, self.parse_expr(), pos=p))
                elif self.at_word("function"):
                    self.next()
                    name = self.eat_name()
                    params = self._parse_params("->")
                    self.eat_op("->")
                    result = self.parse_type()
                    self.eat_op("=")
                    decls.append(ast.AProvideFunc(name, params, result,
                                                  self.parse_expr(), pos=p))
                else:
                    raise self.err("provide expects type, value, or function")
            elif self.at_word("region"):
                self.next()
                name = self.eat_name()
                self.eat_op(":")
                ty = self.parse_type()
                if not isinstance(ty, MemType):
                    raise self.err("regions need a memory type")
                label: Optional[str] = None
                if self.at_word("with"):
                    self.next()
                    label = self.eat_name("label name")
                decls.append(ast.ARegion(name, ty, label, pos=p))
            elif self.at_word("lower-with"):
                self.next()
                self.eat_op(":")
                while (self.tok.kind == "ident"
                       and self.tok.text not in RESERVED
                       and self.tok.text not in _SECTION_WORDS):
                    lower_with.append(self.next().text)
                if not lower_with:
                    raise self.err("lower-with: needs module names")
            elif self.at_word("modify"):
                self.next()
                self.eat_op(":")
                r, m = self._parse_frame_items()
                frame_regs.extend(r)
                frame_mems.extend(m)
            elif self.at_word("let"):
                d = self._parse_let()
                if not isinstance(d, ast.DLet):
                    raise self.err("only plain lets are allowed here", self.tok)
                decls.append(ast.ABlockLet(d.name, d.ty, d.value, pos=p))
            elif self.at_word("pre"):
                self.next()
                self.eat_op(":")
                pre = self.parse_expr()
                self.eat_word("post")
                self.eat_op(":")
                post = self.parse_expr()
                if self.tok.kind != "eof":
                    raise self.err("trailing input after postcondition")
                return ast.AleSpec(tuple(decls), tuple(lower_with),
                                   tuple(frame_regs), tuple(frame_mems),
                                   pre, post)
            else:
                raise self.err(
                    f"expected a portable-spec declaration, found {self.tok.text!r}")
        raise self.err("portable spec ended without pre:/post:")

    # -- instruction sequences

    def parse_program(self) -> ast.Program:
        instrs: list[ast.Instruction] = []
        while self.tok.kind != "eof":
            p = self.here()
            self.eat_op("(")
            op = self.eat_name("operation name")
            operands: list[ast.Expr] = []
            while not self.at_op(")"):
                t = self.tok
                tp = self.here()
                if t.kind == "ident" and t.text not in RESERVED:
                    self.next()
                    operands.append(ast.EId(t.text, pos=tp))
                elif t.kind == "bv":
                    self.next()
                    w, b = t.value  # type: ignore[misc]
                    operands.append(ast.EBitvec(w, b, pos=tp))
                elif t.kind == "int":
                    self.next()
                    operands.append(ast.EInt(t.value, pos=tp))  # type: ignore[arg-type]
                else:
                    raise self.err(f"bad operand {t.text!r}")
            self.eat_op(")")
            instrs.append(ast.Instruction(op, tuple(operands), pos=p))
        return tuple(instrs)


# Words that end a frame-item or lower-with list (they start the next
# section of a spec-like file).
_SECTION_WORDS = frozenset([
    "modify", "frame", "pre", "post", "require", "provide", "region",
    "lower-with", "import", "lowering", "include",
])


# ------------------------------------------------------------------ public api

def parse_expr_text(text: str, path: str = "<expr>") -> ast.Expr:
    p = Parser(text, path)
    e = p.parse_expr()
    if p.tok.kind != "eof":
        raise p.err("trailing input after expression")
    return e


def parse_stmt_text(text: str, path: str = "<stmt>") -> ast.Stmt:
    p = Parser(text, path)
    s = p.parse_stmt_seq()
    if p.tok.kind != "eof":
        raise p.err("trailing input after statement")
    return s


def parse_machine_text(text: str, path: str = "<machine>") -> ast.MachineFile:
    return Parser(text, path).parse_machine()


def parse_spec_text(text: str, path: str = "<spec>") -> ast.SpecFile:
    return Parser(text, path).parse_spec()


def parse_lowering_text(text: str, path: str = "<lowering>") -> ast.LoweringFile:
    return Parser(text, path).parse_lowering()


def parse_alewife_text(text: str, path: str = "<alewife>") -> ast.AleSpec:
    return Parser(text, path).parse_alewife()


def parse_program_text(text: str, path: str = "<program>") -> ast.Program:
    return Parser(text, path).parse_program()


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as f:
        return f.read()


def parse_machine_file(path: str) -> ast.MachineFile:
    return parse_machine_text(_read(path), path)


def parse_spec_file(path: str) -> ast.SpecFile:
    return parse_spec_text(_read(path), path)


def parse_lowering_file(path: str) -> ast.LoweringFile:
    return parse_lowering_text(_read(path), path)


def parse_alewife_file(path: str) -> ast.AleSpec:
    return parse_alewife_text(_read(path), path)


def parse_program_file(path: str) -> ast.Program:
    return parse_program_text(_read(path), path)
