"""Lexing, parsing, and print/reparse stability.

The running-example sources here mirror the corpus files; parsing them is
a hard requirement. The roundtrip property (parse of printed output equals
the original AST) runs over generated expressions and statements.
"""

import pytest
from hypothesis import given, settings, strategies as st

from blocksmith.lang import ast
from blocksmith.lang.types import (
    BOOL, INT, AliasType, BitType, MemType, PtrType, RegType, SymWidth,
)
from blocksmith.parse import (
    ParseError,
    parse_alewife_text,
    parse_expr_text,
    parse_lowering_text,
    parse_machine_file,
    parse_machine_text,
    parse_program_text,
    parse_spec_text,
    parse_stmt_text,
    tokenize,
)
from blocksmith.printer import fmt_alewife, fmt_expr, fmt_machine, fmt_program, fmt_spec, fmt_stmt


class TestLexer:
    def test_hex_literal_width(self):
        t = tokenize("0x0058")[0]
        assert t.kind == "bv" and t.value == (16, 0x58)

    def test_bin_literal_width(self):
        t = tokenize("0b1110")[0]
        assert t.kind == "bv" and t.value == (4, 0b1110)

    def test_three_digit_hex(self):
        assert tokenize("0x058")[0].value == (12, 0x58)

    def test_b_operators_lex_whole(self):
        ops = [t.text for t in tokenize("a b+ b b<= c bs< d")[:-1]]
        assert ops == ["a", "b+", "b", "b<=", "c", "bs<", "d"]

    def test_b_words_stay_idents(self):
        kinds = [(t.kind, t.text) for t in tokenize("band bor bxor bnot base")[:-1]]
        assert all(k == "ident" for k, _ in kinds)
        assert [t for _, t in kinds] == ["band", "bor", "bxor", "bnot", "base"]

    def test_shift_maximal_munch(self):
        assert [t.text for t in tokenize("x >>s y >> z")[:-1]] == \
            ["x", ">>s", "y", ">>", "z"]

    def test_nested_comments(self):
        toks = tokenize("a (* one (* two *) still *) b")
        assert [t.text for t in toks[:-1]] == ["a", "b"]

    def test_unterminated_comment(self):
        with pytest.raises(ParseError):
            tokenize("(* no end")

    def test_string_escapes(self):
        assert tokenize(r'"a\"b\\c\n"')[0].value == 'a"b\\c\n'

    def test_line_col_positions(self):
        t = tokenize("ab\n  cd")[1]
        assert (t.line, t.col) == (2, 3)

    def test_lower_with_single_token(self):
        assert tokenize("lower-with:")[0].text == "lower-with"


class TestExprParsing:
    def test_precedence_mul_over_add(self):
        e = parse_expr_text("1 + 2 * 3")
        assert isinstance(e, ast.EBinop) and e.op is ast.BinOp.ADD
        assert isinstance(e.right, ast.EBinop) and e.right.op is ast.BinOp.MUL

    def test_deref_vs_multiply(self):
        e = parse_expr_text("*a * *b")
        assert e.op is ast.BinOp.MUL
        assert isinstance(e.left, ast.EDeref) and isinstance(e.right, ast.EDeref)

    def test_comparison_tighter_than_and(self):
        e = parse_expr_text("*r6 == [M, 0] && *r0 == 0x00000000")
        assert e.op is ast.BinOp.AND

    def test_equals_synonym(self):
        assert parse_expr_text("*r4 = 0x01") == parse_expr_text("*r4 == 0x01")

    def test_left_associativity(self):
        e = parse_expr_text("1 - 2 - 3")
        assert e.op is ast.BinOp.SUB and isinstance(e.left, ast.EBinop)

    def test_ascription(self):
        e = parse_expr_text("(1: wordsize vec)")
        assert isinstance(e, ast.EAscribe)
        assert e.ty == BitType(SymWidth("wordsize"))

    def test_pointer_literal(self):
        e = parse_expr_text("[DispMem, 0] b+ 0x00000058")
        assert e.op is ast.BinOp.BADD and isinstance(e.left, ast.EPtr)

    def test_fetch_both_brackets(self):
        assert parse_expr_text("fetch(p, 32)") == parse_expr_text("fetch[p, 32]")

    def test_fetch_symbolic_width(self):
        e = parse_expr_text("fetch(p, wordsize)")
        assert e.width == SymWidth("wordsize")

    def test_postfix_desugar(self):
        assert parse_expr_text("imm.dec") == ast.EApp("dec", (ast.EId("imm"),))
        assert parse_expr_text("x.lbl") == ast.EApp("lbl", (ast.EId("x"),))
        assert parse_expr_text("rd.txt") == ast.ETxt(ast.EId("rd"))

    def test_index_and_slice(self):
        assert parse_expr_text("x[3]") == ast.EIndex(ast.EId("x"), 3)
        assert parse_expr_text("x[1, 3]") == ast.ESlice(ast.EId("x"), 1, 3)

    def test_regset_literal(self):
        assert parse_expr_text("{r1, r2}") == ast.ERegSet(("r1", "r2"))

    def test_membership_needs_parens_in_let(self):
        e = parse_expr_text("let m: bool = (r1 in {r1, r2}) in m")
        assert isinstance(e, ast.ELet)
        assert isinstance(e.bound, ast.EBinop) and e.bound.op is ast.BinOp.IN

    def test_if_greedy_else(self):
        e = parse_expr_text("if c then a else b && d")
        assert isinstance(e, ast.EIf)
        assert isinstance(e.els, ast.EBinop)

    def test_branchto(self):
        assert parse_expr_text("branchto(done_lbl)") == ast.EBranchTo("done_lbl")

    def test_error_carries_position(self):
        with pytest.raises(ParseError) as exc:
            parse_expr_text("1 +\n  )")
        assert ":2:" in str(exc.value)


class TestStmtParsing:
    def test_sequence_grouping(self):
        s = parse_stmt_text("skip; crash; skip")
        assert isinstance(s, ast.SSeq) and len(s.stmts) == 3

    def test_greedy_then_arm(self):
        s = parse_stmt_text("if c then skip; crash else skip")
        assert isinstance(s.then, ast.SSeq) and len(s.then.stmts) == 2
        assert isinstance(s.els, ast.SSkip)

    def test_parens_cut_sequences(self):
        s = parse_stmt_text("(if c then skip else crash); crash")
        assert isinstance(s, ast.SSeq)
        assert isinstance(s.stmts[0], ast.SIf)

    def test_dangling_else_binds_nearest(self):
        s = parse_stmt_text("if a then if b then skip else crash else skip")
        # with greedy arms the first else closes the inner if
        assert isinstance(s.then, ast.SIf)
        assert isinstance(s.then.els, ast.SCrash)
        assert isinstance(s.els, ast.SSkip)

    def test_store_and_assign(self):
        s = parse_stmt_text("store(p, 32) <- *r1")
        assert isinstance(s, ast.SStore) and s.width == 32
        s2 = parse_stmt_text("*rd <- 0x01")
        assert isinstance(s2, ast.SAssign)

    def test_let_in_statement(self):
        s = parse_stmt_text("let a: 32 bit = *r1 in *r2 <- a")
        assert isinstance(s, ast.SLet)
        assert isinstance(s.body, ast.SAssign)

    def test_for_loop(self):
        s = parse_stmt_text("for i = 0 to 7 do skip done")
        assert isinstance(s, ast.SFor) and (s.lo, s.hi) == (0, 7)

    def test_branch_and_assert(self):
        assert isinstance(parse_stmt_text("BRANCH(0x03)"), ast.SBranch)
        assert isinstance(parse_stmt_text("assert (x == y)"), ast.SAssert)

    def test_proc_call(self):
        s = parse_stmt_text("clear_flags(r1, 0x00)")
        assert isinstance(s, ast.SCall) and s.proc == "clear_flags"


MACHINE_SRC = """
(* bitvector and register types *)
let wordsize: int = 32
type word = 32 bit
type register = 32 reg
letstate r0: register
letstate control ie_flag: 1 reg
let r0.txt = "$0"
invariant: *r0 == 0x00000000
def valid_gpreg r: register -> bool = true
def sign_extend x: 16 bit -> word = bv_to_len(32, x)
defop SLTU rd: register rs: register rt: register {
  txt = format("sltu {1}, {2}, {3}", rd.txt, rs.txt, rt.txt),
  sem = [
    assert (valid_gpreg(rd)); assert (valid_gpreg(rs));
    assert (valid_gpreg(rt)); assert (rs != rt); assert (rt != r0);
    if rd == r0 then skip
    else if ( *rs b< *rt ) then *rd <- 0x00000001
    else *rd <- 0x00000000 ]
}
defop LW rd: register rs: register imm: 16 bit {
  txt = format("lw {1}, {2}({3})", rd.txt, imm.dec, rs.txt),
  sem = [
    if rd == r0 then skip
    else let addr: word = *rs b+ sign_extend(imm)
    in *rd <- fetch[addr, 32] ]
}
"""

SPEC_SRC = """
letstate DispMem:
  32 bit 268 len 32 ref memory
frame: modify: r2
let crit_pc: 32 bit =
  [DispMem, 0] b+ 0x00000058
let crit: bool =
    *r5 b< fetch(crit_pc, 32)
pre: ( *r6 == [DispMem, 0] ) &&
    ( *r0 == 0x00000000 )
post: (if crit then *r4 = 0x00000001
    else *r4 = 0x00000000) &&
    ( *r0 == 0x00000000 )
"""

LOWERING_SRC = """
lowering disp_defs {
  let pc_reg: register = r5
  let disp_reg: register = r6
  let disp_area_reg: register = r4
  let DISP_MAX: int = 268
  def get_crit_ptr base: word->word=
    base b+ 0x00000058 }
lowering may_use_flags { }
lowering disp_scratch {modify: r2}
"""

ALEWIFE_SRC = """
require type word
require value wordsize: int
require value pc_reg: wordsize reg
require value disp_reg: wordsize reg
require value disp_area_reg: wordsize reg
require value DISP_MAX: int
require function get_crit_ptr: (word) word
region DispMem: wordsize bit DISP_MAX len wordsize ref
lower-with: disp_defs may_use_flags disp_scratch

let crit_ptr: wordsize ptr = get_crit_ptr([DispMem, 0])
let crit : bool = *pc_reg b< fetch(crit_ptr, wordsize)
pre: *disp_reg == [DispMem, 0]
post: if crit then *disp_area_reg == (1: wordsize vec)
else *disp_area_reg == (0: wordsize vec)
"""

PROGRAM_SRC = """
  (LW r2 r6 0x0058)
  (SLTU r4 r5 r2)
"""


class TestRunningExample:
    def test_machine_parses(self):
        m = parse_machine_text(MACHINE_SRC)
        assert [op.name for op in m.defops] == ["SLTU", "LW"]
        reg = [d for d in m.decls if isinstance(d, ast.DRegState)]
        assert reg[0].name == "r0" and reg[0].ty == AliasType("register")
        assert reg[1].control and not reg[1].dontgate

    def test_spec_parses(self):
        s = parse_spec_text(SPEC_SRC)
        assert s.frame_regs == ("r2",)
        mems = [d for d in s.decls if isinstance(d, ast.DMemState)]
        assert mems[0].ty == MemType(32, 268, 32)

    def test_lowering_parses(self):
        l = parse_lowering_text(LOWERING_SRC)
        assert [m.name for m in l.modules] == \
            ["disp_defs", "may_use_flags", "disp_scratch"]
        assert l.modules[2].frame_regs == ("r2",)
        assert l.modules[1].decls == ()

    def test_alewife_parses(self):
        a = parse_alewife_text(ALEWIFE_SRC)
        assert a.lower_with == ("disp_defs", "may_use_flags", "disp_scratch")
        region = [d for d in a.decls if isinstance(d, ast.ARegion)][0]
        assert region.ty == MemType(SymWidth("wordsize"), SymWidth("DISP_MAX"),
                                    SymWidth("wordsize"))
        fn = [d for d in a.decls if isinstance(d, ast.ARequireFunc)][0]
        assert fn.params == (AliasType("word"),)

    def test_alewife_block_lets_use_ptr_type(self):
        a = parse_alewife_text(ALEWIFE_SRC)
        lets = [d for d in a.decls if isinstance(d, ast.ABlockLet)]
        assert lets[0].ty == PtrType(SymWidth("wordsize"))

    def test_program_parses(self):
        p = parse_program_text(PROGRAM_SRC)
        assert p[0].opcode == "LW"
        assert p[0].operands[2] == ast.EBitvec(16, 0x58)

    def test_letstate_plain_width(self):
        m = parse_machine_text("letstate r9: 32 reg")
        d = m.decls[0]
        assert isinstance(d, ast.DRegState) and d.ty == RegType(32)

    def test_files_reprint_stably(self):
        for src, parse, fmt in [
            (MACHINE_SRC, parse_machine_text, fmt_machine),
            (SPEC_SRC, parse_spec_text, fmt_spec),
            (ALEWIFE_SRC, parse_alewife_text, fmt_alewife),
            (PROGRAM_SRC, parse_program_text, fmt_program),
        ]:
            one = parse(src)
            assert parse(fmt(one)) == one


class TestIncludes:
    def test_include_splices(self, tmp_path):
        (tmp_path / "regs.casp").write_text("letstate r1: 8 reg\n")
        main = tmp_path / "main.casp"
        main.write_text('include "regs.casp"\nletstate r2: 8 reg\n')
        m = parse_machine_file(str(main))
        assert [d.name for d in m.decls] == ["r1", "r2"]

    def test_include_cycle_detected(self, tmp_path):
        (tmp_path / "a.casp").write_text('include "b.casp"\n')
        (tmp_path / "b.casp").write_text('include "a.casp"\n')
        with pytest.raises(ParseError) as exc:
            parse_machine_file(str(tmp_path / "a.casp"))
        assert "cycle" in str(exc.value)

    def test_missing_include(self, tmp_path):
        f = tmp_path / "m.casp"
        f.write_text('include "gone.casp"\n')
        with pytest.raises(ParseError):
            parse_machine_file(str(f))


# ------------------------------------------------------- generated roundtrips

NAMES = ["aa", "bx", "c3", "dd", "rv", "tmp_0", "zz"]
REGIONS = ["MemA", "MemB"]

_types = st.sampled_from(
    [INT, BOOL, BitType(4), BitType(32), RegType(8), AliasType("word"),
     BitType(SymWidth("wordsize"))])


def exprs(depth: int = 3) -> st.SearchStrategy:
    leaf = st.one_of(
        st.integers(0, 200).map(ast.EInt),
        st.booleans().map(ast.EBool),
        st.tuples(st.integers(1, 8), st.data()).flatmap(
            lambda _: st.integers(1, 8).flatmap(
                lambda w: st.integers(0, 2**w - 1).map(
                    lambda b: ast.EBitvec(w, b)))),
        st.sampled_from(NAMES).map(ast.EId),
        st.sampled_from(NAMES).map(lambda n: ast.ERegSet((n,))),
        st.sampled_from(REGIONS).map(lambda r: ast.EPtr(r, ast.EInt(0))),
        st.sampled_from(NAMES).map(ast.EBranchTo),
    )
    if depth == 0:
        return leaf
    sub = exprs(depth - 1)
    return st.one_of(
        leaf,
        st.tuples(st.sampled_from(list(ast.UnOp)), sub).map(
            lambda t: ast.EUnop(*t)),
        st.tuples(st.sampled_from(list(ast.BinOp)), sub, sub).map(
            lambda t: ast.EBinop(*t)),
        sub.map(ast.EDeref),
        st.tuples(sub, sub, sub).map(lambda t: ast.EIf(*t)),
        st.tuples(st.sampled_from(NAMES), _types, sub, sub).map(
            lambda t: ast.ELet(*t)),
        st.tuples(st.sampled_from(NAMES),
                  st.lists(sub, max_size=2)).map(
            lambda t: ast.EApp(t[0], tuple(t[1]))),
        st.tuples(sub, st.integers(0, 7)).map(lambda t: ast.EIndex(*t)),
        st.tuples(sub, st.integers(0, 3), st.integers(4, 8)).map(
            lambda t: ast.ESlice(*t)),
        st.tuples(sub, st.sampled_from([8, 16, 32])).map(
            lambda t: ast.EFetch(*t)),
        sub.map(ast.ETxt),
        st.tuples(sub, _types).map(lambda t: ast.EAscribe(*t)),
    )


def stmts(depth: int = 3) -> st.SearchStrategy:
    e = exprs(2)
    leaf = st.one_of(
        st.just(ast.SSkip()),
        st.just(ast.SCrash()),
        e.map(ast.SAssert),
        e.map(ast.SBranch),
        st.tuples(e, e).map(lambda t: ast.SAssign(*t)),
        st.tuples(e, st.sampled_from([8, 32]), e).map(
            lambda t: ast.SStore(*t)),
        st.tuples(st.sampled_from(NAMES), st.lists(e, max_size=2)).map(
            lambda t: ast.SCall(t[0], tuple(t[1]))),
    )
    if depth == 0:
        return leaf
    sub = stmts(depth - 1)
    return st.one_of(
        leaf,
        st.lists(sub, min_size=2, max_size=3).map(
            lambda ss: ast.SSeq(tuple(ss))),
        st.tuples(e, sub, sub).map(lambda t: ast.SIf(*t)),
        st.tuples(st.sampled_from(NAMES), _types, e, sub).map(
            lambda t: ast.SLet(*t)),
        st.tuples(st.sampled_from(NAMES), st.integers(0, 3),
                  st.integers(0, 3), sub).map(lambda t: ast.SFor(*t)),
    )


def _flatten_seqs(s: ast.Stmt) -> ast.Stmt:
    """Printed sequences reparse flattened; normalize before comparing."""
    if isinstance(s, ast.SSeq):
        out: list[ast.Stmt] = []
        for sub in s.stmts:
            f = _flatten_seqs(sub)
            if isinstance(f, ast.SSeq):
                out.extend(f.stmts)
            else:
                out.append(f)
        if len(out) == 1:
            return out[0]
        return ast.SSeq(tuple(out))
    if isinstance(s, ast.SIf):
        return ast.SIf(s.cond, _flatten_seqs(s.then), _flatten_seqs(s.els))
    if isinstance(s, ast.SLet):
        return ast.SLet(s.var, s.ty, s.bound, _flatten_seqs(s.body))
    if isinstance(s, ast.SFor):
        return ast.SFor(s.var, s.lo, s.hi, _flatten_seqs(s.body))
    return s


class TestRoundtrip:
    @settings(max_examples=300, deadline=None)
    @given(exprs())
    def test_expr_roundtrip(self, e):
        assert parse_expr_text(fmt_expr(e)) == e

    @settings(max_examples=300, deadline=None)
    @given(stmts())
    def test_stmt_roundtrip(self, s):
        got = parse_stmt_text(fmt_stmt(s))
        assert _flatten_seqs(got) == _flatten_seqs(s)

    @settings(max_examples=100, deadline=None)
    @given(exprs())
    def test_print_is_idempotent(self, e):
        once = fmt_expr(e)
        assert fmt_expr(parse_expr_text(once)) == once
