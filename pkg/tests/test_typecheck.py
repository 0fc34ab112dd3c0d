"""Static checks: well-formedness, expression/statement/declaration typing."""

import pytest

from blocksmith import corpus
from blocksmith.lang import ast
from blocksmith.lang.types import (
    BOOL, INT, STRING, AliasType, BitType, MemType, RegSetType, RegType,
)
from blocksmith.parse import (
    parse_expr_text, parse_machine_file, parse_machine_text,
    parse_program_file, parse_program_text, parse_spec_text, parse_spec_file,
    parse_stmt_text,
)
from blocksmith.typecheck import (
    CheckError, MachineTypes, TypeEnv, resolve_type, type_expr, type_machine,
    type_program, type_spec, type_stmt, wf_type,
)


@pytest.fixture(scope="module")
def mips() -> MachineTypes:
    return type_machine(
        parse_machine_file(str(corpus.corpus_path("mips_subset.casp"))))


@pytest.fixture(scope="module")
def toy() -> MachineTypes:
    return type_machine(
        parse_machine_file(str(corpus.corpus_path("toy.casp"))))


@pytest.fixture(scope="module")
def arm() -> MachineTypes:
    return type_machine(
        parse_machine_file(str(corpus.corpus_path("arm_subset.casp"))))


MIPS_SPEC = """
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


class TestWellFormed:
    def test_bit_ok(self):
        assert wf_type(TypeEnv(), BitType(32)) == BitType(32)

    def test_zero_width_rejected(self):
        with pytest.raises(CheckError):
            wf_type(TypeEnv(), BitType(0))

    def test_alias_resolves(self):
        env = TypeEnv(aliases={"word": BitType(32)})
        assert wf_type(env, AliasType("word")) == BitType(32)

    def test_unknown_alias(self):
        with pytest.raises(CheckError):
            wf_type(TypeEnv(), AliasType("nope"))

    def test_sub_byte_cells_rejected(self):
        with pytest.raises(CheckError):
            wf_type(TypeEnv(), MemType(4, 2, 4))


class TestExprTyping:
    def test_spec_pre_atom(self, mips):
        env = type_spec(mips, parse_spec_text(MIPS_SPEC))
        assert type_expr(env, parse_expr_text("*r6 == [DispMem, 0]")) == BOOL

    def test_fetch_width(self, mips):
        env = TypeEnv(vars={"p": BitType(32)}, regions={})
        assert type_expr(env, parse_expr_text("fetch(p, 32)")) == BitType(32)

    def test_bv_width_mismatch(self):
        with pytest.raises(CheckError):
            type_expr(TypeEnv(), parse_expr_text("0b01 b+ 0b011"))

    def test_deref_needs_register(self):
        env = TypeEnv(vars={"x": BitType(32)})
        with pytest.raises(CheckError):
            type_expr(env, parse_expr_text("*x"))

    def test_register_identity_compare(self, mips):
        assert type_expr(mips.env, parse_expr_text("r1 != r2")) == BOOL

    def test_regset_membership(self, mips):
        assert type_expr(mips.env, parse_expr_text("r1 in {r1, r2}")) == BOOL
        assert type_expr(
            mips.env, parse_expr_text("{r1} union {r2}")) == RegSetType(32)

    def test_label_subsumes_to_bits(self, toy):
        e = parse_expr_text("scratch_base b+ 0x2")
        assert type_expr(toy.env, e) == BitType(4)

    def test_int_vec_ascription(self, mips):
        env = TypeEnv(consts={"wordsize": 32})
        assert type_expr(env, parse_expr_text("(1: wordsize vec)")) \
            == BitType(32)

    def test_oversized_ascription_rejected(self):
        with pytest.raises(CheckError):
            type_expr(TypeEnv(), parse_expr_text("(16: 4 vec)"))

    def test_branchto_outside_post_rejected(self, toy):
        with pytest.raises(CheckError):
            type_expr(toy.env, parse_expr_text("branchto(out)"))

    def test_format_arity_checked(self, mips):
        with pytest.raises(CheckError):
            type_expr(mips.env,
                      parse_expr_text('format("a {1} {2}", r1.txt)'))

    def test_if_arms_must_agree(self):
        with pytest.raises(CheckError):
            type_expr(TypeEnv(), parse_expr_text("if true then 1 else 0b1"))


class TestStmtTyping:
    def test_store_from_fetch(self, mips):
        env = TypeEnv(dict(mips.env.aliases), dict(mips.env.vars),
                      dict(mips.env.consts), dict(mips.env.regions))
        env.vars["rd"] = RegType(32)
        env.vars["addr"] = BitType(32)
        type_stmt(env, parse_stmt_text("*rd <- fetch[addr, 32]"))

    def test_branch_operand_is_8_bit(self, mips):
        env = TypeEnv(vars={"x": BitType(8), "y": BitType(32)})
        type_stmt(env, parse_stmt_text("BRANCH(x)"))
        with pytest.raises(CheckError):
            type_stmt(env, parse_stmt_text("BRANCH(y)"))

    def test_store_width_mismatch(self, mips):
        env = TypeEnv(vars={"p": BitType(32), "v": BitType(16)})
        with pytest.raises(CheckError):
            type_stmt(env, parse_stmt_text("store(p, 32) <- v"))

    def test_assign_width_mismatch(self, mips):
        env = TypeEnv(vars={"rd": RegType(32), "v": BitType(16)})
        with pytest.raises(CheckError):
            type_stmt(env, parse_stmt_text("*rd <- v"))


class TestDeclTyping:
    def test_mips_machine_env(self, mips):
        assert len(mips.registers) == 9
        assert sum(1 for r in mips.registers if r not in mips.control) == 8
        assert resolve_type(mips.env, AliasType("word")) == BitType(32)
        assert sorted(mips.ops) == [
            "ADDIU", "ADDU", "BEQ", "LUI", "LW", "ORI", "SLTU", "SW"]
        assert mips.env.consts["wordsize"] == 32

    def test_toy_machine_env(self, toy):
        assert len(toy.registers) == 9
        assert toy.dontgate == {"fl"}
        assert toy.labels == {"scratch_base": "Scratch"}
        assert len(toy.ops) == 13

    def test_arm_machine_env(self, arm):
        assert arm.control == {"N", "Z", "C", "V"}
        assert sorted(arm.ops) == ["CMP_reg", "LDR_imm", "MOV_imm"]

    def test_duplicate_let_rejected(self):
        with pytest.raises(CheckError):
            type_machine(parse_machine_text(
                "let x: int = 1\nlet x: int = 2\n"))

    def test_string_operand_rejected(self):
        src = 'defop J target: string {\n  txt = "j",\n  sem = [ skip ]\n}'
        with pytest.raises(CheckError) as exc:
            type_machine(parse_machine_text(src))
        assert "operand" in str(exc.value)

    def test_regset_operand_rejected(self):
        src = ('letstate r1: 4 reg\n'
               'defop K s: 4 regset {\n  txt = "k",\n  sem = [ skip ]\n}')
        with pytest.raises(CheckError):
            type_machine(parse_machine_text(src))

    def test_invariant_must_be_bool(self):
        with pytest.raises(CheckError):
            type_machine(parse_machine_text(
                "letstate r1: 4 reg\ninvariant: *r1\n"))


class TestSpecTyping:
    def test_lowered_disp_check_ok(self, mips):
        type_spec(mips, parse_spec_text(MIPS_SPEC))

    def test_non_bool_post_rejected(self, mips):
        with pytest.raises(CheckError):
            type_spec(mips, parse_spec_text("pre: true\npost: 0b01\n"))

    def test_frame_memory_label_rejected(self, toy):
        spec = parse_spec_text(
            "frame: modify: scratch_base\npre: true\npost: true\n")
        with pytest.raises(CheckError):
            type_spec(toy, spec)

    def test_spec_decls_do_not_leak(self, mips):
        before = set(mips.env.vars)
        type_spec(mips, parse_spec_text(MIPS_SPEC))
        assert set(mips.env.vars) == before
        assert "DispMem" not in mips.env.regions

    @pytest.mark.parametrize("case", corpus.TOY_SPECS, ids=lambda c: c.spec)
    def test_toy_corpus_specs_check(self, toy, case):
        type_spec(toy, parse_spec_file(str(corpus.corpus_path(case.spec))))


class TestProgramTyping:
    def test_mips_witness(self, mips):
        prog = parse_program_file(
            str(corpus.corpus_path("disp_check_mips.prog")))
        type_program(mips, prog)

    def test_arm_witness(self, arm):
        prog = parse_program_file(
            str(corpus.corpus_path("disp_check_arm.prog")))
        type_program(arm, prog)

    def test_unknown_op(self, mips):
        with pytest.raises(CheckError):
            type_program(mips, parse_program_text("(NOP)\n"))

    def test_operand_count(self, mips):
        with pytest.raises(CheckError):
            type_program(mips, parse_program_text("(LW r1 r2)\n"))

    def test_immediate_width(self, mips):
        with pytest.raises(CheckError):
            type_program(mips, parse_program_text("(LW r1 r2 0x58)\n"))

    def test_register_operand_must_be_a_name(self, toy):
        with pytest.raises(CheckError):
            type_program(toy, parse_program_text("(MOVI 0x1 0x2)\n"))
