"""Value-level semantics: operators, extraction, builtins.

Slice expectations were frozen from an independent LSB-first bit-list
oracle (notes kept outside the package) rather than from the
implementation's shift-and-mask path.
"""

import pytest
from hypothesis import given, strategies as st

from blocksmith.lang import (
    FAIL,
    Bitvec,
    BoolVal,
    FailVal,
    IntVal,
    Pointer,
    RegRef,
    RegSetVal,
    StrVal,
    bit_extract,
    builtin,
    bv_binop,
    unop,
    values_equal,
)
from blocksmith.lang.ast import BinOp, UnOp


def bv(w, n):
    return Bitvec(w, n)


class TestBvArith:
    def test_badd_small(self):
        assert bv_binop(BinOp.BADD, bv(4, 0b0010), bv(4, 0b0011)) == bv(4, 0b0101)

    def test_badd_wraps(self):
        assert bv_binop(BinOp.BADD, bv(4, 0xF), bv(4, 1)) == bv(4, 0)

    def test_bsub_wraps(self):
        assert bv_binop(BinOp.BSUB, bv(4, 0), bv(4, 1)) == bv(4, 0xF)

    def test_bdiv_unsigned(self):
        # 0b1110 / 0b0011 = 14 / 3 = 4, no sign interpretation
        assert bv_binop(BinOp.BDIV, bv(4, 0b1110), bv(4, 0b0011)) == bv(4, 4)

    def test_bdiv_by_zero_fails(self):
        assert bv_binop(BinOp.BDIV, bv(4, 6), bv(4, 0)) is FAIL

    def test_width_mismatch_fails(self):
        assert bv_binop(BinOp.BADD, bv(4, 1), bv(8, 1)) is FAIL

    @pytest.mark.parametrize("op,pyop", [
        (BinOp.BADD, lambda a, b: a + b),
        (BinOp.BSUB, lambda a, b: a - b),
        (BinOp.BMUL, lambda a, b: a * b),
    ])
    def test_modular_arithmetic_exhaustive(self, op, pyop):
        # every operand pair at widths 1..6 agrees with arithmetic mod 2^w
        for w in range(1, 7):
            m = 1 << w
            for a in range(m):
                for b in range(m):
                    got = bv_binop(op, bv(w, a), bv(w, b))
                    assert got == bv(w, pyop(a, b) % m), (w, a, b, op)

    def test_shifts(self):
        assert bv_binop(BinOp.SHL, bv(8, 0b1), bv(8, 3)) == bv(8, 0b1000)
        assert bv_binop(BinOp.SHR, bv(8, 0b1000), bv(8, 3)) == bv(8, 0b1)
        # shifting by the full width or more drains the vector
        assert bv_binop(BinOp.SHL, bv(8, 0xFF), bv(8, 8)) == bv(8, 0)
        assert bv_binop(BinOp.SHR, bv(8, 0xFF), bv(8, 200)) == bv(8, 0)

    def test_arithmetic_shift_copies_sign(self):
        assert bv_binop(BinOp.SHRS, bv(4, 0b1000), bv(4, 2)) == bv(4, 0b1110)
        assert bv_binop(BinOp.SHRS, bv(4, 0b0100), bv(4, 2)) == bv(4, 0b0001)
        # saturates at the sign bit for huge shift counts
        assert bv_binop(BinOp.SHRS, bv(4, 0b1000), bv(4, 15)) == bv(4, 0b1111)

    def test_signed_vs_unsigned_compare(self):
        # 0b1000 is 8 unsigned but -8 signed at width 4
        assert bv_binop(BinOp.ULT, bv(4, 0b1000), bv(4, 0b0001)) == BoolVal(False)
        assert bv_binop(BinOp.SLT, bv(4, 0b1000), bv(4, 0b0001)) == BoolVal(True)


class TestPointerOps:
    def test_offset_addition(self):
        assert bv_binop(BinOp.BADD, Pointer("R", 4), bv(32, 4)) == Pointer("R", 8)

    def test_offset_addition_commutes(self):
        assert bv_binop(BinOp.BADD, bv(32, 4), Pointer("R", 4)) == Pointer("R", 8)

    def test_offset_subtraction(self):
        assert bv_binop(BinOp.BSUB, Pointer("R", 8), bv(32, 3)) == Pointer("R", 5)

    def test_offset_wraps_in_pointer_width(self):
        got = bv_binop(BinOp.BSUB, Pointer("R", 0), bv(32, 1))
        assert got == Pointer("R", (1 << 32) - 1)

    def test_multiply_fails(self):
        assert bv_binop(BinOp.BMUL, Pointer("R", 4), bv(32, 2)) is FAIL

    def test_bitwise_fails(self):
        for op in (BinOp.BAND, BinOp.BOR, BinOp.BXOR, BinOp.SHL):
            assert bv_binop(op, Pointer("R", 4), bv(32, 1)) is FAIL

    def test_pointer_pointer_add_fails(self):
        assert bv_binop(BinOp.BADD, Pointer("R", 0), Pointer("R", 4)) is FAIL

    def test_same_region_compare(self):
        assert bv_binop(BinOp.ULT, Pointer("R", 2), Pointer("R", 5)) == BoolVal(True)
        assert bv_binop(BinOp.UGE, Pointer("R", 2), Pointer("R", 5)) == BoolVal(False)

    def test_cross_region_compare_fails(self):
        assert bv_binop(BinOp.ULT, Pointer("R", 0), Pointer("S", 0)) is FAIL

    def test_signed_compare_on_pointers_fails(self):
        assert bv_binop(BinOp.SLT, Pointer("R", 0), Pointer("R", 4)) is FAIL

    @given(st.integers(0, 2**32 - 1), st.integers(0, 2**32 - 1))
    def test_arithmetic_preserves_region(self, off, delta):
        for op in (BinOp.BADD, BinOp.BSUB):
            got = bv_binop(op, Pointer("blk", off), bv(32, delta))
            assert isinstance(got, Pointer) and got.region == "blk"


class TestEquality:
    def test_pointer_never_equals_bitvec(self):
        # same bit pattern, still distinct kinds
        assert bv_binop(BinOp.EQ, Pointer("R", 8), bv(32, 8)) == BoolVal(False)
        assert bv_binop(BinOp.NE, bv(32, 8), Pointer("R", 8)) == BoolVal(True)

    def test_cross_region_pointers_unequal(self):
        assert bv_binop(BinOp.EQ, Pointer("R", 0), Pointer("S", 0)) == BoolVal(False)

    def test_width_mismatch_is_error(self):
        assert bv_binop(BinOp.EQ, bv(4, 1), bv(8, 1)) is FAIL

    def test_kind_mismatch_is_error(self):
        assert bv_binop(BinOp.EQ, IntVal(3), bv(4, 3)) is FAIL

    values = [
        BoolVal(True), BoolVal(False), IntVal(7), bv(4, 9), bv(8, 9),
        Pointer("R", 4), Pointer("S", 4), RegRef("r1"), StrVal("x"),
        RegSetVal(4, frozenset(["r1"])),
    ]

    def test_reflexive(self):
        for v in self.values:
            assert values_equal(v, v) is True

    def test_symmetric(self):
        for a in self.values:
            for b in self.values:
                assert values_equal(a, b) == values_equal(b, a)

    def test_transitive(self):
        vs = self.values
        for a in vs:
            for b in vs:
                for c in vs:
                    if values_equal(a, b) is True and values_equal(b, c) is True:
                        assert values_equal(a, c) is True


class TestExtract:
    def test_bit0(self):
        assert bit_extract(bv(4, 0b0010), 0) == bv(1, 0)

    def test_bit1(self):
        assert bit_extract(bv(4, 0b0010), 1) == bv(1, 1)

    # expectations below frozen from the bit-list oracle
    @pytest.mark.parametrize("value,width,lo,hi,want_w,want_bits", [
        (0b0110, 4, 1, 3, 2, 0b11),
        (0b1011, 4, 0, 4, 4, 11),
        (0b1011, 4, 2, 4, 2, 2),
        (0xA5, 8, 4, 8, 4, 10),
        (0b110101, 6, 1, 5, 4, 10),
    ])
    def test_slices(self, value, width, lo, hi, want_w, want_bits):
        assert bit_extract(bv(width, value), lo, hi) == bv(want_w, want_bits)

    def test_pointer_fails(self):
        assert bit_extract(Pointer("R", 0), 0) is FAIL
        assert bit_extract(Pointer("R", 0), 1, 3) is FAIL

    def test_out_of_range_fails(self):
        assert bit_extract(bv(4, 0), 4) is FAIL
        assert bit_extract(bv(4, 0), 2, 5) is FAIL
        assert bit_extract(bv(4, 0), 3, 3) is FAIL

    @given(st.integers(1, 16).flatmap(
        lambda w: st.tuples(st.just(w), st.integers(0, 2**w - 1),
                            st.integers(0, w - 1))))
    def test_single_bit_matches_python(self, t):
        w, n, i = t
        assert bit_extract(bv(w, n), i) == bv(1, (n >> i) & 1)


class TestUnops:
    def test_bool_not(self):
        assert unop(UnOp.NOT, BoolVal(True)) == BoolVal(False)

    def test_int_neg(self):
        assert unop(UnOp.NEG, IntVal(5)) == IntVal(-5)

    def test_bv_negate(self):
        assert unop(UnOp.BNEG, bv(4, 0b0011)) == bv(4, 0b1101)
        assert unop(UnOp.BNEG, bv(4, 0)) == bv(4, 0)

    def test_bnot(self):
        assert unop(UnOp.BNOT, bv(4, 0b1010)) == bv(4, 0b0101)

    def test_type_confusion_fails(self):
        assert unop(UnOp.NOT, bv(1, 0)) is FAIL
        assert unop(UnOp.BNOT, Pointer("R", 0)) is FAIL


class TestIntOps:
    def test_arith(self):
        assert bv_binop(BinOp.ADD, IntVal(2), IntVal(3)) == IntVal(5)
        assert bv_binop(BinOp.MUL, IntVal(-2), IntVal(3)) == IntVal(-6)

    def test_div_truncates_toward_zero(self):
        assert bv_binop(BinOp.DIV, IntVal(7), IntVal(2)) == IntVal(3)
        assert bv_binop(BinOp.DIV, IntVal(-7), IntVal(2)) == IntVal(-3)

    def test_div_by_zero_fails(self):
        assert bv_binop(BinOp.DIV, IntVal(7), IntVal(0)) is FAIL

    def test_compare(self):
        assert bv_binop(BinOp.LT, IntVal(2), IntVal(3)) == BoolVal(True)
        assert bv_binop(BinOp.GE, IntVal(2), IntVal(3)) == BoolVal(False)


class TestRegSets:
    a = RegSetVal(4, frozenset(["r1", "r2"]))
    b = RegSetVal(4, frozenset(["r2", "r3"]))

    def test_union_inter_minus(self):
        assert bv_binop(BinOp.UNION, self.a, self.b).members == {"r1", "r2", "r3"}
        assert bv_binop(BinOp.INTER, self.a, self.b).members == {"r2"}
        assert bv_binop(BinOp.SETMINUS, self.a, self.b).members == {"r1"}

    def test_subset(self):
        small = RegSetVal(4, frozenset(["r2"]))
        assert bv_binop(BinOp.SUBSET, small, self.a) == BoolVal(True)
        assert bv_binop(BinOp.SUBSET, self.a, small) == BoolVal(False)

    def test_membership(self):
        assert bv_binop(BinOp.IN, RegRef("r1"), self.a) == BoolVal(True)
        assert bv_binop(BinOp.IN, RegRef("r3"), self.a) == BoolVal(False)

    def test_width_mismatch_fails(self):
        assert bv_binop(BinOp.UNION, self.a, RegSetVal(8, frozenset())) is FAIL


class TestBuiltins:
    def test_bv_to_uint(self):
        assert builtin("bv_to_uint", [bv(4, 0b1010)]) == IntVal(10)

    def test_uint_to_bv_l(self):
        assert builtin("uint_to_bv_l", [IntVal(4), IntVal(10)]) == bv(4, 0b1010)

    def test_uint_to_bv_l_wraps(self):
        assert builtin("uint_to_bv_l", [IntVal(4), IntVal(18)]) == bv(4, 2)

    def test_isptr(self):
        assert builtin("isptr", [Pointer("R", 0)]) == BoolVal(True)
        assert builtin("isptr", [bv(32, 0)]) == BoolVal(False)

    def test_bv_to_len_truncates(self):
        assert builtin("bv_to_len", [IntVal(4), bv(8, 0xAB)]) == bv(4, 0xB)

    def test_bv_to_len_zero_extends(self):
        assert builtin("bv_to_len", [IntVal(8), bv(4, 0xB)]) == bv(8, 0x0B)

    def test_bv_to_len_rejects_pointer(self):
        assert builtin("bv_to_len", [IntVal(8), Pointer("R", 0)]) is FAIL

    def test_empty(self):
        got = builtin("empty", [IntVal(4)])
        assert got == RegSetVal(4, frozenset())

    def test_hex_pads_to_width(self):
        assert builtin("hex", [bv(16, 0x58)]) == StrVal("0x0058")
        assert builtin("hex", [bv(32, 1)]) == StrVal("0x00000001")

    def test_dec(self):
        assert builtin("dec", [bv(16, 0x58)]) == StrVal("88")

    def test_bin_pads_to_width(self):
        assert builtin("bin", [bv(4, 0b0110)]) == StrVal("0b0110")

    def test_format_substitutes(self):
        got = builtin("format", [StrVal("lw $1, $2($3)"),
                                 StrVal("$2"), StrVal("88"), StrVal("$6")])
        assert got == StrVal("lw $2, 88($6)")

    def test_format_brace_placeholders(self):
        got = builtin("format", [StrVal("sltu {1}, {2}, {3}"),
                                 StrVal("$4"), StrVal("$5"), StrVal("$2")])
        assert got == StrVal("sltu $4, $5, $2")

    def test_format_dollar_escape(self):
        assert builtin("format", [StrVal("a$$b")]) == StrVal("a$b")

    def test_format_brace_escape(self):
        assert builtin("format", [StrVal("ldr {1}, [{2},#{3}]"),
                                 StrVal("r0"), StrVal("r2"), StrVal("88")]) \
            == StrVal("ldr r0, [r2,#88]")
        assert builtin("format", [StrVal("{{{1}}}"), StrVal("x")]) == StrVal("{x}")

    def test_is_ptr_alias(self):
        assert builtin("is_ptr", [Pointer("R", 0)]) == BoolVal(True)
        assert builtin("is_ptr", [bv(32, 7)]) == BoolVal(False)

    def test_format_wrong_arity_fails(self):
        assert builtin("format", [StrVal("$1 $2"), StrVal("x")]) is FAIL
        assert builtin("format", [StrVal("$1"), StrVal("x"), StrVal("y")]) is FAIL

    def test_unknown_builtin_fails(self):
        assert builtin("frobnicate", [IntVal(1)]) is FAIL

    def test_fail_propagates(self):
        assert builtin("hex", [FAIL]) is FAIL
        assert bv_binop(BinOp.BADD, FAIL, bv(4, 0)) is FAIL
        assert unop(UnOp.BNOT, FAIL) is FAIL


class TestImmutability:
    def test_values_are_frozen(self):
        for v in (bv(4, 1), Pointer("R", 0), IntVal(3), BoolVal(True),
                  StrVal("s"), RegRef("r0"), RegSetVal(4, frozenset())):
            field = next(iter(v.__dataclass_fields__))
            with pytest.raises(Exception):
                setattr(v, field, None)

    def test_bitvec_rejects_bad_construction(self):
        with pytest.raises(ValueError):
            Bitvec(0, 0)
        with pytest.raises(ValueError):
            Bitvec(4, 16)

    @given(st.integers(1, 64), st.data())
    def test_ops_do_not_mutate(self, w, data):
        a = bv(w, data.draw(st.integers(0, 2**w - 1)))
        b = bv(w, data.draw(st.integers(0, 2**w - 1)))
        snap = (a.width, a.bits, b.width, b.bits)
        bv_binop(BinOp.BADD, a, b)
        bv_binop(BinOp.ULT, a, b)
        bit_extract(a, 0)
        assert (a.width, a.bits, b.width, b.bits) == snap

    def test_fail_is_singleton_value(self):
        assert isinstance(FAIL, FailVal)
        assert FAIL == FailVal()
