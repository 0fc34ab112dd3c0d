"""Reference source texts shared between test modules."""

# The lowered dispatch-check specification for the MIPS subset: the
# expected output of compiling disp_check.ale against disp_mips.casp.
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

# Hand-derived ARM counterpart of the same portable spec: dispatch table
# of 270 cells, pc in r14, table base in r2, result in r1, the condition
# flags framed, and no machine invariants to carry into pre and post.
ARM_SPEC = """
letstate DispMem:
  32 bit 270 len 32 ref memory
frame: modify: N Z C V
let crit_ptr: 32 bit =
  [DispMem, 0] b+ 0x00000058
let crit: bool =
    *r14 b< fetch(crit_ptr, 32)
pre: *r2 == [DispMem, 0]
post: if crit then *r1 == 0x00000001
    else *r1 == 0x00000000
"""
