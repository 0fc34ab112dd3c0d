"""Machine states, branch outcomes, and the elaborated machine description."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import ast
from .types import MemType, RegType, Type
from .values import Value


class BranchState:
    """What a straight-line block told the world about control flow."""
    __slots__ = ()


@dataclass(frozen=True)
class BNext(BranchState):
    def __str__(self) -> str:
        return "next"


@dataclass(frozen=True)
class BSkip(BranchState):
    """Skip the next `count` instructions; 1 <= count <= 254."""
    count: int

    def __str__(self) -> str:
        return f"skip({self.count})"


@dataclass(frozen=True)
class BExt(BranchState):
    def __str__(self) -> str:
        return "ext"


NEXT = BNext()
EXT = BExt()

# Reserved environment key holding the branch-taken flag when a
# specification's postcondition mentions branchto(...).
EXTBRANCH = "branchto"


@dataclass
class MachineState:
    """Register file plus swiss-cheese memory.

    regs maps register identities to their contents. mem maps a region name
    to a dict from byte offset to cell contents; offsets not in the dict do
    not exist (accessing them is a runtime failure, not an allocation)."""

    regs: dict[str, Value] = field(default_factory=dict)
    mem: dict[str, dict[int, Value]] = field(default_factory=dict)

    def copy(self) -> "MachineState":
        return MachineState(
            regs=dict(self.regs),
            mem={r: dict(cells) for r, cells in self.mem.items()},
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MachineState):
            return NotImplemented
        return self.regs == other.regs and self.mem == other.mem


@dataclass
class MachineDesc:
    """A machine description after elaboration.

    Registers are identities: the key is the letstate name, and aliasing
    lets in the source bind other names to the same identity in `consts`.
    Regions normally come from specifications rather than the machine file,
    but the container does not care which file declared them.
    """

    name: str
    aliases: dict[str, Type] = field(default_factory=dict)
    consts: dict[str, Value] = field(default_factory=dict)
    defs: dict[str, ast.DDef] = field(default_factory=dict)
    procs: dict[str, ast.DProc] = field(default_factory=dict)
    registers: dict[str, RegType] = field(default_factory=dict)
    control: frozenset[str] = frozenset()
    dontgate: frozenset[str] = frozenset()
    reg_txt: dict[str, str] = field(default_factory=dict)
    regions: dict[str, MemType] = field(default_factory=dict)
    labels: dict[str, str] = field(default_factory=dict)
    invariants: list[ast.Expr] = field(default_factory=list)
    defops: dict[str, ast.DDefop] = field(default_factory=dict)

    def reg_width(self, reg: str) -> int:
        w = self.registers[reg].width
        assert isinstance(w, int)
        return w

    def cell_geometry(self, region: str) -> tuple[int, int, int]:
        """(cell width, cell count, pointer width) for a region."""
        m = self.regions[region]
        assert isinstance(m.cell_width, int) and isinstance(m.length, int) \
            and isinstance(m.ref_width, int)
        return m.cell_width, m.length, m.ref_width

    def cell_offsets(self, region: str) -> list[int]:
        """Byte offsets at which the region's cells sit."""
        cw, n, _ = self.cell_geometry(region)
        stride = cw // 8
        return [i * stride for i in range(n)]

    def defop_signature(self, opcode: str) -> list[Type]:
        return [ty for _, ty in self.defops[opcode].params]
