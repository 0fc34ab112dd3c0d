"""Shipped machine descriptions, specifications, and golden outputs.

The manifest below is the single source of truth for what the corpus
contains and how the pieces fit together; the validator and the test
suites iterate it rather than globbing.
"""

from dataclasses import dataclass
from importlib import resources
from pathlib import Path


def corpus_dir() -> Path:
    return Path(resources.files(__package__))


def corpus_path(name: str) -> Path:
    p = corpus_dir() / name
    if not p.is_file():
        raise FileNotFoundError(f"no corpus file named {name!r}")
    return p


def read(name: str) -> str:
    return corpus_path(name).read_text()


MACHINES = ("toy.casp", "mips_subset.casp", "arm_subset.casp")

ALEWIFE = ("disp_check.ale",)

LOWERINGS = ("disp_mips.casp", "disp_arm.casp")


@dataclass(frozen=True)
class LoweringCase:
    """One end-to-end lowering: ale + lowering file + machine -> golden spec."""
    name: str
    machine: str
    lowering: str
    alewife: str
    golden: str
    witness: str
    assembly: str


LOWERING_CASES = (
    LoweringCase("disp_check_mips", "mips_subset.casp", "disp_mips.casp",
                 "disp_check.ale", "disp_check_mips.golden.casp",
                 "disp_check_mips.prog", "disp_check_mips.s"),
    LoweringCase("disp_check_arm", "arm_subset.casp", "disp_arm.casp",
                 "disp_check.ale", "disp_check_arm.golden.casp",
                 "disp_check_arm.prog", "disp_check_arm.s"),
)


@dataclass(frozen=True)
class SpecCase:
    """A machine-dependent spec known to be solvable at `length`."""
    spec: str
    machine: str
    length: int


# toy_spec_incmem is the decomposition stress case; everything else is
# short enough for the optimization-neutrality sweeps
TOY_SPECS = (
    SpecCase("toy_spec_const.casp", "toy.casp", 1),
    SpecCase("toy_spec_mov.casp", "toy.casp", 1),
    SpecCase("toy_spec_zero.casp", "toy.casp", 1),
    SpecCase("toy_spec_not.casp", "toy.casp", 1),
    SpecCase("toy_spec_and.casp", "toy.casp", 1),
    SpecCase("toy_spec_sel.casp", "toy.casp", 1),
    SpecCase("toy_spec_la.casp", "toy.casp", 1),
    SpecCase("toy_spec_flag.casp", "toy.casp", 1),
    SpecCase("toy_spec_load.casp", "toy.casp", 1),
    SpecCase("toy_spec_store.casp", "toy.casp", 1),
    SpecCase("toy_spec_add.casp", "toy.casp", 2),
    SpecCase("toy_spec_branch.casp", "toy.casp", 2),
    SpecCase("toy_spec_swap.casp", "toy.casp", 3),
    SpecCase("toy_spec_incmem.casp", "toy.casp", 4),
)

SPEC_CASES = TOY_SPECS + (
    SpecCase("disp_check_mips.golden.casp", "mips_subset.casp", 2),
    SpecCase("disp_check_arm.golden.casp", "arm_subset.casp", 4),
)
