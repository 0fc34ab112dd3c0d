"""Synthesis and verification of short assembly blocks from machine descriptions.

The pipeline has three legs. A machine description (.casp) defines an
instruction set's state and semantics precisely enough to execute and to
encode for a solver. A portable specification (.ale) states what a block
of assembly must do, independent of any machine, and is specialized to a
machine by a lowering step. A search engine then synthesizes (or checks)
instruction sequences against the specialized spec, counterexample by
counterexample.

Subpackage and module map:

    lang        types, ASTs, runtime values, machine state
    parse       lexer and parsers for every source kind
    typecheck   static checks for machines, specs, and programs
    interp      the concrete evaluator (ground truth for everything else)
    lowering    portable-spec specialization
    symbolic    symbolic execution over guarded value DAGs
    sat, smt, smtsolve
                bitvector solving: CDCL core, client, SMT-LIB v2 server
    synth, decompose, extract
                CEGIS search, goal splitting, assembly text output
    cli         command-line entry points
    corpus/     shipped machine descriptions, specs, and goldens
"""

__version__ = "0.1.0"
