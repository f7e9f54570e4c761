"""idpath: a small kernel for type theory with propositional identity types.

The kernel (syntax, defeq, checker) verifies judgments; the category layer
(cat) views contexts as objects and term tuples as morphisms; pathtools
compiles path objects, transports, groupoid laws and equivalence-relation
witnesses, re-checking every emitted term through the kernel.
"""

import sys

# Emitted witnesses nest eliminators; default recursion limits are too tight
# for structural traversals over them.
if sys.getrecursionlimit() < 100_000:
    sys.setrecursionlimit(100_000)

__version__ = "0.1.0"
