"""Finite-state automorphisms of rooted k-ary trees, forbidden-pattern
(finitely constrained) groups, and branch-group constructions."""

__version__ = "0.1.0"

from treegrp.errors import CapExceeded
from treegrp.trees import (
    check_alphabet,
    compose_perm,
    invert_perm,
    level,
    parse_vertex,
    vertex_str,
)
from treegrp.machines import (
    Element,
    MachineSpec,
    apply,
    conjugate,
    decoration,
    delta,
    equals,
    inverse,
    is_identity,
    multiply,
    section,
    stabilizes_level,
)
from treegrp.patterns import (
    Pattern,
    PatternSet,
    compose_pattern,
    essential_patterns,
    glue,
    invert_pattern,
    is_pattern_group,
    is_transitive,
    pattern_at,
    subpattern_at,
)
from treegrp.constrained import (
    ConstraintSystem,
    TruncationGroup,
    is_group,
    membership,
    membership_violation,
    truncation_group,
    viable_patterns,
)
from treegrp.closure import (
    BranchPresentation,
    nucleus,
    pattern_closure,
    quotient_generators,
    quotient_group,
    stabilizer_generators,
    verify_branching,
    verify_closure,
)
from treegrp.permgroup import (
    PermGroup,
    abelianization_invariants,
    commutator_subgroup,
    member,
    min_generators_bounds,
    order,
)
from treegrp import families
