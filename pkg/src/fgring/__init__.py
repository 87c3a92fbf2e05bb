"""Desk-scale symbolic workbench for integral group rings of free groups."""

from .words import (
    FreeGroup,
    Word,
    WordError,
    ball,
    basic_commutators,
    commutator,
    left_normed,
    parse_word,
    reduce,
)
from .subgroups import (
    CosetSystem,
    DerivedOracle,
    FinitePermQuotient,
    FreeAbelianQuotient,
    FreeQuotient,
    MeetOracle,
    SubgroupError,
    SubgroupHandle,
    TrivialQuotient,
    full_group_handle,
    gamma_generators,
)
from .grring import (
    RingElement,
    SupportCapError,
    augmentation,
    delta_element,
    delta_product,
    involution,
    parse_ring_element,
)
from .intlat import IntLattice, LatticeError, hnf, kernel, snf, solve_left
from .magnus import TruncatedSeries, expand, expand_ring, ideal_shadow, min_degree
from .idealeng import (
    AtomRef,
    CertTerm,
    DecideConfig,
    IdealExpr,
    Member,
    NonMember,
    Unknown,
    Workbench,
    certificate_ok,
    decide,
    expand_certificate,
    i_subgroup_generators,
    identity_report,
    parse_ideal_expr,
    probe_subgroup,
    transport_certificate,
)
from .abelfun import (
    FgAbGroup,
    FunctorValue,
    functor_eval,
    koszul_antisym,
    seq9_10_check,
    seq11_check,
    sp3_roundtrip,
    tensor_ab,
    tor_ab,
)
from .abelhom import HomologyResult, bar_oracle, example_sec4, homology
from .quotlab import (
    CocycleTable,
    CosetTable,
    build_cocycle,
    cocycle_identity_check,
    lemma52_check,
    prop4_check,
    prop4_w_builder,
    stohr_membership_suite,
)

__version__ = "0.1.0"
