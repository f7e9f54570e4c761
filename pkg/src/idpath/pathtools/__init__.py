"""Witness compiler: path objects, transport, groupoid structure.

Every operation re-checks its outputs through the kernel before returning.
"""

from .core import DerivationContext, DeriveError, WeqCert
from .ops import (
    EmittedDef,
    PathBundle,
    SimilarityWitness,
    as_fibration,
    build_py,
    cancel_weq,
    contract_compose,
    contract_from_characterisation,
    contract_pullback,
    contract_source,
    general_transport,
    groupoid_laws,
    homotopy_between,
    is_structural_weq,
    jfill,
    lower_fill_leftmap,
    pair_homotopy,
    path_object,
    similar_maps,
    sym_witness,
    trans_witness,
    transport,
    whisker_post,
)
from .sums import collapsed_relation, tuple_congruence
from .witnesses import (
    ContractWitness,
    EquivRelWitness,
    Homotopy,
    PathObject,
    TransportWitness,
    WitnessError,
)

__all__ = [
    "DerivationContext",
    "DeriveError",
    "WeqCert",
    "EmittedDef",
    "PathBundle",
    "SimilarityWitness",
    "as_fibration",
    "build_py",
    "cancel_weq",
    "collapsed_relation",
    "contract_compose",
    "contract_from_characterisation",
    "contract_pullback",
    "contract_source",
    "general_transport",
    "groupoid_laws",
    "homotopy_between",
    "is_structural_weq",
    "jfill",
    "lower_fill_leftmap",
    "pair_homotopy",
    "path_object",
    "similar_maps",
    "sym_witness",
    "trans_witness",
    "transport",
    "tuple_congruence",
    "whisker_post",
    "ContractWitness",
    "EquivRelWitness",
    "Homotopy",
    "PathObject",
    "TransportWitness",
    "WitnessError",
]
