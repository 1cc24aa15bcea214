"""Higher-order Schwarzian derivatives, Pick-class tests and interval dynamics."""

from .errors import (CriticalOrbit, CriticalPoint, MembershipError, NotNormal, OrderTooSmall,
                     PreconditionError)
from .jets import Jet, exp_jet, jet_compose, jet_reverse
from .pade import RationalMap, mobius, pade_approximant
from .schwarzian import (ContinuedFractionRep, SchwarzianSequence, continued_fraction,
                         schwarzian_defect, schwarzian_det, schwarzian_recursive)
from .pickclass import certify_pick, crossratio_from_map, matrix_monotone_test, pd_membership
from .koebe import KoebeQuery, koebe_check
from .dynamics import IntervalMap, first_entry_scan, logistic, q_family, theorem1_scan

__version__ = "0.1.0"

__all__ = [
    "ContinuedFractionRep", "CriticalOrbit", "CriticalPoint", "IntervalMap", "Jet", "KoebeQuery",
    "MembershipError", "NotNormal", "OrderTooSmall", "PreconditionError", "RationalMap",
    "SchwarzianSequence", "certify_pick", "continued_fraction", "crossratio_from_map", "exp_jet",
    "jet_compose", "jet_reverse", "koebe_check", "logistic", "matrix_monotone_test", "mobius",
    "pade_approximant", "pd_membership", "q_family", "schwarzian_defect",
    "schwarzian_det", "schwarzian_recursive", "first_entry_scan", "theorem1_scan",
]
