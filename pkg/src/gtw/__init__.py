"""Finite-frame workbench for intuitionistic modal logics.

Four signatures share one toolkit: box (a relational necessity), im (a
neighborhood modality), cin (paired neighborhood box and diamond), and
si (a binary strict implication).  The package builds finite frames and
their complex algebras, evaluates formulas on both sides, computes prime
filter extensions, enumerates small universes up to isomorphism, and
audits frame classes for the closure properties that characterize
axiomatizable classes.

Submodules group the work: syntax, order, heyting, frames, algebras,
duality, universe, fasteval, audit, jsonio, dot, report, cli.  The most
commonly combined names are re-exported here; report and cli are left to
explicit import because they pull in matplotlib and argparse plumbing.
"""

from .algebras import ModalAlgebra, algebra_validates, complex_algebra
from .audit import AuditBudget, AuditReport, audit_closure
from .caps import Caps, DEFAULT_CAPS, caps_from_env
from .duality import dual_frame, eta_frame_iso, pfe, pfe_with_unit
from .frames import (
    Frame,
    Model,
    Valuation,
    disjoint_union,
    frame_validates,
    generate_subframe,
    make_box_frame,
    make_cin_frame,
    make_im_frame,
    make_model,
    make_si_frame,
    truth_set,
    validate_frame,
)
from .order import Poset, PosetMap
from .syntax import Signature, parse, print_formula
from .universe import build_universe, corpus, fr_class

__all__ = [
    "ModalAlgebra", "algebra_validates", "complex_algebra",
    "AuditBudget", "AuditReport", "audit_closure",
    "Caps", "DEFAULT_CAPS", "caps_from_env",
    "dual_frame", "eta_frame_iso", "pfe", "pfe_with_unit",
    "Frame", "Model", "Valuation", "disjoint_union", "frame_validates",
    "generate_subframe", "make_box_frame", "make_cin_frame", "make_im_frame",
    "make_model", "make_si_frame", "truth_set", "validate_frame",
    "Poset", "PosetMap",
    "Signature", "parse", "print_formula",
    "build_universe", "corpus", "fr_class",
]
