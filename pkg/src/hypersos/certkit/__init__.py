"""Positivstellensatz proof objects, their exact verifiers, and the
univariate / bivariate SOS decomposition engines."""

from .cert import ConstraintSystem, ResourceExhausted, SOSCertificate, Verdict, expand_certificate, verify_certificate
from .dag import EQ, GE, Node, ProofDAG, RuleError, Term, verify_dag
from .sos import (DecompositionError, bivariate_homog_sos_decompose, ldl_psd, sos_value,
                  univariate_sos_decompose)
from .sturm import NonnegVerdict, SturmChain, isolate_real_roots, sturm_nonneg

__all__ = [
    "ConstraintSystem", "ResourceExhausted", "SOSCertificate", "Verdict", "expand_certificate", "verify_certificate",
    "EQ", "GE", "Node", "ProofDAG", "RuleError", "Term", "verify_dag",
    "DecompositionError", "bivariate_homog_sos_decompose", "ldl_psd", "sos_value",
    "univariate_sos_decompose", "NonnegVerdict", "SturmChain", "isolate_real_roots", "sturm_nonneg",
]
