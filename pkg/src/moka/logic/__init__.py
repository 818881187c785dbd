"""Temporal and dynamic logics on top of MOKA."""

from .check import check_concrete, check_concrete_mask
from .encode import encode, encode_exists, translate_actl_to_mu
from .formula import *  # noqa: F401,F403
from .formula import validate, infer_dialect
from .parser import parse_formula, parse_prog
from .semantics import prog_rel, sem_actl, sem_mask, sem_mu, sem_pdl

__all__ = [
    "check_concrete", "check_concrete_mask", "encode", "encode_exists", "translate_actl_to_mu",
    "parse_formula", "parse_prog", "prog_rel", "sem_actl", "sem_mask", "sem_mu", "sem_pdl",
    "validate", "infer_dialect",
]
