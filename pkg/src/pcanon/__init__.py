"""Complementary Z-form and optimal MDP scaling of generalized P-matrices."""

__version__ = "0.1.0"

from .blockmat import BlockMatrix, determinant, p_property, parse_block_matrix
from .certify import theorem2_verdict
from .errors import PcanonError
from .lp_oracle import build_lp_A, build_scaling_lp, simplex_solve
from .mdp import gen_instance, mdp_augment, mdp_recognize
from .scaling import two_step
from .simplex_core import solve_glcp, ye_pivot_bound
from .zform import compute_zform

__all__ = [
    "BlockMatrix",
    "PcanonError",
    "build_lp_A",
    "build_scaling_lp",
    "compute_zform",
    "determinant",
    "gen_instance",
    "mdp_augment",
    "mdp_recognize",
    "p_property",
    "parse_block_matrix",
    "simplex_solve",
    "solve_glcp",
    "theorem2_verdict",
    "two_step",
    "ye_pivot_bound",
]
