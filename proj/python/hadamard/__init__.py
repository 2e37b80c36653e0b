"""L_q penalized regression via Hadamard product parametrization."""

from ._core import (
    IoError,
    NumericalError,
    UnsupportedError,
    glm_solve,
    kkt_check,
    lemma1_inner_min,
    moment_lambda,
    objective,
    run_suite,
    shpp,
    simulate,
    solve,
)

__all__ = [
    "IoError",
    "NumericalError",
    "UnsupportedError",
    "glm_solve",
    "kkt_check",
    "lemma1_inner_min",
    "moment_lambda",
    "objective",
    "run_suite",
    "shpp",
    "simulate",
    "solve",
]
