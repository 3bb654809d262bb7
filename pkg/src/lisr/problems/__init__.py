from .base import ObjectiveOracle, ProblemConstants, problem_constants
from .libsvm import parse_libsvm, write_libsvm
from .logistic import LogisticOracle, LogisticProblem, logistic_oracle, sigmoid, synthetic_logistic
from .quadratic import QuadraticOracle, QuadraticProblem, generate_quadratic, quadratic_oracle

__all__ = [
    "ObjectiveOracle",
    "ProblemConstants",
    "problem_constants",
    "parse_libsvm",
    "write_libsvm",
    "LogisticOracle",
    "LogisticProblem",
    "logistic_oracle",
    "sigmoid",
    "synthetic_logistic",
    "QuadraticOracle",
    "QuadraticProblem",
    "generate_quadratic",
    "quadratic_oracle",
]
