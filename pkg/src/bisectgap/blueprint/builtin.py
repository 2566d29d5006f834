"""The built-in blueprint certified by this package.

Five biases derived from the gap-threshold root, measure supported on the
outer two, five positive configurations whose pairwise bias all equal b_GW.
The measure values and weights are the exact decimals of the construction;
the bias balance residual they induce is about 2.2e-11, well inside the
validation tolerance (the measure is a rounded solution of the balance
equation against an irrational bias ratio, so an exact zero is not
attainable with finite decimals).
"""

from __future__ import annotations

from functools import lru_cache

from .model import Blueprint
from .textio import parse_blueprint

DSTAR_TEXT = """\
blueprint dstar

biases:
  b1 = -2*b - nu2
  b2 = -b - nu1
  b3 = nu1
  b4 = b - nu1
  b5 = 2*b + nu1

mu:
  b1 = 0.325898600625
  b4 = 0.674101399375

configs:
  b2 b4 b_GW 0.351359472465
  b3 b4 b_GW 0.273707303709
  b2 b3 b_GW 0.271584315668
  b2 b5 b_GW 0.064406822738
  b1 b5 b_GW 0.038942085420
"""


@lru_cache(maxsize=1)
def builtin_dstar() -> Blueprint:
    """The blueprint whose soundness gap this package certifies."""
    return parse_blueprint(DSTAR_TEXT)
