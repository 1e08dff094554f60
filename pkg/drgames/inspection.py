"""
Inspection Game

Two-player game between an employee (player 0: Shirk, Work) and an employer
(player 1: Inspect, Don't inspect). The wage w is known; the work cost g,
the value of work v and the inspection cost h are only known to lie in
intervals. Payoffs (employee, employer):

                 Inspect            Don't inspect
    Shirk        (0, -h)            (w, -w)
    Work         (w - g, v - w - h) (w - g, v - w)
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from .ambiguity import AffineBoxUncertainty, AmbiguitySet, build_support_from_box
from .exceptions import AmbiguitySetError
from .game_model import GameShape, PayoffTensor, unvec

logger = logging.getLogger(__name__)

SHAPE = GameShape((2, 2))
PARAMETER_NAMES = ("g", "v", "h")
NOMINAL = "nominal"


@dataclass(frozen=True)
class InspectionParams:
    """
    Args:
        w: Wage
        g, v, h: (lo, hi) intervals of work cost, work value and inspection cost
        s: Mean absolute deviation cap
        mean: "nominal" (interval midpoints) or an explicit vec(P) of length 8
    """

    w: float = 15.0
    g: Tuple[float, float] = (8.0, 12.0)
    v: Tuple[float, float] = (16.0, 24.0)
    h: Tuple[float, float] = (4.0, 6.0)
    s: float = 4.0
    mean: Union[str, Tuple[float, ...]] = NOMINAL

    def __post_init__(self):
        if not np.isfinite(self.w):
            raise AmbiguitySetError(f"Wage must be finite, got {self.w}")
        for name in PARAMETER_NAMES:
            lo, hi = getattr(self, name)
            if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
                raise AmbiguitySetError(f"Interval for '{name}' is invalid: [{lo}, {hi}]")
            object.__setattr__(self, name, (float(lo), float(hi)))
        if isinstance(self.mean, str):
            if self.mean != NOMINAL:
                raise AmbiguitySetError(f"mean must be '{NOMINAL}' or a vector, got {self.mean!r}")
        else:
            mean = tuple(float(x) for x in self.mean)
            if len(mean) != SHAPE.vec_length:
                raise AmbiguitySetError(
                    f"Explicit mean needs {SHAPE.vec_length} entries, got {len(mean)}"
                )
            object.__setattr__(self, "mean", mean)

    @property
    def intervals(self) -> Dict[str, Tuple[float, float]]:
        return {name: getattr(self, name) for name in PARAMETER_NAMES}

    def to_dict(self) -> Dict[str, object]:
        return {
            "w": self.w,
            "g": list(self.g), "v": list(self.v), "h": list(self.h),
            "s": self.s,
            "mean": self.mean if isinstance(self.mean, str) else list(self.mean),
        }


def inspection_uncertainty(params: InspectionParams) -> AffineBoxUncertainty:
    """vec(P) as an affine function of (g, v, h)"""
    w = params.w
    # vec order: employee (SI, SN, WI, WN), then employer (SI, SN, WI, WN)
    offset = np.array([0.0, w, w, w, 0.0, -w, -w, -w])
    matrix = np.zeros((SHAPE.vec_length, 3))
    matrix[[2, 3], 0] = -1.0      # employee pays g when working
    matrix[[6, 7], 1] = 1.0       # employer gains v from work
    matrix[[4, 6], 2] = -1.0      # employer pays h when inspecting
    lo = [params.g[0], params.v[0], params.h[0]]
    hi = [params.g[1], params.v[1], params.h[1]]
    return AffineBoxUncertainty(SHAPE, PARAMETER_NAMES, lo, hi, matrix, offset)


def payoffs_at(params: InspectionParams, g: float, v: float, h: float) -> PayoffTensor:
    return unvec(SHAPE, inspection_uncertainty(params).point([g, v, h]))


def build_inspection_game(params: InspectionParams) -> Tuple[AmbiguitySet, PayoffTensor]:
    """
    Ambiguity set and nominal game of the inspection game.

    Returns:
        (ambiguity set, nominal payoffs at the interval midpoints)
    """
    uncertainty = inspection_uncertainty(params)
    support = build_support_from_box(uncertainty)
    nominal = uncertainty.midpoint()
    mean = nominal if params.mean == NOMINAL else np.array(params.mean)
    ambiguity = AmbiguitySet(SHAPE, support, mean, params.s)
    return ambiguity, unvec(SHAPE, nominal)


@dataclass(frozen=True)
class PublishedEntry:
    """An equilibrium as printed: first-action probabilities of both players"""

    text: Tuple[str, str]

    @property
    def values(self) -> Tuple[float, float]:
        return tuple(_parse_probability(t) for t in self.text)

    @property
    def half_widths(self) -> Tuple[float, float]:
        return tuple(_rounding_half_width(t) for t in self.text)

    def __str__(self) -> str:
        return f"({self.text[0]},{self.text[1]})"


def _parse_probability(text: str) -> float:
    if "/" in text:
        numerator, denominator = text.split("/")
        return float(numerator) / float(denominator)
    return float(text)


def _rounding_half_width(text: str) -> float:
    """Uncertainty implied by the printed digits"""
    if "/" in text:
        return 0.0
    if "." not in text:
        return 1e-3
    return 10.0 ** -len(text.split(".")[1])


def _entries(*pairs: str) -> List[PublishedEntry]:
    return [PublishedEntry(tuple(pair.split(","))) for pair in pairs]


class PublishedTables:
    """
    Equilibria reported for the nominal inspection game (w = 15,
    g in [8, 12], v in [16, 24], h in [4, 6], s = 4), keyed by (eps1, eps2).
    """

    EMPLOYER_RISK_AVERSE = {
        (1.0, 1.0): _entries("1/3,2/3"),
        (1.0, 0.75): _entries("0.333,0.66"),
        (1.0, 0.5): _entries("0.333,0.66"),
        (1.0, 0.25): _entries("0.333,0.66", "0.8179,0", "0.9342,0.7069"),
        (1.0, 0.01): _entries("1,0", "0,0.66", "1,0.66", "1,0.1941", "0.333,0.66",
                              "0.9654,0.1387", "1,0.59"),
    }

    EMPLOYEE_RISK_AVERSE = {
        (1.0, 1.0): _entries("1/3,2/3"),
        (0.75, 1.0): _entries("0.333,0.666", "0.35,0.665", "0.2583,0.96"),
        (0.5, 1.0): _entries("0.333,0.666", "0.5379,0", "0.3842,0.66"),
        (0.25, 1.0): _entries("0.4427,0", "0.333,0.666", "0,0.3467"),
        (0.01, 1.0): _entries("0,0", "1,1", "0.333,0.666", "0.33,0", "0.335,1"),
    }

    BOTH_RISK_AVERSE = {
        (0.05, 0.05): _entries("1,0.66", "1,1", "0.95,0", "0.43,1", "0.333,0.666"),
        (0.01, 0.01): _entries("1,0", "0,0", "0.332,0", "0.5303,1", "1,0.78"),
    }

    @classmethod
    def get_all(cls) -> Dict[str, Dict[Tuple[float, float], List[PublishedEntry]]]:
        return {
            "employer_risk_averse": cls.EMPLOYER_RISK_AVERSE,
            "employee_risk_averse": cls.EMPLOYEE_RISK_AVERSE,
            "both_risk_averse": cls.BOTH_RISK_AVERSE,
        }

    @classmethod
    def get(cls, name: str) -> Optional[Dict[Tuple[float, float], List[PublishedEntry]]]:
        return cls.get_all().get(name)

    @classmethod
    def risk_grid(cls, name: str) -> List[Tuple[float, float]]:
        return list(cls.get_all()[name])
