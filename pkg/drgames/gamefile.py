"""
Game and Experiment Files

YAML documents describing a robust game or an inspection-game experiment.

Game file::

    shape: [2, 2]
    uncertainty:                 # or  support: {W: [[...]], h: [...]}
      parameters:
        - {name: g, lo: 8, hi: 12}
      matrix: [[...], ...]       # vec(P) = matrix @ t + offset
      offset: [...]
    mean: nominal                # or an explicit vec(P)
    s: 4
    risk: [1, 0.5]
    nominal: [...]               # optional nominal vec(P)

Experiment file::

    inspection: {w: 15, g: [8, 12], v: [16, 24], h: [4, 6], s: 4, mean: nominal}
    grid: [[1, 1], [1, 0.75]]
    search: {restarts: 8, seed: 42}
    check_tables: true
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import yaml

from .ambiguity import AffineBoxUncertainty, AmbiguitySet, PolyhedralSupport, build_support_from_box
from .exceptions import DrgamesError, GameFileError
from .game_model import GameShape, PayoffTensor, unvec, vec
from .inspection import NOMINAL, InspectionParams
from .risk import RiskProfile
from .search import SearchConfig

logger = logging.getLogger(__name__)


def _number(value: Any, where: str, path: Optional[str] = None) -> float:
    """Float from a YAML scalar; PyYAML reads forms like 1e-3 as strings"""
    if isinstance(value, bool):
        raise GameFileError(f"Expected a number for '{where}', got {value!r}", path=path, field=where)
    try:
        return float(value)
    except (TypeError, ValueError):
        raise GameFileError(f"Expected a number for '{where}', got {value!r}", path=path, field=where)


def _vector(value: Any, where: str, path: Optional[str] = None, length: Optional[int] = None) -> np.ndarray:
    if not isinstance(value, (list, tuple)):
        raise GameFileError(f"Expected a list for '{where}'", path=path, field=where)
    vector = np.array([_number(v, where, path) for v in value])
    if length is not None and vector.size != length:
        raise GameFileError(f"'{where}' needs {length} entries, got {vector.size}",
                            path=path, field=where)
    return vector


def _matrix(value: Any, where: str, path: Optional[str] = None) -> np.ndarray:
    if not isinstance(value, (list, tuple)) or not value:
        raise GameFileError(f"Expected a non-empty list of rows for '{where}'", path=path, field=where)
    rows = [_vector(row, where, path) for row in value]
    if len({row.size for row in rows}) != 1:
        raise GameFileError(f"Rows of '{where}' have different lengths", path=path, field=where)
    return np.array(rows)


def _require(data: Any, key: str, path: Optional[str]) -> Any:
    if not isinstance(data, dict):
        raise GameFileError(f"Expected a mapping holding '{key}'", path=path, field=key)
    if key not in data:
        raise GameFileError(f"Missing required field: {key}", path=path, field=key)
    return data[key]


def _plain(values) -> List[float]:
    return [float(v) for v in np.asarray(values).reshape(-1)]


def _load_mapping(path: Union[str, Path]) -> Dict[str, Any]:
    try:
        with open(path, "r") as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise GameFileError(f"Cannot read {path}: {e}", path=str(path))
    except yaml.YAMLError as e:
        raise GameFileError(f"Invalid YAML in {path}: {e}", path=str(path))
    if not isinstance(data, dict):
        raise GameFileError(f"{path} must contain a mapping at the top level", path=str(path))
    return data


@dataclass(frozen=True, eq=False)
class GameFile:
    """A robust game as read from (or written to) a YAML document"""

    ambiguity: AmbiguitySet
    risk: RiskProfile
    uncertainty: Optional[AffineBoxUncertainty] = None
    nominal: Optional[PayoffTensor] = None

    @property
    def shape(self) -> GameShape:
        return self.ambiguity.shape

    @classmethod
    def parse(cls, data: Dict[str, Any], path: Optional[str] = None) -> "GameFile":
        """Validate a parsed YAML mapping field by field"""
        if not isinstance(data, dict):
            raise GameFileError("Game file must be a mapping", path=path)
        raw_shape = _require(data, "shape", path)
        try:
            shape = GameShape(tuple(int(a) for a in raw_shape))
        except (TypeError, ValueError) as e:
            raise GameFileError(f"Invalid shape {raw_shape!r}: {e}", path=path, field="shape")
        except DrgamesError as e:
            raise GameFileError(e.message, path=path, field="shape")
        n = shape.vec_length

        uncertainty = None
        try:
            if "uncertainty" in data:
                block = data["uncertainty"] or {}
                parameters = _require(block, "parameters", path)
                if not isinstance(parameters, list):
                    raise GameFileError("'uncertainty.parameters' must be a list",
                                        path=path, field="uncertainty.parameters")
                names = [str(_require(p, "name", path)) for p in parameters]
                lo = [_number(_require(p, "lo", path), f"uncertainty.parameters.{nm}.lo", path)
                      for p, nm in zip(parameters, names)]
                hi = [_number(_require(p, "hi", path), f"uncertainty.parameters.{nm}.hi", path)
                      for p, nm in zip(parameters, names)]
                matrix = _matrix(_require(block, "matrix", path), "uncertainty.matrix", path)
                offset = _vector(block.get("offset", [0.0] * n), "uncertainty.offset", path, n)
                uncertainty = AffineBoxUncertainty(shape, names, lo, hi, matrix, offset)
                support = build_support_from_box(uncertainty)
            elif "support" in data:
                block = data["support"] or {}
                W = _matrix(_require(block, "W", path), "support.W", path)
                h = _vector(_require(block, "h", path), "support.h", path, W.shape[0])
                support = PolyhedralSupport(W, h)
            else:
                raise GameFileError("Game file needs a 'support' or an 'uncertainty' block",
                                    path=path, field="support")

            nominal = None
            if "nominal" in data:
                nominal = unvec(shape, _vector(data["nominal"], "nominal", path, n))

            mean_spec = _require(data, "mean", path)
            if mean_spec == NOMINAL:
                if nominal is not None:
                    mean = vec(nominal)
                elif uncertainty is not None:
                    mean = uncertainty.midpoint()
                else:
                    raise GameFileError("'mean: nominal' needs a 'nominal' or 'uncertainty' block",
                                        path=path, field="mean")
            else:
                mean = _vector(mean_spec, "mean", path, n)

            s = _number(_require(data, "s", path), "s", path)
            risk = RiskProfile(tuple(
                _vector(_require(data, "risk", path), "risk", path, shape.num_players)
            ))
            ambiguity = AmbiguitySet(shape, support, mean, s)
        except GameFileError:
            raise
        except DrgamesError as e:
            raise GameFileError(e.message, path=path, field=e.details.get("field"))

        return cls(ambiguity, risk, uncertainty, nominal)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "GameFile":
        logger.debug(f"Loading game file {path}")
        return cls.parse(_load_mapping(path), path=str(path))

    @classmethod
    def loads(cls, text: str) -> "GameFile":
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as e:
            raise GameFileError(f"Invalid YAML: {e}")
        return cls.parse(data)

    def emit(self) -> Dict[str, Any]:
        """Canonical mapping: the mean is always written out explicitly"""
        data: Dict[str, Any] = {"shape": list(self.shape.action_counts)}
        if self.uncertainty is not None:
            u = self.uncertainty
            data["uncertainty"] = {
                "parameters": [
                    {"name": name, "lo": float(lo), "hi": float(hi)}
                    for name, lo, hi in zip(u.names, u.lo, u.hi)
                ],
                "matrix": [_plain(row) for row in u.A],
                "offset": _plain(u.b),
            }
        else:
            data["support"] = {
                "W": [_plain(row) for row in self.ambiguity.support.W],
                "h": _plain(self.ambiguity.support.h),
            }
        data["mean"] = _plain(self.ambiguity.m)
        data["s"] = float(self.ambiguity.s)
        data["risk"] = list(self.risk.eps)
        if self.nominal is not None:
            data["nominal"] = _plain(vec(self.nominal))
        return data

    def dumps(self) -> str:
        return yaml.dump(self.emit(), default_flow_style=None, sort_keys=False)

    def dump(self, path: Union[str, Path]) -> None:
        with open(path, "w") as f:
            f.write(self.dumps())
        logger.info(f"Wrote game file {path}")


@dataclass
class ExperimentSpec:
    """Inspection-game experiment over a grid of risk levels"""

    params: InspectionParams = field(default_factory=InspectionParams)
    grid: List[Tuple[float, float]] = field(default_factory=lambda: [(1.0, 1.0)])
    search: SearchConfig = field(default_factory=SearchConfig)
    check_tables: bool = False

    @classmethod
    def parse(cls, data: Dict[str, Any], path: Optional[str] = None) -> "ExperimentSpec":
        if not isinstance(data, dict):
            raise GameFileError("Experiment file must be a mapping", path=path)
        block = data.get("inspection") or {}
        try:
            kwargs: Dict[str, Any] = {}
            if "w" in block:
                kwargs["w"] = _number(block["w"], "inspection.w", path)
            if "s" in block:
                kwargs["s"] = _number(block["s"], "inspection.s", path)
            for name in ("g", "v", "h"):
                if name in block:
                    kwargs[name] = tuple(_vector(block[name], f"inspection.{name}", path, 2))
            if "mean" in block and block["mean"] != NOMINAL:
                kwargs["mean"] = tuple(_vector(block["mean"], "inspection.mean", path, 8))
            params = InspectionParams(**kwargs)
        except GameFileError:
            raise
        except DrgamesError as e:
            raise GameFileError(e.message, path=path, field="inspection")

        raw_grid = data.get("grid", [[1.0, 1.0]])
        if not isinstance(raw_grid, list) or not raw_grid:
            raise GameFileError("'grid' must be a non-empty list of [eps1, eps2] pairs",
                                path=path, field="grid")
        grid = [tuple(_vector(point, "grid", path, 2)) for point in raw_grid]
        for point in grid:
            if not all(0.0 < e <= 1.0 for e in point):
                raise GameFileError(f"Risk levels must lie in (0, 1], got {point}",
                                    path=path, field="grid")

        try:
            search = SearchConfig.from_dict(data.get("search"))
        except (TypeError, ValueError) as e:
            raise GameFileError(f"Invalid search settings: {e}", path=path, field="search")

        return cls(params=params, grid=[(float(a), float(b)) for a, b in grid], search=search,
                   check_tables=bool(data.get("check_tables", False)))

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ExperimentSpec":
        return cls.parse(_load_mapping(path), path=str(path))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "inspection": self.params.to_dict(),
            "grid": [list(point) for point in self.grid],
            "search": self.search.to_dict(),
            "check_tables": self.check_tables,
        }
