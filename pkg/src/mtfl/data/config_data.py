"""
SelectionConfig, AugmentConfig and PipelineConfig Classes
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace
import json
from pathlib import Path
from typing import Any, Dict, List, Tuple

import mtfl.defaults
from mtfl.data.factor_data import Sector
from mtfl.data.penalty_data import MODEL_NAMES, SolverOptions
from mtfl.data.seir_data import SeirParams
from mtfl.errors import ConfigError, DataError


@dataclass(frozen=True, kw_only=True)
class SelectionConfig:
    m: int = mtfl.defaults.SELECT_M
    rfe_alpha: float = mtfl.defaults.RFE_ALPHA
    forest_trees: int = mtfl.defaults.FOREST_TREES
    forest_max_depth: int = mtfl.defaults.FOREST_MAX_DEPTH
    forest_min_leaf: int = mtfl.defaults.FOREST_MIN_LEAF
    forest_max_features: str | int | float = mtfl.defaults.FOREST_MAX_FEATURES
    third_wrapper: str = mtfl.defaults.THIRD_WRAPPER
    boosting_stages: int = mtfl.defaults.BOOSTING_STAGES
    boosting_learning_rate: float = mtfl.defaults.BOOSTING_LEARNING_RATE
    enabled: bool = True


@dataclass(frozen=True, kw_only=True)
class AugmentConfig:
    count: int = mtfl.defaults.AUGMENT_COUNT
    jitter: float = mtfl.defaults.AUGMENT_JITTER
    beta_spread: float = mtfl.defaults.AUGMENT_BETA_SPREAD
    seed: int | None = None
    beta: float = mtfl.defaults.SEIR_BETA
    sigma: float = mtfl.defaults.SEIR_SIGMA
    gamma: float = mtfl.defaults.SEIR_GAMMA
    mu: float = mtfl.defaults.SEIR_MU
    n_pop: float = mtfl.defaults.SEIR_POPULATION
    e0: float = mtfl.defaults.SEIR_E0
    i0: float = mtfl.defaults.SEIR_I0
    dt: float = mtfl.defaults.SEIR_DT

    def seir_params(self, days: int) -> SeirParams:
        """
        Get the base simulation parameters over `days` days

        :rtype: :py:class:`mtfl.data.seir_data.SeirParams`
        """
        return SeirParams(
            beta=self.beta, sigma=self.sigma, gamma=self.gamma, mu=self.mu,
            n_pop=self.n_pop, e0=self.e0, i0=self.i0, days=days, dt=self.dt,
        )


def _build(cls, data: Dict[str, Any] | None, where: str):
    data = dict(data or {})
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown {where} key(s): {', '.join(unknown)}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {where}: {exc}") from exc


@dataclass(kw_only=True)
class PipelineConfig:
    """
    Every setting of a pipeline run. Built from a JSON document with
    :py:meth:`from_dict`; keys left out take the values in
    :py:mod:`mtfl.defaults`.

    :param factors: Long-format factor CSV
    :type factors: str or None
    :param epidemic: Epidemic series CSV
    :type epidemic: str or None
    :param out: Output directory
    :type out: str
    :param grid: Explicit lambda grids keyed by model, each a list of
        ``[lambda1]`` (ridge, lasso) or ``[lambda1, lambda2, lambda3]``
        (fsgl); models left out use the log-spaced default grid
    :type grid: dict[str, list[list[float]]]
    :param ablations: Sector slugs to drop, one list per ablation row
    :type ablations: list[list[str]]
    """
    factors: str | None = None
    epidemic: str | None = None
    out: str = 'results'
    window: int = mtfl.defaults.WINDOW
    group_size: int = mtfl.defaults.GROUP_SIZE
    summary_days: int = mtfl.defaults.SUMMARY_DAYS
    models: List[str] = field(
        default_factory=lambda: list(mtfl.defaults.MODELS)
    )
    grid: Dict[str, List[List[float]]] = field(default_factory=dict)
    grid_points: int = mtfl.defaults.GRID_POINTS
    grid_low: float = mtfl.defaults.GRID_LOW
    grid_high: float = mtfl.defaults.GRID_HIGH
    folds: int = mtfl.defaults.CV_FOLDS
    test_fraction: float = mtfl.defaults.TEST_FRACTION
    n_runs: int = mtfl.defaults.N_RUNS
    seed: int = mtfl.defaults.SEED
    n_jobs: int | None = None
    outlier_filter: bool = False
    outlier_factor: float = mtfl.defaults.OUTLIER_IQR_FACTOR
    vote_eps: float = mtfl.defaults.VOTE_EPS
    top_p: int = mtfl.defaults.TOP_P
    strict: bool = False
    trace: bool = False
    write_run_weights: bool = False
    heatmap_scale: str = mtfl.defaults.HEATMAP_SCALE
    ablations: List[List[str]] = field(default_factory=list)
    selection: SelectionConfig = field(default_factory=SelectionConfig)
    solver: SolverOptions = field(default_factory=SolverOptions)
    augment: AugmentConfig = field(default_factory=AugmentConfig)

    @classmethod
    def from_dict(
        cls,
        data: Dict[str, Any],
        base_dir: str | Path | None = None
    ) -> PipelineConfig:
        """
        Build a config from parsed JSON

        :param data: The JSON object
        :type data: dict
        :param base_dir: Directory that relative input/output paths
            are resolved against
        :type base_dir: str or :py:class:`pathlib.Path` or None
        :rtype: :py:class:`mtfl.data.config_data.PipelineConfig`
        :raises ConfigError: on unknown keys or invalid values
        """
        data = dict(data)
        nested = {
            'selection': _build(
                SelectionConfig, data.pop('selection', None), 'selection'
            ),
            'solver': _build(
                SolverOptions, data.pop('solver', None), 'solver'
            ),
            'augment': _build(
                AugmentConfig, data.pop('augment', None), 'augment'
            ),
        }
        config = _build(cls, {**data, **nested}, 'config')
        if base_dir is not None:
            for name in ('factors', 'epidemic', 'out'):
                value = getattr(config, name)
                if value and not Path(value).is_absolute():
                    setattr(config, name, str(Path(base_dir) / value))
        return config

    @classmethod
    def from_json_file(cls, path: str | Path) -> PipelineConfig:
        path = Path(path)
        try:
            with open(path, 'r', encoding='utf-8') as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config '{path}': {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config '{path}' is not valid JSON: {exc}") \
                from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config '{path}' must hold a JSON object")
        return cls.from_dict(data, base_dir=path.parent)

    @property
    def json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @property
    def ablation_sectors(self) -> List[Tuple[Sector, ...]]:
        try:
            return [
                tuple(Sector.parse(slug) for slug in mask)
                for mask in self.ablations
            ]
        except DataError as exc:
            raise ConfigError(str(exc)) from exc

    def override(self, **changes: Any) -> PipelineConfig:
        """
        Get a copy with the given keys replaced; ``None`` values are
        ignored so unset command line flags keep the config value
        """
        return replace(
            self, **{k: v for k, v in changes.items() if v is not None}
        )

    def validate(self, require_inputs: bool = True):
        """
        Check the config's invariants

        :param require_inputs: Whether the input files must exist
        :type require_inputs: bool
        :raises ConfigError: on the first violated invariant
        """
        if self.window < 1 or self.group_size < 1:
            raise ConfigError("`window` and `group_size` must be positive")
        if self.window % self.group_size:
            raise ConfigError(
                f"window {self.window} is not divisible by group size "
                + f"{self.group_size}"
            )
        if not 1 <= self.summary_days <= self.window:
            raise ConfigError("`summary_days` must lie within the window")
        if self.n_runs < 1:
            raise ConfigError("`n_runs` must be at least 1")
        if self.folds < 2:
            raise ConfigError("`folds` must be at least 2")
        if not 0 < self.test_fraction < 1:
            raise ConfigError("`test_fraction` must lie in (0, 1)")
        if not self.models:
            raise ConfigError("at least one model must be configured")
        for model in self.models:
            if model not in MODEL_NAMES:
                raise ConfigError(f"unknown model '{model}'")
        for model, points in self.grid.items():
            if model not in MODEL_NAMES:
                raise ConfigError(f"grid given for unknown model '{model}'")
            width = 3 if model == 'fsgl' else 1
            for point in points:
                if len(point) != width or any(v < 0 for v in point):
                    raise ConfigError(
                        f"grid point {point} invalid for model '{model}'"
                    )
                if model == 'ridge' and point[0] <= 0:
                    raise ConfigError("ridge grid values must be positive")
        if self.grid_points < 1 or not 0 < self.grid_low <= self.grid_high:
            raise ConfigError("default grid bounds are invalid")
        if self.vote_eps <= 0:
            raise ConfigError("`vote_eps` must be positive")
        if self.top_p < 1:
            raise ConfigError("`top_p` must be at least 1")
        if self.heatmap_scale not in ('signed', 'magnitude'):
            raise ConfigError(
                "`heatmap_scale` must be 'signed' or 'magnitude'"
            )
        if self.selection.m < 1:
            raise ConfigError("selection `m` must be at least 1")
        if self.selection.rfe_alpha <= 0:
            raise ConfigError("selection `rfe_alpha` must be positive")
        if self.selection.third_wrapper not in ('forest', 'boosting'):
            raise ConfigError(
                "selection `third_wrapper` must be 'forest' or 'boosting'"
            )
        if self.augment.count < 0 or self.augment.jitter < 0:
            raise ConfigError("augment `count` and `jitter` must be >= 0")
        if any(not mask for mask in self.ablation_sectors):
            raise ConfigError("ablation masks must name at least one sector")
        if require_inputs:
            for name in ('factors', 'epidemic'):
                value = getattr(self, name)
                if not value:
                    raise ConfigError(f"no {name} file configured")
                if not Path(value).is_file():
                    raise ConfigError(f"{name} file not found: '{value}'")
