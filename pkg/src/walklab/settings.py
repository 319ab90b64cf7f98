"""Walklab run configuration."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, Field, field_validator, model_validator

from walklab.enumeration import DEFAULT_ELEMENT_CAP
from walklab.exceptions import InvalidInputError
from walklab.ext.presentation import (
    DEFAULT_K_CAP,
    SPEC_PATTERN,
    Presentation,
)
from walklab.inequality import Budgets, MeasurePolicy
from walklab.measures import SymmetricMeasure
from walklab.plugins import presentations
from walklab.systems import (
    DEFAULT_CUTOFF_RADIUS,
    DEFAULT_GENERATION_DEPTH,
    GeneratingSystemSpec,
)
from walklab.walks import EntropyEstimator

__all__ = ["CONFIG_FILENAME", "RunConfig"]

CONFIG_FILENAME = "walklab.yaml"
"""Name of the optional configuration file in the working directory."""

UNIFORM = "uniform"
"""Measure source for the uniform measure on the standard generators."""

# Fields that never change the outputs of a run.
_UNHASHED_FIELDS = {"out", "use_cache", "workers"}


class RunConfig(BaseModel):
    """Everything a run depends on. A run is reproducible from its
    configuration, seed included.
    """

    group: str = "free:2"
    """Presentation spec, ``kind:k``."""

    measure: str = UNIFORM
    """``uniform`` or the path of a measure file."""

    seed: int = Field(0, ge=0)
    """Master seed of every random computation."""

    max_n: int = Field(10, ge=1)
    """Depth of BFS enumerations and exact convolutions."""

    volume_depth: int = Field(7, ge=2)
    """BFS radius used by reports when no closed-form volume exists."""

    steps: int = Field(10_000, ge=1)
    """Walk length."""

    trials: int = Field(200, ge=2)
    """Monte Carlo walks for drift estimates."""

    lln_trials: int = Field(10_000, ge=1)
    """Monte Carlo walks for the law-of-large-numbers check."""

    eps: float = Field(0.2, gt=0.0)
    """Relative band of the law-of-large-numbers check."""

    element_cap: int = Field(DEFAULT_ELEMENT_CAP, gt=0)
    """Budget on stored elements."""

    k_cap: int = Field(DEFAULT_K_CAP, ge=1)
    """Upper bound on the number of generators."""

    entropy_estimator: EntropyEstimator = EntropyEstimator.log_corrected
    """Headline entropy estimator."""

    w_min: float = Field(1e-4, ge=0.0, lt=1.0)
    """Weight floor of each inverse pair during optimization."""

    restarts: int = Field(5, ge=1)
    """Optimizer restarts."""

    inner_max_n: int = Field(8, ge=3)
    """Convolution depth of the optimizer's inner objective."""

    inner_evaluations: int = Field(80, ge=1)
    """Objective evaluations per optimizer restart."""

    cutoff_radius: int = Field(DEFAULT_CUTOFF_RADIUS, ge=2)
    """Radius of the distance table of each generating system."""

    generation_depth: int = Field(DEFAULT_GENERATION_DEPTH, ge=1)
    """Depth within which a system must reach the base generators."""

    systems: list[Path] = Field(default_factory=list)
    """Generating-system files (one word per line) for comparisons."""

    policy: MeasurePolicy = MeasurePolicy.uniform
    """Measure used on each compared system."""

    workers: int = Field(1, ge=1)
    """Worker processes. Never changes the outputs."""

    out: Path | None = None
    """Output file for result records (standard output when unset)."""

    use_cache: bool = True
    """Whether to read and write the result cache."""

    @classmethod
    def load(cls, **overrides: Any) -> RunConfig:
        """Create a configuration from an optional ``walklab.yaml`` file in
        the working directory, overridden by command-line values.

        Parameters
        ----------
        **overrides
            Field values from the command line. `None` values are ignored so
            that unset options keep the file's (or the default) value.

        Raises
        ------
        walklab.exceptions.InvalidInputError
            Raised if the file or the merged values are invalid.
        """
        settings_path = Path.cwd().joinpath(CONFIG_FILENAME)
        settings_data: dict[str, Any] = {}
        if settings_path.exists():
            try:
                settings_data = yaml.safe_load(settings_path.read_text()) or {}
            except yaml.YAMLError as e:
                raise InvalidInputError(f"{settings_path}: {e}") from e
            if not isinstance(settings_data, dict):
                raise InvalidInputError(
                    f"{settings_path} must hold a mapping of settings."
                )

        # Adding in command-line overrides
        for key, value in overrides.items():
            if value is None or value == []:
                continue
            settings_data[key] = value

        try:
            return cls.model_validate(settings_data)
        except ValueError as e:
            raise InvalidInputError(str(e)) from e

    @field_validator("group")
    @classmethod
    def validate_group(cls, v: str) -> str:
        m = SPEC_PATTERN.match(v.strip())
        if not m:
            raise ValueError(
                f"Expected a presentation spec like 'free:2', got {v!r}."
            )
        if m["kind"] not in presentations:
            raise ValueError(
                f"'{m['kind']}' is not a known presentation plugin. "
                f"Available presentations are: "
                f"{', '.join(presentations.names)}."
            )
        return v.strip()

    @model_validator(mode="after")
    def validate_k(self) -> RunConfig:
        k = int(self.group.split(":", 1)[1])
        if not 1 <= k <= self.k_cap:
            raise ValueError(
                f"{self.group} needs 1 <= k <= {self.k_cap} (got k={k})."
            )
        return self

    def presentation(self) -> Presentation:
        """Instantiate the configured presentation."""
        return presentations.create(self.group, k_cap=self.k_cap)

    def step_measure(self, presentation: Presentation) -> SymmetricMeasure:
        """The configured step measure on a presentation."""
        if self.measure == UNIFORM:
            return SymmetricMeasure.uniform(presentation)
        return SymmetricMeasure.from_file(presentation, Path(self.measure))

    def system_specs(self) -> list[GeneratingSystemSpec]:
        """Generating systems read from the configured files."""
        return [
            GeneratingSystemSpec.from_file(self.group, path)
            for path in self.systems
        ]

    def budgets(self) -> Budgets:
        """Budgets of the reports."""
        return Budgets(
            element_cap=self.element_cap,
            max_n=max(self.max_n, 2),
            volume_depth=self.volume_depth,
            steps=self.steps,
            trials=self.trials,
            seed=self.seed,
            workers=self.workers,
            estimator=self.entropy_estimator,
            w_min=self.w_min,
            inner_max_n=self.inner_max_n,
            inner_evaluations=self.inner_evaluations,
            cutoff_radius=self.cutoff_radius,
            generation_depth=self.generation_depth,
        )

    def canonical_json(self, command: str) -> str:
        """Canonical JSON of everything that determines a command's outputs.

        Input files are represented by the hash of their content.
        """
        data = self.model_dump(mode="json", exclude=_UNHASHED_FIELDS)
        data["command"] = command
        if self.measure != UNIFORM:
            data["measure"] = _file_digest(Path(self.measure))
        data["systems"] = [_file_digest(path) for path in self.systems]
        return json.dumps(data, sort_keys=True, separators=(",", ":"))

    def config_hash(self, command: str) -> str:
        """SHA-256 of `canonical_json`."""
        return hashlib.sha256(
            self.canonical_json(command).encode()
        ).hexdigest()


def _file_digest(path: Path) -> str:
    try:
        return hashlib.sha256(path.read_bytes()).hexdigest()
    except OSError as e:
        raise InvalidInputError(f"Cannot read {path}: {e}") from e
