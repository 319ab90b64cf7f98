"""Walklab command line interface."""

from __future__ import annotations

import logging
import time
from collections.abc import Callable
from pathlib import Path
from typing import Annotated, Any, Optional

import typer
from pydantic import BaseModel

from walklab.cache import ResultCache
from walklab.enumeration import (
    cesaro_volume,
    enumerate_ball,
    log_volume,
    moebius_polynomial,
    semigroup_spheres_from_moebius,
)
from walklab.exceptions import BudgetExceededError, UsageError, WalklabError
from walklab.inequality import (
    MeasurePolicy,
    compare_systems,
    fundamental_report,
    optimize_measure,
)
from walklab.plugins import presentations
from walklab.records import ResultRecord, write_record, write_sequence_csv
from walklab.settings import RunConfig
from walklab.walks import EntropyEstimator, drift, entropy_rate, lln_check

__all__ = ["app"]

app = typer.Typer()

# typer doesn't work with modern union syntax for optional types,
# hence the use of UP007 to suppress the error for now.

GroupOption = Annotated[
    Optional[str],  # noqa: UP007
    typer.Option("--group", "-g", help="Presentation spec, such as free:2."),
]
MeasureOption = Annotated[
    Optional[str],  # noqa: UP007
    typer.Option(help="'uniform' or a file of 'generator weight' lines."),
]
SeedOption = Annotated[
    Optional[int],  # noqa: UP007
    typer.Option(help="Master seed."),
]
MaxNOption = Annotated[
    Optional[int],  # noqa: UP007
    typer.Option(help="Depth of BFS enumerations and exact convolutions."),
]
StepsOption = Annotated[
    Optional[int],  # noqa: UP007
    typer.Option(help="Walk length in steps."),
]
TrialsOption = Annotated[
    Optional[int],  # noqa: UP007
    typer.Option(help="Number of Monte Carlo walks."),
]
CapOption = Annotated[
    Optional[int],  # noqa: UP007
    typer.Option("--element-cap", help="Budget on stored elements."),
]
WorkersOption = Annotated[
    Optional[int],  # noqa: UP007
    typer.Option(help="Worker processes (never changes the results)."),
]
OutOption = Annotated[
    Optional[Path],  # noqa: UP007
    typer.Option(help="NDJSON file for records, with CSV side files."),
]
NoCacheOption = Annotated[
    bool, typer.Option("--no-cache", help="Bypass the result cache.")
]


@app.callback()
def main(
    verbose: Annotated[
        bool, typer.Option("--verbose", "-v", help="Log debug messages.")
    ] = False,
) -> None:
    """Growth, drift and entropy of random walks on groups."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )


@app.command()
def growth(
    group: GroupOption = None,
    max_n: MaxNOption = None,
    element_cap: CapOption = None,
    out: OutOption = None,
    no_cache: NoCacheOption = False,
) -> None:
    """Enumerate spheres and estimate the logarithmic volume v."""

    def compute(config: RunConfig) -> dict[str, Any]:
        presentation = config.presentation()
        counts = enumerate_ball(
            presentation, config.max_n, cap=config.element_cap
        )
        outputs: dict[str, Any] = {
            "presentation": presentation.tag,
            "spheres": list(counts.counts),
            "balls": list(counts.balls),
            "submultiplicative": counts.is_submultiplicative(),
        }
        if counts.depth >= 2:
            outputs["ratio_fit_volume"] = _dump(log_volume(counts))
            outputs["volume"] = outputs["ratio_fit_volume"]
            outputs["cesaro_volume"] = _dump(cesaro_volume(counts))
        if presentation.name == "lfsemigroup":
            polynomial = moebius_polynomial(presentation.k)
            predicted = semigroup_spheres_from_moebius(
                polynomial, counts.depth
            )
            outputs["moebius_coefficients"] = list(polynomial.coefficients)
            outputs["moebius_spheres"] = list(predicted.counts)
            outputs["counts_agree"] = predicted.counts == counts.counts
        try:
            outputs["closed_form_volume"] = _dump(log_volume(presentation))
        except UsageError:
            pass
        else:
            outputs["volume"] = outputs["closed_form_volume"]
        return outputs

    def side_files(outputs: dict[str, Any], out: Path) -> None:
        write_sequence_csv(
            _side_path(out, "growth"),
            {"sphere": outputs["spheres"][1:], "ball": outputs["balls"][1:]},
        )

    _execute(
        "growth",
        compute,
        side_files,
        group=group,
        max_n=max_n,
        element_cap=element_cap,
        out=out,
        use_cache=not no_cache,
    )


@app.command("drift")
def drift_command(
    group: GroupOption = None,
    measure: MeasureOption = None,
    seed: SeedOption = None,
    steps: StepsOption = None,
    trials: TrialsOption = None,
    workers: WorkersOption = None,
    out: OutOption = None,
    no_cache: NoCacheOption = False,
) -> None:
    """Estimate the drift l by Monte Carlo walks."""

    def compute(config: RunConfig) -> dict[str, Any]:
        presentation = config.presentation()
        mu = config.step_measure(presentation)
        estimate = drift(
            presentation,
            mu,
            config.steps,
            config.trials,
            config.seed,
            workers=config.workers,
        )
        return {
            "presentation": presentation.tag,
            "measure": mu.describe(presentation),
            "seed": config.seed,
            "drift": _dump(estimate),
            "ci": [estimate.low, estimate.high],
        }

    _execute(
        "drift",
        compute,
        None,
        group=group,
        measure=measure,
        seed=seed,
        steps=steps,
        trials=trials,
        workers=workers,
        out=out,
        use_cache=not no_cache,
    )


@app.command("entropy")
def entropy_command(
    group: GroupOption = None,
    measure: MeasureOption = None,
    max_n: MaxNOption = None,
    element_cap: CapOption = None,
    estimator: Annotated[
        Optional[EntropyEstimator],  # noqa: UP007
        typer.Option(help="Headline entropy estimator."),
    ] = None,
    out: OutOption = None,
    no_cache: NoCacheOption = False,
) -> None:
    """Compute H(mu^{*n}) exactly and estimate the entropy h."""

    def compute(config: RunConfig) -> dict[str, Any]:
        presentation = config.presentation()
        mu = config.step_measure(presentation)
        rate = entropy_rate(
            presentation,
            mu,
            config.max_n,
            cap=config.element_cap,
            estimator=config.entropy_estimator,
        )
        return {
            "presentation": presentation.tag,
            "measure": mu.describe(presentation),
            "measure_entropy": mu.entropy(),
            "entropy": _dump(rate),
        }

    def side_files(outputs: dict[str, Any], out: Path) -> None:
        rate = outputs["entropy"]
        write_sequence_csv(
            _side_path(out, "entropy"),
            {
                "entropy": rate["entropies"],
                "increment": rate["increments"],
                "cesaro": rate["cesaro"],
                "expected_length": rate["expected_lengths"],
                "identity_mass": rate["identity_mass"],
            },
        )

    _execute(
        "entropy",
        compute,
        side_files,
        group=group,
        measure=measure,
        max_n=max_n,
        element_cap=element_cap,
        entropy_estimator=estimator,
        out=out,
        use_cache=not no_cache,
    )


@app.command()
def report(
    group: GroupOption = None,
    measure: MeasureOption = None,
    seed: SeedOption = None,
    max_n: MaxNOption = None,
    steps: StepsOption = None,
    trials: TrialsOption = None,
    element_cap: CapOption = None,
    workers: WorkersOption = None,
    out: OutOption = None,
    no_cache: NoCacheOption = False,
) -> None:
    """Report v, l, h, q = h / (l v) and the extremality verdict."""

    def compute(config: RunConfig) -> dict[str, Any]:
        presentation = config.presentation()
        mu = config.step_measure(presentation)
        return _dump(fundamental_report(presentation, mu, config.budgets()))

    _execute(
        "report",
        compute,
        None,
        group=group,
        measure=measure,
        seed=seed,
        max_n=max_n,
        steps=steps,
        trials=trials,
        element_cap=element_cap,
        workers=workers,
        out=out,
        use_cache=not no_cache,
    )


@app.command()
def optimize(
    group: GroupOption = None,
    seed: SeedOption = None,
    restarts: Annotated[
        Optional[int],  # noqa: UP007
        typer.Option(help="Optimizer restarts."),
    ] = None,
    max_n: MaxNOption = None,
    steps: StepsOption = None,
    trials: TrialsOption = None,
    element_cap: CapOption = None,
    workers: WorkersOption = None,
    out: OutOption = None,
    no_cache: NoCacheOption = False,
) -> None:
    """Search for the measure of largest normalized entropy."""

    def compute(config: RunConfig) -> dict[str, Any]:
        presentation = config.presentation()
        result = optimize_measure(
            presentation,
            config.budgets(),
            restarts=config.restarts,
            master_seed=config.seed,
        )
        return _dump(result)

    def side_files(outputs: dict[str, Any], out: Path) -> None:
        trace = outputs["trace"]
        write_sequence_csv(
            _side_path(out, "trace"),
            {
                "restart": [e["restart"] for e in trace],
                "objective": [e["objective"] for e in trace],
                "best": [e["best"] for e in trace],
            },
        )

    _execute(
        "optimize",
        compute,
        side_files,
        group=group,
        seed=seed,
        restarts=restarts,
        max_n=max_n,
        steps=steps,
        trials=trials,
        element_cap=element_cap,
        workers=workers,
        out=out,
        use_cache=not no_cache,
    )


@app.command()
def compare(
    group: GroupOption = None,
    systems: Annotated[
        Optional[list[Path]],  # noqa: UP007
        typer.Option(
            "--systems",
            "--system",
            help="Generating-system file, one word per line (repeatable).",
        ),
    ] = None,
    policy: Annotated[
        Optional[MeasurePolicy],  # noqa: UP007
        typer.Option(help="Measure on each system."),
    ] = None,
    seed: SeedOption = None,
    max_n: MaxNOption = None,
    trials: TrialsOption = None,
    element_cap: CapOption = None,
    workers: WorkersOption = None,
    out: OutOption = None,
    no_cache: NoCacheOption = False,
) -> None:
    """Rank generating systems of a group by q."""

    def compute(config: RunConfig) -> dict[str, Any]:
        specs = config.system_specs()
        if not specs:
            raise UsageError("Pass at least one --systems file.")
        comparison = compare_systems(
            config.presentation(),
            specs,
            config.policy,
            config.budgets(),
            restarts=config.restarts,
        )
        return _dump(comparison)

    _execute(
        "compare",
        compute,
        None,
        group=group,
        systems=systems,
        policy=policy,
        seed=seed,
        max_n=max_n,
        trials=trials,
        element_cap=element_cap,
        workers=workers,
        out=out,
        use_cache=not no_cache,
    )


@app.command()
def lln(
    group: GroupOption = None,
    measure: MeasureOption = None,
    seed: SeedOption = None,
    steps: StepsOption = None,
    eps: Annotated[
        Optional[float],  # noqa: UP007
        typer.Option(help="Relative band around l n."),
    ] = None,
    trials: Annotated[
        Optional[int],  # noqa: UP007
        typer.Option(help="Monte Carlo walks."),
    ] = None,
    max_n: MaxNOption = None,
    element_cap: CapOption = None,
    workers: WorkersOption = None,
    out: OutOption = None,
    no_cache: NoCacheOption = False,
) -> None:
    """Check the law of large numbers for word lengths."""

    def compute(config: RunConfig) -> dict[str, Any]:
        presentation = config.presentation()
        mu = config.step_measure(presentation)
        result = lln_check(
            presentation,
            mu,
            config.steps,
            config.eps,
            trials=config.lln_trials,
            master_seed=config.seed,
            exact_max_n=config.max_n,
            cap=config.element_cap,
            workers=config.workers,
        )
        return {
            "presentation": presentation.tag,
            "measure": mu.describe(presentation),
            "lln": _dump(result),
            "bound": result.bound,
            "satisfied": result.satisfied,
        }

    _execute(
        "lln",
        compute,
        None,
        group=group,
        measure=measure,
        seed=seed,
        steps=steps,
        eps=eps,
        lln_trials=trials,
        max_n=max_n,
        element_cap=element_cap,
        workers=workers,
        out=out,
        use_cache=not no_cache,
    )


@app.command("presentations")
def list_presentations() -> None:
    print("Available presentations:\n")
    print(presentations.names)


def _execute(
    command: str,
    compute: Callable[[RunConfig], dict[str, Any]],
    side_files: Callable[[dict[str, Any], Path], None] | None,
    **overrides: Any,
) -> None:
    """Run a command through the cache and emit its record.

    Errors become a message on standard error and the error's exit code. A
    budget error still emits a ``partial`` record first.
    """
    logger = logging.getLogger(__name__)
    try:
        config = RunConfig.load(**overrides)
        config_hash = config.config_hash(command)
        cache = ResultCache()
        record = cache.get(config_hash) if config.use_cache else None
        if record is None:
            start = time.perf_counter()
            status, error = "ok", None
            try:
                outputs = compute(config)
            except BudgetExceededError as e:
                outputs = {
                    "completed": e.completed,
                    "partial": _dump(e.partial),
                }
                status, error = "partial", str(e)
            record = ResultRecord(
                command=command,
                config=config.model_dump(mode="json"),
                config_hash=config_hash,
                outputs=outputs,
                status=status,
                error=error,
                wall_clock=time.perf_counter() - start,
            )
            if config.use_cache and status == "ok":
                cache.put(record)
        else:
            logger.info("Using cached %s result %s", command, config_hash)
        write_record(record, config.out)
        if config.out is not None and side_files and record.status == "ok":
            side_files(record.outputs, config.out)
    except WalklabError as e:
        typer.echo(f"Error: {e}", err=True)
        raise typer.Exit(code=e.exit_code) from e
    if record.status == "partial":
        typer.echo(f"Error: {record.error}", err=True)
        raise typer.Exit(code=BudgetExceededError.exit_code)


def _dump(value: Any) -> Any:
    # Models become JSON-ready dicts; other partial results are summarized.
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json")
    if isinstance(value, dict):
        return {"elements": len(value)}
    if value is None:
        return None
    return {"type": type(value).__name__}


def _side_path(out: Path, name: str) -> Path:
    return out.with_name(f"{out.stem}-{name}.csv")
