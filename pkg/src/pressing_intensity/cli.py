"""Command-line interface.

Exit codes: 0 success, 1 invalid input or aborted run, 2 I/O error.
"""

from __future__ import annotations

import contextlib
import gc
import hashlib
import json
import logging
import os
import sys
import tempfile
import time
from typing import Iterable, Iterator, Optional

import click

from .core import BALL, ModelParams, PressingError, PressingResult
from .ingestion import (
    FrameParseError,
    ValidationLimits,
    VelocityEstimationError,
    estimate_velocities,
    parse_frames,
    validate_frame,
)
from .pipeline import (
    FORMATS,
    MODES,
    SIDE_CHOICES,
    RunConfig,
    chunked,
    compute_results,
    encode_entries,
    encode_chunk,
    encode_stream,
    evaluate_chunk,
    header_text,
    ordered_map,
)
from .synthetic import synthetic_match

log = logging.getLogger("pressing_intensity")

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2
_DEFAULTS = ModelParams()


class _Abort(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


def _model_options(f):
    options = [
        click.option("--reaction-time", type=float, default=_DEFAULTS.reaction_time_s, show_default=True,
                     help="Reaction time in seconds."),
        click.option("--v-max", type=float, default=_DEFAULTS.v_max_mps, show_default=True,
                     help="Maximum running speed in m/s."),
        click.option("--sigma", type=float, default=_DEFAULTS.sigma, show_default=True,
                     help="Logistic spread of the interception probability."),
        click.option("--t-threshold", type=float, default=_DEFAULTS.t_threshold_s, show_default=True,
                     help="Time threshold (s) for player pressure."),
        click.option("--active-speed", type=float, default=_DEFAULTS.active_speed_mps, show_default=True,
                     help="Defenders slower than this (m/s) exert no pressure."),
        click.option("--passlane-t", type=float, default=_DEFAULTS.passlane_t_threshold_s, show_default=True,
                     help="Time threshold (s) for pass-lane pressure."),
        click.option("--possession-radius", type=float, default=_DEFAULTS.possession_radius_m,
                     show_default=True, help="Max ball distance (m) for an unannotated carrier."),
        click.option("--literal-eq3", is_flag=True,
                     help="Measure the heading penalty against the target's absolute projected position."),
        click.option("--strict-filter", is_flag=True,
                     help="Slow-defender filter leaves the ball column untouched."),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def _run_options(f):
    options = [
        click.option("--input", "input_path", default="-", show_default=True,
                     help="Frames as JSON Lines ('-' for stdin)."),
        click.option("--output", "output_path", default="-", show_default=True,
                     help="Destination ('-' for stdout)."),
        click.option("--sides", type=click.Choice(SIDE_CHOICES), default="both", show_default=True,
                     help="Defending side(s) to evaluate."),
        click.option("--format", "output_format", type=click.Choice(FORMATS), default="jsonl",
                     show_default=True),
        click.option("--smoothing-window", type=int, default=1, show_default=True,
                     help="Odd window for velocity smoothing."),
        click.option("--workers", type=click.IntRange(min=0), default=1, show_default=True,
                     help="Worker processes (0 = one per CPU)."),
        click.option("--strict", is_flag=True, help="Abort on the first invalid line or frame."),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def _params(kw: dict) -> ModelParams:
    try:
        return ModelParams(
            reaction_time_s=kw.pop("reaction_time"),
            v_max_mps=kw.pop("v_max"),
            sigma=kw.pop("sigma"),
            t_threshold_s=kw.pop("t_threshold"),
            active_speed_mps=kw.pop("active_speed"),
            passlane_t_threshold_s=kw.pop("passlane_t"),
            possession_radius_m=kw.pop("possession_radius"),
            literal_eq3=kw.pop("literal_eq3"),
            strict_filter=kw.pop("strict_filter"),
        )
    except ValueError as exc:
        raise click.BadParameter(str(exc))


def _config(mode: str, kw: dict) -> RunConfig:
    params = _params(kw)
    if kw["smoothing_window"] < 1 or kw["smoothing_window"] % 2 == 0:
        raise click.BadParameter("must be an odd integer >= 1", param_hint="--smoothing-window")
    return RunConfig(
        input_path=kw["input_path"],
        output_path=kw["output_path"],
        mode=mode,
        params=params,
        sides=kw["sides"],
        parallelism=kw["workers"],
        strict=kw["strict"],
        output_format=kw["output_format"],
        smoothing_window=kw["smoothing_window"],
    )


@contextlib.contextmanager
def _open_input(path: str):
    if path == "-":
        yield sys.stdin
        return
    try:
        f = open(path, encoding="utf-8")
    except OSError as exc:
        raise _Abort(EXIT_IO, f"cannot read {path}: {exc.strerror}")
    with f:
        yield f


@contextlib.contextmanager
def _open_output(path: str):
    """Write to a temporary file renamed into place only on success."""
    if path == "-":
        yield sys.stdout
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    try:
        fd, tmp = tempfile.mkstemp(prefix=".pressing-", dir=directory)
    except OSError as exc:
        raise _Abort(EXIT_IO, f"cannot write {path}: {exc.strerror}")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            yield f
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def _frames(lines: Iterable[str], config: RunConfig, stats: dict):
    errors: list = []
    warnings: list = []
    stats["parse_errors"] = errors
    stats["warnings"] = warnings
    stats["frames"] = 0
    for frame in estimate_velocities(parse_frames(lines, config.strict, errors),
                                     config.smoothing_window, warnings):
        stats["frames"] += 1
        yield frame


def _guarded(fn):
    """Map pipeline exceptions onto exit codes."""
    def run(*args, **kwargs) -> int:
        try:
            return fn(*args, **kwargs)
        except _Abort as exc:
            click.echo(f"error: {exc}", err=True)
            return exc.code
        except (FrameParseError, VelocityEstimationError, PressingError) as exc:
            click.echo(f"error: {exc}", err=True)
            return EXIT_INVALID
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            return EXIT_IO
    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


@_guarded
def cmd_compute(config: RunConfig) -> int:
    """Evaluate every frame of ``config.input_path`` and write matrices in frame order."""
    stats: dict = {}
    with _open_input(config.input_path) as fin, _open_output(config.output_path) as fout:
        for text in encode_stream(_frames(fin, config, stats), config):
            fout.write(text)
        if stats["frames"] == 0:
            raise _Abort(EXIT_INVALID, f"no frames in {config.input_path}")
    skipped = len(stats["parse_errors"])
    if skipped:
        click.echo(f"warning: skipped {skipped} invalid line(s)", err=True)
    gaps = len(stats["warnings"])
    if gaps:
        click.echo(f"warning: {gaps} velocity gap(s) filled with zero", err=True)
    return EXIT_OK


def _computed_records(lines: Iterable[str]) -> Iterator[dict]:
    for n, line in enumerate(lines, start=1):
        if line.strip():
            try:
                yield json.loads(line)
            except json.JSONDecodeError:
                raise _Abort(EXIT_INVALID, f"line {n}: malformed JSON in computed output")


def _players_by_frame(config: RunConfig, fin) -> Iterator[tuple[int, float, list[dict]]]:
    """Group players-mode records per frame, from computed output or raw frames."""
    first = ""
    for first in fin:
        if first.strip():
            break
    lines = _prepend(first, fin)
    if first.lstrip().startswith("# {"):
        raise _Abort(EXIT_INVALID, "summary reads JSONL output or raw frames, not CSV")
    try:
        computed = "manifest" in json.loads(first) if first.strip() else False
    except json.JSONDecodeError:
        computed = False
    if computed:
        records = (r for r in _computed_records(lines) if r.get("mode") == "players" and "manifest" not in r)
    else:
        cfg = RunConfig(mode="players", params=config.params, sides=config.sides,
                        parallelism=config.parallelism, strict=config.strict,
                        smoothing_window=config.smoothing_window)
        records = (_as_record(r) for r in compute_results(_frames(lines, cfg, {}), cfg))
    current: Optional[int] = None
    group: list[dict] = []
    ts = 0.0
    for rec in records:
        if rec["frame_id"] != current:
            if current is not None:
                yield current, ts, group
            current, ts, group = rec["frame_id"], rec.get("timestamp_s", 0.0), []
        group.append(rec)
    if current is not None:
        yield current, ts, group


def _prepend(first: str, rest: Iterable[str]) -> Iterator[str]:
    if first:
        yield first
    yield from rest


def _as_record(entry) -> dict:
    if isinstance(entry, PressingResult):
        return {"frame_id": entry.frame_id, "timestamp_s": entry.timestamp_s,
                "defending_side": entry.defending_side, "target_ids": list(entry.target_ids),
                "total_pressure": entry.total_pressure.tolist(), "carrier_id": entry.carrier_id}
    return {"frame_id": entry.frame_id, "error": str(entry)}


def _pressure(rec: dict, target: str) -> Optional[float]:
    ids = rec.get("target_ids") or []
    return rec["total_pressure"][ids.index(target)] if target in ids else None


@_guarded
def cmd_summary(config: RunConfig, target: str) -> int:
    """Write ``timestamp_s,frame_id,target_id,total_pressure,carrier_changed`` for one target.

    ``target`` is a player id, ``BALL`` or ``CARRIER``. Pressure on the ball
    and carrier is taken from the team defending against the carrier.
    """
    seen = False
    frames = 0
    previous_carrier: Optional[str] = None
    with _open_input(config.input_path) as fin, _open_output(config.output_path) as fout:
        fout.write("timestamp_s,frame_id,target_id,total_pressure,carrier_changed\n")
        for frame_id, ts, group in _players_by_frame(config, fin):
            carried = [r for r in group if r.get("carrier_id")]
            carrier = carried[0]["carrier_id"] if carried else None
            changed = int(frames > 0 and carrier != previous_carrier)
            previous_carrier = carrier
            frames += 1
            value: Optional[float] = None
            target_id = target
            if target == "CARRIER":
                target_id = carrier or ""
                if carried:
                    value = _pressure(carried[0], carrier)
            elif target == BALL:
                pool = carried or (group if len(group) == 1 else [])
                if pool:
                    value = _pressure(pool[0], BALL)
            else:
                for rec in group:
                    value = _pressure(rec, target)
                    if value is not None:
                        seen = True
                        break
            shown = "" if value is None else "%.9g" % value
            fout.write("%s,%d,%s,%s,%d\n" % ("%.9g" % ts, frame_id, target_id, shown, changed))
        if frames == 0:
            raise _Abort(EXIT_INVALID, f"no frames in {config.input_path}")
        if target not in (BALL, "CARRIER") and not seen:
            raise _Abort(EXIT_INVALID, f"unknown target id {target!r}")
    return EXIT_OK


def run_bench(frames: int, seed: int, params: ModelParams = ModelParams(), workers: int = 1,
              chunk_size: int = 256) -> dict:
    """Time the players-mode pipeline, both sides, on a seeded synthetic match."""
    # Objects already alive in the caller are moved out of the collector's
    # reach so the timings do not depend on the size of the host heap.
    gc.collect()
    gc.freeze()
    try:
        return _run_bench(frames, seed, params, workers, chunk_size)
    finally:
        gc.unfreeze()


def _run_bench(frames: int, seed: int, params: ModelParams, workers: int, chunk_size: int) -> dict:
    config = RunConfig(mode="players", params=params, sides="both", parallelism=workers)
    t0 = time.perf_counter()
    match = synthetic_match(frames, seed)
    t_gen = time.perf_counter() - t0
    digest = hashlib.sha256(header_text(config).encode())
    stages = {"generate_s": t_gen, "ingest_s": 0.0}

    frame_iter = estimate_velocities(match.records())

    def timed_frames():
        while True:
            t = time.perf_counter()
            frame = next(frame_iter, None)
            stages["ingest_s"] += time.perf_counter() - t
            if frame is None:
                return
            yield frame

    t1 = time.perf_counter()
    if config.workers <= 1:
        stages["compute_s"] = stages["serialize_s"] = 0.0
        for chunk in chunked(timed_frames(), chunk_size):
            t = time.perf_counter()
            entries = evaluate_chunk(chunk, config.params, config.modes, config.defending_sides)
            t2 = time.perf_counter()
            digest.update(encode_entries(chunk, entries, config.modes, config.defending_sides).encode())
            stages["compute_s"] += t2 - t
            stages["serialize_s"] += time.perf_counter() - t2
    else:
        from functools import partial
        fn = partial(encode_chunk, params=config.params, modes=config.modes, sides=config.defending_sides)
        for text in ordered_map(fn, chunked(timed_frames(), chunk_size), config.workers):
            digest.update(text.encode())
        stages["compute_serialize_s"] = time.perf_counter() - t1 - stages["ingest_s"]
    pipeline_s = time.perf_counter() - t1
    total = time.perf_counter() - t0
    return {
        "frames": frames,
        "seed": seed,
        "workers": config.workers,
        "synthetic_checksum": match.checksum(),
        "output_checksum": digest.hexdigest(),
        "fps": frames / pipeline_s if pipeline_s > 0 else float("inf"),
        "pipeline_s": pipeline_s,
        "total_s": total,
        "stages": stages,
    }


@_guarded
def cmd_bench(config: RunConfig, frames: int, seed: int) -> int:
    """Print one JSON object with throughput and per-stage timings."""
    report = run_bench(frames, seed, config.params, config.workers)
    click.echo(json.dumps(report, sort_keys=True))
    return EXIT_OK


@_guarded
def cmd_validate(config: RunConfig, limits: ValidationLimits = ValidationLimits()) -> int:
    """Report parse errors and plausibility warnings, one per line."""
    stats: dict = {}
    n_warn = 0
    with _open_input(config.input_path) as fin, _open_output(config.output_path) as fout:
        for frame in _frames(fin, config, stats):
            for w in validate_frame(frame, limits):
                fout.write(f"warning: {w}\n")
                n_warn += 1
        for exc in stats["parse_errors"]:
            fout.write(f"error: {exc}\n")
        for w in stats["warnings"]:
            fout.write(f"warning: {w}\n")
        n_warn += len(stats["warnings"])
        fout.write(f"{stats['frames']} frame(s), {len(stats['parse_errors'])} invalid line(s), "
                   f"{n_warn} warning(s)\n")
    if stats["frames"] == 0:
        click.echo(f"error: no frames in {config.input_path}", err=True)
        return EXIT_INVALID
    return EXIT_INVALID if stats["parse_errors"] else EXIT_OK


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def main(verbose: bool) -> None:
    """Pressing intensity from football tracking data."""
    logging.basicConfig(level=logging.INFO if verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")


@main.command()
@click.option("--mode", type=click.Choice(MODES), default="players", show_default=True)
@_run_options
@_model_options
def compute(mode, **kw):
    """Compute pressing matrices for every frame."""
    sys.exit(cmd_compute(_config(mode, kw)))


@main.command()
@_run_options
@_model_options
def passlanes(**kw):
    """Shorthand for ``compute --mode passlanes``."""
    sys.exit(cmd_compute(_config("passlanes", kw)))


@main.command()
@click.option("--target", required=True, help="Player id, BALL or CARRIER.")
@_run_options
@_model_options
def summary(target, **kw):
    """Pressure time series on one target as CSV."""
    sys.exit(cmd_summary(_config("players", kw), target))


@main.command()
@click.option("--frames", type=click.IntRange(min=1), default=15000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--workers", type=click.IntRange(min=0), default=1, show_default=True)
@_model_options
def bench(frames, seed, workers, **kw):
    """Benchmark the players pipeline on a synthetic match."""
    config = RunConfig(mode="players", params=_params(kw), parallelism=workers)
    sys.exit(cmd_bench(config, frames, seed))


@main.command()
@_run_options
@_model_options
def validate(**kw):
    """Check frames for parse errors, implausible speeds and out-of-bounds positions."""
    sys.exit(cmd_validate(_config("players", kw)))


if __name__ == "__main__":
    main()
