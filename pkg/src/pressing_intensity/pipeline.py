"""Frame-parallel evaluation with ordered output.

Frames are cut into fixed-size chunks in stream order. Each chunk is
evaluated and encoded independently, so output bytes do not depend on the
worker count; results are merged back in submission order while at most a
few chunks per worker are in flight.
"""

from __future__ import annotations

import itertools
import os
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Iterable, Iterator, Optional, Sequence, TypeVar

from . import __version__
from .core import EmptyTeamError, FrameSnapshot, ModelParams, PressingResult, other_side
from .passlanes import passlane_pressing_matrices
from .pressure import pressing_matrices
from .serialization import (
    CSV_HEADER,
    error_to_csv,
    error_to_jsonl,
    manifest_line,
    result_to_csv,
    result_to_jsonl,
)

T = TypeVar("T")
R = TypeVar("R")

CHUNK_SIZE = 256
MODES = ("players", "passlanes", "both")
SIDE_CHOICES = ("home", "away", "both")
FORMATS = ("jsonl", "csv")


@dataclass(frozen=True)
class RunConfig:
    input_path: Optional[str] = None
    output_path: Optional[str] = None
    mode: str = "players"
    params: ModelParams = field(default_factory=ModelParams)
    sides: str = "both"
    parallelism: int = 1
    strict: bool = False
    output_format: str = "jsonl"
    smoothing_window: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.sides not in SIDE_CHOICES:
            raise ValueError(f"sides must be one of {SIDE_CHOICES}, got {self.sides!r}")
        if self.output_format not in FORMATS:
            raise ValueError(f"output_format must be one of {FORMATS}, got {self.output_format!r}")
        if self.parallelism < 0:
            raise ValueError("parallelism must be >= 0")

    @property
    def modes(self) -> tuple[str, ...]:
        return ("players", "passlanes") if self.mode == "both" else (self.mode,)

    @property
    def defending_sides(self) -> tuple[str, ...]:
        return ("home", "away") if self.sides == "both" else (self.sides,)

    @property
    def workers(self) -> int:
        return self.parallelism or os.cpu_count() or 1

    def manifest(self) -> dict:
        # Paths and worker count are left out so output bytes depend only on the model inputs.
        return {
            "tool": "pressing_intensity",
            "version": __version__,
            "params": self.params.as_dict(),
            "mode": self.mode,
            "sides": self.sides,
            "smoothing_window": self.smoothing_window,
            "format": self.output_format,
            "strict": self.strict,
        }


def chunked(items: Iterable[T], size: int) -> Iterator[list[T]]:
    it = iter(items)
    while chunk := list(itertools.islice(it, size)):
        yield chunk


def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: int = 1,
                max_pending: Optional[int] = None) -> Iterator[R]:
    """``map`` over a process pool that yields in input order with bounded look-ahead."""
    if workers <= 1:
        yield from map(fn, items)
        return
    max_pending = max_pending or 2 * workers
    with ProcessPoolExecutor(max_workers=workers) as pool:
        pending: deque = deque()
        for item in items:
            pending.append(pool.submit(fn, item))
            if len(pending) >= max_pending:
                yield pending.popleft().result()
        while pending:
            yield pending.popleft().result()


def evaluate_chunk(frames: Sequence[FrameSnapshot], params: ModelParams, modes: Sequence[str],
                   sides: Sequence[str], strict: bool = False) -> list:
    """Results for every (frame, mode, side), frame-major.

    Entries are :class:`PressingResult` or, for frames that cannot be
    evaluated in non-strict mode, the :class:`EmptyTeamError` raised.
    """
    table: dict[tuple[str, str], list] = {}
    for mode in modes:
        compute = pressing_matrices if mode == "players" else passlane_pressing_matrices
        for side in sides:
            ok, bad = [], {}
            for k, frame in enumerate(frames):
                if frame.team(side) and frame.team(other_side(side)):
                    ok.append(k)
                else:
                    err = EmptyTeamError(f"a team is empty when {side} defends", frame.frame_id)
                    if strict:
                        raise err
                    bad[k] = err
            computed = iter(compute([frames[k] for k in ok], side, params))
            table[mode, side] = [bad[k] if k in bad else next(computed) for k in range(len(frames))]
    return [table[mode, side][k] for k in range(len(frames)) for mode in modes for side in sides]


def encode_entries(frames: Sequence[FrameSnapshot], entries: Sequence, modes: Sequence[str],
                   sides: Sequence[str], output_format: str = "jsonl") -> str:
    out = []
    keys = [(f, m, s) for f in frames for m in modes for s in sides]
    for (frame, mode, side), entry in zip(keys, entries):
        if isinstance(entry, PressingResult):
            out.append(result_to_jsonl(entry) + "\n" if output_format == "jsonl" else result_to_csv(entry))
        elif output_format == "jsonl":
            out.append(error_to_jsonl(frame.frame_id, frame.timestamp_s, side, mode, str(entry)) + "\n")
        else:
            out.append(error_to_csv(frame.frame_id, frame.timestamp_s, side, mode, str(entry)))
    return "".join(out)


def encode_chunk(frames: Sequence[FrameSnapshot], params: ModelParams, modes: Sequence[str],
                 sides: Sequence[str], strict: bool = False, output_format: str = "jsonl") -> str:
    entries = evaluate_chunk(frames, params, modes, sides, strict)
    return encode_entries(frames, entries, modes, sides, output_format)


def header_text(config: RunConfig) -> str:
    line = manifest_line(config.manifest())
    if config.output_format == "csv":
        return "# " + line + "\n" + CSV_HEADER + "\n"
    return line + "\n"


def encode_stream(frames: Iterable[FrameSnapshot], config: RunConfig,
                  chunk_size: int = CHUNK_SIZE) -> Iterator[str]:
    """Header followed by encoded chunks, in frame order."""
    yield header_text(config)
    fn = partial(encode_chunk, params=config.params, modes=config.modes,
                 sides=config.defending_sides, strict=config.strict,
                 output_format=config.output_format)
    yield from ordered_map(fn, chunked(frames, chunk_size), config.workers)


def compute_results(frames: Iterable[FrameSnapshot], config: RunConfig,
                    chunk_size: int = CHUNK_SIZE) -> Iterator:
    """Like :func:`encode_stream` but yields the unencoded per-chunk entries."""
    fn = partial(evaluate_chunk, params=config.params, modes=config.modes,
                 sides=config.defending_sides, strict=config.strict)
    for entries in ordered_map(fn, chunked(frames, chunk_size), config.workers):
        yield from entries
