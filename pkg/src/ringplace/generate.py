"""Synthetic instance generator.

Real boards from production designs are not redistributable, so tests and
experiments run on synthetic instances that reproduce their statistics:
passive count, net count, action count and the size-disparity ratio
(smallest dimension entry over largest, across all passives).

Slots are laid out on the lattice of a square ring centred on the main
footprint with pitch 1.1x the largest passive dimension. Any two lattice
points differ by at least one pitch along some axis, so every injective
assignment of passives to slots is overlap-free by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .board import (
    CandidateSlot,
    Passive,
    PcbInstance,
    Pin,
    Rect,
    build_net_index,
    validate_instance,
)

PITCH_FACTOR = 1.1


class GenerationInfeasibleError(ValueError):
    """Raised when no instance can satisfy the requested parameters."""


@dataclass(frozen=True)
class GeneratorSpec:
    """Shape parameters for one synthetic instance."""

    num_passives: int
    num_nets: int
    num_actions: int
    disparity: float


# Shapes of the in-house evaluation boards (passives, nets, actions,
# size-disparity ratio). The boards themselves are not available; these
# presets only reproduce their statistics.
PRESETS: dict[str, GeneratorSpec] = {
    "u4": GeneratorSpec(10, 7, 36, 0.292),
    "u3": GeneratorSpec(10, 7, 36, 0.292),
    "u25": GeneratorSpec(10, 7, 20, 0.292),
    "u47": GeneratorSpec(9, 7, 24, 0.769),
    "u24": GeneratorSpec(8, 4, 20, 0.033),
    "u115": GeneratorSpec(11, 5, 42, 0.044),
    "vr3": GeneratorSpec(13, 8, 24, 0.085),
    "u20": GeneratorSpec(23, 14, 36, 0.085),
    "u26": GeneratorSpec(24, 13, 48, 0.237),
}


def _ring_anchors(center: tuple[float, float], num_actions: int, pitch: float) -> list[tuple[float, float]]:
    """Slot anchors on the lattice of a square ring around the center.

    Sides carry near-equal point counts; every anchor sits on a grid with
    spacing ``pitch``, which is what guarantees pairwise separation.
    """
    per_side = math.ceil(num_actions / 4)
    side = per_side * pitch
    x0 = center[0] - side / 2.0
    y0 = center[1] - side / 2.0

    counts = [num_actions // 4] * 4
    for i in range(num_actions % 4):
        counts[i] += 1

    # Walk counterclockwise: bottom, right, top, left. Each side owns its
    # starting corner so no lattice point repeats.
    anchors: list[tuple[float, float]] = []
    for j in range(counts[0]):
        anchors.append((x0 + j * pitch, y0))
    for j in range(counts[1]):
        anchors.append((x0 + side, y0 + j * pitch))
    for j in range(counts[2]):
        anchors.append((x0 + side - j * pitch, y0 + side))
    for j in range(counts[3]):
        anchors.append((x0, y0 + side - j * pitch))
    return anchors


def _border_point(rect: Rect, arc: float) -> tuple[float, float]:
    """Point at the given arc length along the rectangle border (ccw)."""
    x0, y0 = rect.origin
    w, h = rect.width, rect.height
    arc = arc % (2 * (w + h))
    if arc < w:
        return (x0 + arc, y0)
    arc -= w
    if arc < h:
        return (x0 + w, y0 + arc)
    arc -= h
    if arc < w:
        return (x0 + w - arc, y0 + h)
    arc -= w
    return (x0, y0 + h - arc)


def generate_synthetic(
    name: str,
    num_passives: int,
    num_nets: int,
    num_actions: int,
    board_size: float = 100.0,
    disparity: float = 1.0,
    seed: int = 0,
    max_dim: float | None = None,
) -> PcbInstance:
    """Generate a feasible instance with the requested statistics.

    The generated instance is deterministic for a fixed seed. Every net has
    one pin on the footprint border and at least one passive; passive
    dimension entries span exactly [disparity * max_dim, max_dim].

    Raises :class:`GenerationInfeasibleError` when the parameters are
    inconsistent or the ring cannot fit on the board.
    """
    if num_passives < 1:
        raise GenerationInfeasibleError("need at least one passive")
    if num_actions < num_passives:
        raise GenerationInfeasibleError(
            f"need num_actions >= num_passives, got {num_actions} < {num_passives}"
        )
    if not 1 <= num_nets <= num_passives:
        raise GenerationInfeasibleError(
            f"need 1 <= num_nets <= num_passives, got {num_nets}"
        )
    if not 0.0 < disparity <= 1.0:
        raise GenerationInfeasibleError(
            f"disparity ratio must be in (0, 1], got {disparity}"
        )
    if board_size <= 0:
        raise GenerationInfeasibleError("board size must be positive")

    per_side = math.ceil(num_actions / 4)
    # Ring side plus one passive extent per board edge must fit:
    # per_side * PITCH_FACTOR * max_dim + 2 * max_dim <= board_size.
    limit = board_size / (per_side * PITCH_FACTOR + 2.0)
    if max_dim is None:
        max_dim = 0.95 * limit
    elif max_dim <= 0:
        raise GenerationInfeasibleError("max passive dimension must be positive")
    elif max_dim > limit:
        raise GenerationInfeasibleError(
            f"slot pitch constraint unsatisfiable: max dimension {max_dim:g} "
            f"needs a board larger than {board_size:g} "
            f"(limit {limit:g} for {num_actions} actions)"
        )

    rng = np.random.default_rng(seed)
    center = (board_size / 2.0, board_size / 2.0)
    pitch = PITCH_FACTOR * max_dim
    ring_side = per_side * pitch

    # Main footprint: a square inside the ring, shrunk when the ring is
    # tight so slot anchors always stay off it.
    half = ring_side / 4.0
    if half + max_dim > ring_side / 2.0:
        half = ring_side / 8.0
    footprint = Rect(
        origin=(center[0] - half, center[1] - half),
        width=2.0 * half,
        height=2.0 * half,
    )

    net_names = [f"N{i + 1}" for i in range(num_nets)]
    perimeter = 2.0 * (footprint.width + footprint.height)
    pins = tuple(
        Pin(
            id=f"PIN{i + 1}",
            pos=_border_point(footprint, (i + 0.5) / num_nets * perimeter),
            net=net_names[i],
        )
        for i in range(num_nets)
    )

    # First num_nets passives cover every net once; the rest draw randomly.
    net_choice = list(range(num_nets))
    net_choice += [int(v) for v in rng.integers(0, num_nets, size=num_passives - num_nets)]

    raw = rng.uniform(0.0, 1.0, size=(num_passives, 2))
    spread = raw.max() - raw.min()
    if spread > 0.0:
        raw = (raw - raw.min()) / spread
    lo = disparity * max_dim
    dims = lo + (max_dim - lo) * raw

    passives = tuple(
        Passive(
            id=f"P{i + 1}",
            index=i,
            dims=(float(dims[i, 0]), float(dims[i, 1])),
            net=net_names[net_choice[i]],
        )
        for i in range(num_passives)
    )

    slots = tuple(
        CandidateSlot(index=i, anchor=anchor)
        for i, anchor in enumerate(_ring_anchors(center, num_actions, pitch))
    )

    instance = PcbInstance(
        name=name,
        main_footprint=footprint,
        pins=pins,
        passives=passives,
        slots=slots,
        excluded_nets=frozenset(),
        net_index=build_net_index(pins, frozenset()),
    )
    return validate_instance(instance)


def generate_preset(preset: str, name: str | None = None, seed: int = 0,
                    board_size: float = 100.0) -> PcbInstance:
    """Generate an instance shaped like one of the evaluation boards."""
    key = preset.lower()
    if key not in PRESETS:
        raise GenerationInfeasibleError(
            f"unknown preset {preset!r}; choose from {', '.join(sorted(PRESETS))}"
        )
    spec = PRESETS[key]
    return generate_synthetic(
        name=name or key,
        num_passives=spec.num_passives,
        num_nets=spec.num_nets,
        num_actions=spec.num_actions,
        board_size=board_size,
        disparity=spec.disparity,
        seed=seed,
    )
