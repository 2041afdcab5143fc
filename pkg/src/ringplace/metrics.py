"""Placement quality metrics: wirelength, overlaps, segment crossings.

Wirelength is the sum over passives of the L1 distance from the placed
passive's center to the nearest pin of its net. Despite the Euclidean name
this is a Manhattan measure: each wire is scored by |dx| + |dy|, matching
how orthogonal traces are routed. Overlap and crossing counts are the
geometric sharpening of what otherwise gets judged by eye: rectangle pairs
with positive intersection area, and wire segments that touch anywhere
except a shared endpoint.
"""

from __future__ import annotations

from dataclasses import dataclass

from .board import Passive, PcbInstance, Pin, Placement


class IncompletePlacementError(ValueError):
    """Raised when a metric needs every passive placed."""


@dataclass(frozen=True)
class PerPassive:
    """One passive's placement and its wirelength contribution."""

    passive: str
    slot: int
    contribution: float


@dataclass(frozen=True)
class MetricsReport:
    tewl: float
    overlap_pairs: int
    crossing_count: int
    per_passive: tuple[PerPassive, ...]


def require_complete(instance: PcbInstance, placement: Placement) -> None:
    if not placement.complete:
        missing = [
            instance.passives[s].id
            for s in range(instance.num_passives)
            if s not in placement.assignment
        ]
        raise IncompletePlacementError(
            f"placement is missing passives: {', '.join(missing) or '(none)'}"
        )


def passive_center(passive: Passive, anchor: tuple[float, float]) -> tuple[float, float]:
    return (anchor[0] + passive.dims[0] / 2.0, anchor[1] + passive.dims[1] / 2.0)


def wire_contribution(instance: PcbInstance, passive_index: int, slot: int) -> float:
    """L1 distance from the placed center to the nearest same-net pin.

    Excluded-net passives have no target pin and contribute 0.
    """
    passive = instance.passives[passive_index]
    if passive.net in instance.excluded_nets:
        return 0.0
    cx, cy = passive_center(passive, instance.slots[slot].anchor)
    best = None
    for pin in instance.pins:
        if pin.net != passive.net:
            continue
        dist = abs(cx - pin.pos[0]) + abs(cy - pin.pos[1])
        if best is None or dist < best:
            best = dist
    return 0.0 if best is None else best


def nearest_pin(instance: PcbInstance, passive_index: int, slot: int) -> Pin | None:
    """The pin minimizing the passive's wire, ties to the lower pin index."""
    passive = instance.passives[passive_index]
    if passive.net in instance.excluded_nets:
        return None
    cx, cy = passive_center(passive, instance.slots[slot].anchor)
    best: Pin | None = None
    best_dist = 0.0
    for pin in instance.pins:
        if pin.net != passive.net:
            continue
        dist = abs(cx - pin.pos[0]) + abs(cy - pin.pos[1])
        if best is None or dist < best_dist:
            best, best_dist = pin, dist
    return best


def tewl(instance: PcbInstance, placement: Placement) -> float:
    """Total wirelength of a complete placement.

    Accumulates per-passive contributions in passive index order with plain
    float addition, so equal placements always reproduce the same bits.
    """
    require_complete(instance, placement)
    total = 0.0
    for s in range(instance.num_passives):
        total += wire_contribution(instance, s, placement.assignment[s])
    return total


def _rects_overlap(
    a0: tuple[float, float], ad: tuple[float, float],
    b0: tuple[float, float], bd: tuple[float, float],
) -> bool:
    # Strictly positive intersection area; edge contact does not count.
    return (
        a0[0] < b0[0] + bd[0]
        and b0[0] < a0[0] + ad[0]
        and a0[1] < b0[1] + bd[1]
        and b0[1] < a0[1] + ad[1]
    )


def count_overlaps(instance: PcbInstance, placement: Placement) -> int:
    """Unordered passive pairs whose placed rectangles overlap with area."""
    require_complete(instance, placement)
    rects = [
        (instance.slots[placement.assignment[s]].anchor, instance.passives[s].dims)
        for s in range(instance.num_passives)
    ]
    count = 0
    for i in range(len(rects)):
        for j in range(i + 1, len(rects)):
            if _rects_overlap(rects[i][0], rects[i][1], rects[j][0], rects[j][1]):
                count += 1
    return count


def _orient(p: tuple[float, float], q: tuple[float, float], r: tuple[float, float]) -> float:
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def _on_segment(p: tuple[float, float], q: tuple[float, float], r: tuple[float, float]) -> bool:
    # r is known collinear with p-q; is it within the bounding box?
    return (
        min(p[0], q[0]) <= r[0] <= max(p[0], q[0])
        and min(p[1], q[1]) <= r[1] <= max(p[1], q[1])
    )


def _segments_touch(a1, a2, b1, b2) -> bool:
    o1 = _orient(a1, a2, b1)
    o2 = _orient(a1, a2, b2)
    o3 = _orient(b1, b2, a1)
    o4 = _orient(b1, b2, a2)
    if ((o1 > 0) != (o2 > 0)) and ((o3 > 0) != (o4 > 0)) and 0 not in (o1, o2, o3, o4):
        return True
    if o1 == 0 and _on_segment(a1, a2, b1):
        return True
    if o2 == 0 and _on_segment(a1, a2, b2):
        return True
    if o3 == 0 and _on_segment(b1, b2, a1):
        return True
    if o4 == 0 and _on_segment(b1, b2, a2):
        return True
    return False


def _segments_cross(a1, a2, b1, b2) -> bool:
    """True if the segments share any point other than a common endpoint."""
    shared = [p for p in (a1, a2) if p in (b1, b2)]
    if shared:
        # Non-collinear segments with a shared endpoint meet only there.
        # Collinear ones conflict when they run back over each other.
        if len(shared) == 2:
            return a1 != a2
        s = shared[0]
        a_other = a2 if s == a1 else a1
        b_other = b2 if s == b1 else b1
        if _orient(s, a_other, b_other) != 0.0:
            return False
        dot = (a_other[0] - s[0]) * (b_other[0] - s[0]) + (
            a_other[1] - s[1]
        ) * (b_other[1] - s[1])
        return dot > 0.0
    return _segments_touch(a1, a2, b1, b2)


def wire_segments(
    instance: PcbInstance, placement: Placement
) -> list[tuple[tuple[float, float], tuple[float, float]]]:
    """Straight wire per passive: placed center to its nearest same-net pin."""
    require_complete(instance, placement)
    segments = []
    for s in range(instance.num_passives):
        pin = nearest_pin(instance, s, placement.assignment[s])
        if pin is None:
            continue
        center = passive_center(
            instance.passives[s], instance.slots[placement.assignment[s]].anchor
        )
        segments.append((center, pin.pos))
    return segments


def count_crossings(instance: PcbInstance, placement: Placement) -> int:
    """Unordered wire pairs in conflict (zero-length wires never conflict)."""
    segments = [s for s in wire_segments(instance, placement) if s[0] != s[1]]
    count = 0
    for i in range(len(segments)):
        for j in range(i + 1, len(segments)):
            if _segments_cross(*segments[i], *segments[j]):
                count += 1
    return count


def evaluate_placement(instance: PcbInstance, placement: Placement) -> MetricsReport:
    """All metrics for a complete placement in one report."""
    require_complete(instance, placement)
    per_passive = tuple(
        PerPassive(
            passive=instance.passives[s].id,
            slot=placement.assignment[s],
            contribution=wire_contribution(instance, s, placement.assignment[s]),
        )
        for s in range(instance.num_passives)
    )
    return MetricsReport(
        tewl=tewl(instance, placement),
        overlap_pairs=count_overlaps(instance, placement),
        crossing_count=count_crossings(instance, placement),
        per_passive=per_passive,
    )
