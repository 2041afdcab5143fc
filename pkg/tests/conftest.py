"""Shared builders for the test suite.

Most tests construct small instances in memory instead of reading files;
``make_instance`` wraps the dataclass plumbing so a test states only the
geometry it cares about. ``tiny_fixed_instance`` is the hand-sized problem
used by the optimality checks: its reward-maximal assignment is unique and
its wirelength optimum is known exactly.
"""

from __future__ import annotations

from typing import Sequence

from ringplace import (
    CandidateSlot,
    Passive,
    PcbInstance,
    Pin,
    Rect,
    build_net_index,
    validate_instance,
)

PinSpec = tuple[str, tuple[float, float], str]
PassiveSpec = tuple[str, tuple[float, float], str]

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(ok: bool, name: str, detail: str) -> None:
    """Collect one pass/fail line per acceptance check; echoed at the end
    of the run so the verdicts survive output capture."""
    line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config) -> None:
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance checks")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


def make_instance(
    *,
    name: str = "unit",
    footprint: Rect | None = None,
    pins: Sequence[PinSpec] = (),
    passives: Sequence[PassiveSpec] = (),
    slots: Sequence[tuple[float, float]] = (),
    excluded: Sequence[str] = (),
    gt_tewl: float | None = None,
    validate: bool = True,
) -> PcbInstance:
    """Build an instance from terse tuples; validation can be skipped to
    construct deliberately broken instances."""
    footprint = footprint or Rect(origin=(40.0, 40.0), width=20.0, height=20.0)
    pin_objs = tuple(Pin(id=pid, pos=pos, net=net) for pid, pos, net in pins)
    excluded_set = frozenset(excluded)
    instance = PcbInstance(
        name=name,
        main_footprint=footprint,
        pins=pin_objs,
        passives=tuple(
            Passive(id=pid, index=i, dims=dims, net=net)
            for i, (pid, dims, net) in enumerate(passives)
        ),
        slots=tuple(
            CandidateSlot(index=i, anchor=(float(x), float(y)))
            for i, (x, y) in enumerate(slots)
        ),
        excluded_nets=excluded_set,
        net_index=build_net_index(pin_objs, excluded_set),
        gt_tewl=gt_tewl,
    )
    return validate_instance(instance) if validate else instance


def tiny_fixed_instance() -> PcbInstance:
    """Three passives, five slots, one pin per net.

    With k=1 the proximity table is {C1: slot 1, C2: slot 3, C3: slot 4};
    all slot anchors are far enough apart that any injective assignment
    clears the margin, so the summed-reward maximum is uniquely (1, 3, 4).
    That assignment is also the exhaustive wirelength minimum, 53.0.
    """
    return make_instance(
        name="tiny-fixed",
        footprint=Rect(origin=(15.0, 8.0), width=10.0, height=8.0),
        pins=[
            ("PA", (15.0, 8.0), "NA"),
            ("PB", (25.0, 16.0), "NB"),
            ("PC", (15.0, 16.0), "NC"),
        ],
        passives=[
            ("C1", (2.0, 2.0), "NA"),
            ("C2", (2.0, 2.0), "NB"),
            ("C3", (2.0, 2.0), "NC"),
        ],
        slots=[(0.0, 0.0), (20.0, 0.0), (40.0, 0.0), (40.0, 20.0), (0.0, 20.0)],
    )
