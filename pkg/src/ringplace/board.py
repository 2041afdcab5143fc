"""Board data model: instances, slots, placements, and state tokens.

An instance describes one placement problem: a fixed main component (an
axis-aligned rectangle with named pins on its footprint), a set of passive
components that each belong to one net, and a ring of discrete candidate
slots around the footprint. Placing a passive means assigning it to a slot;
the slot anchor is the lower-left corner of the passive's rectangle.

Instances are stored as JSON text (conventionally ``*.pcb``) with top-level
keys ``name``, ``main`` (``origin``, ``width``, ``height``, ``pins``),
``passives``, ``slots`` and ``excluded_nets``; all coordinates are
millimetres. ``gt_tewl`` is optional metadata carrying the wirelength of a
known reference layout. Placements serialize to JSON with keys ``instance``,
``assignments``, ``tewl`` and ``overlaps`` (conventionally ``*.place``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

PASSIVE_MODE = "passive"
PASSIVE_NET_MODE = "passive+net"
ENCODING_MODES = (PASSIVE_MODE, PASSIVE_NET_MODE)


class InstanceFormatError(ValueError):
    """Raised when an instance or placement file cannot be parsed."""


class ValidationError(ValueError):
    """Raised when parsed data violates a model invariant."""


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle given by lower-left origin, width and height."""

    origin: tuple[float, float]
    width: float
    height: float

    def contains(self, point: tuple[float, float]) -> bool:
        """True if the point lies on the boundary or in the interior."""
        x, y = point
        x0, y0 = self.origin
        return x0 <= x <= x0 + self.width and y0 <= y <= y0 + self.height


@dataclass(frozen=True)
class Pin:
    """A named pin on the main component footprint."""

    id: str
    pos: tuple[float, float]
    net: str


@dataclass(frozen=True)
class Passive:
    """A passive component awaiting placement."""

    id: str
    index: int
    dims: tuple[float, float]
    net: str


@dataclass(frozen=True)
class CandidateSlot:
    """A discrete placement location; the anchor is a lower-left corner."""

    index: int
    anchor: tuple[float, float]


@dataclass(frozen=True)
class PcbInstance:
    """One placement problem, immutable after construction."""

    name: str
    main_footprint: Rect
    pins: tuple[Pin, ...]
    passives: tuple[Passive, ...]
    slots: tuple[CandidateSlot, ...]
    excluded_nets: frozenset[str] = frozenset()
    net_index: Mapping[str, int] = field(default_factory=dict)
    gt_tewl: float | None = None

    @property
    def num_passives(self) -> int:
        return len(self.passives)

    @property
    def num_actions(self) -> int:
        return len(self.slots)

    @property
    def num_nets(self) -> int:
        return len(self.net_index)

    def pins_on_net(self, net: str) -> tuple[Pin, ...]:
        return tuple(p for p in self.pins if p.net == net)


@dataclass(frozen=True)
class StateToken:
    """Binary input vector identifying the passive (and optionally its net)."""

    bits: np.ndarray
    mode: str

    def __post_init__(self) -> None:
        self.bits.setflags(write=False)


@dataclass
class Placement:
    """Assignment of passive indices to slot indices."""

    assignment: dict[int, int]
    complete: bool

    @classmethod
    def from_mapping(cls, instance: PcbInstance, mapping: Mapping[int, int]) -> "Placement":
        assignment = dict(mapping)
        complete = len(assignment) == instance.num_passives and all(
            s in assignment for s in range(instance.num_passives)
        )
        return cls(assignment=assignment, complete=complete)

    def is_injective(self) -> bool:
        slots = list(self.assignment.values())
        return len(slots) == len(set(slots))


def build_net_index(
    pins: Iterable[Pin], excluded_nets: frozenset[str]
) -> dict[str, int]:
    """Index non-excluded netnames by first appearance in the pin list."""
    index: dict[str, int] = {}
    for pin in pins:
        if pin.net in excluded_nets or pin.net in index:
            continue
        index[pin.net] = len(index)
    return index


def validate_instance(instance: PcbInstance) -> PcbInstance:
    """Check all model invariants, returning the instance unchanged.

    Raises :class:`ValidationError` naming the violated invariant.
    """
    fp = instance.main_footprint
    if fp.width <= 0 or fp.height <= 0:
        raise ValidationError("main footprint must have positive width and height")
    if instance.num_passives < 1:
        raise ValidationError("instance must contain at least one passive")
    if instance.num_actions < instance.num_passives:
        raise ValidationError(
            f"need at least as many slots as passives: "
            f"{instance.num_actions} slots < {instance.num_passives} passives"
        )

    for pin in instance.pins:
        if not pin.net:
            raise ValidationError(f"pin {pin.id!r} has an empty netname")
        if not fp.contains(pin.pos):
            raise ValidationError(
                f"pin {pin.id!r} at {pin.pos} lies outside the main footprint"
            )

    seen_ids: set[str] = set()
    for passive in instance.passives:
        if passive.dims[0] <= 0 or passive.dims[1] <= 0:
            raise ValidationError(
                f"passive {passive.id!r} has non-positive dims {passive.dims}"
            )
        if passive.id in seen_ids:
            raise ValidationError(f"duplicate passive id {passive.id!r}")
        seen_ids.add(passive.id)
        if passive.net in instance.excluded_nets:
            continue
        if not any(pin.net == passive.net for pin in instance.pins):
            raise ValidationError(
                f"passive {passive.id!r} is on net {passive.net!r} which has no "
                f"pin and is not excluded"
            )

    indices = [p.index for p in instance.passives]
    if sorted(indices) != list(range(instance.num_passives)):
        raise ValidationError("passive indices must be unique and contiguous from 0")

    seen_anchors: dict[tuple[float, float], int] = {}
    for slot in instance.slots:
        if slot.anchor in seen_anchors:
            raise ValidationError(
                f"duplicate slot anchors: slots {seen_anchors[slot.anchor]} and "
                f"{slot.index} share anchor {slot.anchor}"
            )
        seen_anchors[slot.anchor] = slot.index
        if fp.contains(slot.anchor):
            raise ValidationError(
                f"slot {slot.index} anchor {slot.anchor} lies on the main footprint"
            )

    expected = build_net_index(instance.pins, instance.excluded_nets)
    if dict(instance.net_index) != expected:
        raise ValidationError(
            "net_index must cover non-excluded pin nets in first-appearance order"
        )
    return instance


def slot_anchor(instance: PcbInstance, action: int) -> tuple[float, float]:
    """Anchor coordinates of the slot selected by an action index."""
    if not 0 <= action < instance.num_actions:
        raise IndexError(
            f"action {action} out of range [0, {instance.num_actions})"
        )
    return instance.slots[action].anchor


def state_dim(instance: PcbInstance, mode: str) -> int:
    """Length of the state token for the given encoding mode."""
    if mode == PASSIVE_MODE:
        return instance.num_passives
    if mode == PASSIVE_NET_MODE:
        return instance.num_passives + instance.num_nets
    raise ValueError(f"unknown encoding mode {mode!r}")


def encode_state(instance: PcbInstance, passive_index: int, mode: str) -> StateToken:
    """One-hot token for a passive, optionally concatenated with its net bit.

    Passives on excluded nets have no net index; in passive+net mode their
    net segment stays all-zero.
    """
    if not 0 <= passive_index < instance.num_passives:
        raise IndexError(
            f"passive index {passive_index} out of range [0, {instance.num_passives})"
        )
    bits = np.zeros(state_dim(instance, mode), dtype=np.float64)
    bits[passive_index] = 1.0
    if mode == PASSIVE_NET_MODE:
        net = instance.passives[passive_index].net
        net_pos = instance.net_index.get(net)
        if net_pos is not None:
            bits[instance.num_passives + net_pos] = 1.0
    return StateToken(bits=bits, mode=mode)


# ---------------------------------------------------------------------------
# Instance file I/O
# ---------------------------------------------------------------------------


def _expect(obj, key: str, kind: type, where: str):
    if not isinstance(obj, dict) or key not in obj:
        raise InstanceFormatError(f"{where}: missing field {key!r}")
    value = obj[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or isinstance(value, bool):
        raise InstanceFormatError(
            f"{where}.{key}: expected {kind.__name__}, got {type(value).__name__}"
        )
    return value


def _expect_point(obj, key: str, where: str) -> tuple[float, float]:
    raw = _expect(obj, key, list, where)
    if len(raw) != 2 or not all(isinstance(v, (int, float)) for v in raw):
        raise InstanceFormatError(f"{where}.{key}: expected [x, y] numbers")
    return (float(raw[0]), float(raw[1]))


def instance_from_dict(data: dict, where: str = "instance") -> PcbInstance:
    """Build and validate a :class:`PcbInstance` from parsed JSON data."""
    name = _expect(data, "name", str, where)
    main = _expect(data, "main", dict, where)
    footprint = Rect(
        origin=_expect_point(main, "origin", f"{where}.main"),
        width=_expect(main, "width", float, f"{where}.main"),
        height=_expect(main, "height", float, f"{where}.main"),
    )

    pins = []
    for i, raw in enumerate(_expect(main, "pins", list, f"{where}.main")):
        ctx = f"{where}.main.pins[{i}]"
        pins.append(
            Pin(
                id=_expect(raw, "id", str, ctx),
                pos=_expect_point(raw, "pos", ctx),
                net=_expect(raw, "net", str, ctx),
            )
        )

    passives = []
    for i, raw in enumerate(_expect(data, "passives", list, where)):
        ctx = f"{where}.passives[{i}]"
        passives.append(
            Passive(
                id=_expect(raw, "id", str, ctx),
                index=i,
                dims=_expect_point(raw, "dims", ctx),
                net=_expect(raw, "net", str, ctx),
            )
        )

    slots = []
    for i, raw in enumerate(_expect(data, "slots", list, where)):
        if not isinstance(raw, list) or len(raw) != 2:
            raise InstanceFormatError(f"{where}.slots[{i}]: expected [x, y]")
        slots.append(CandidateSlot(index=i, anchor=(float(raw[0]), float(raw[1]))))

    excluded = frozenset(data.get("excluded_nets") or [])
    gt_tewl = data.get("gt_tewl")
    if gt_tewl is not None and not isinstance(gt_tewl, (int, float)):
        raise InstanceFormatError(f"{where}.gt_tewl: expected number or null")

    instance = PcbInstance(
        name=name,
        main_footprint=footprint,
        pins=tuple(pins),
        passives=tuple(passives),
        slots=tuple(slots),
        excluded_nets=excluded,
        net_index=build_net_index(pins, excluded),
        gt_tewl=None if gt_tewl is None else float(gt_tewl),
    )
    return validate_instance(instance)


def instance_to_dict(instance: PcbInstance) -> dict:
    fp = instance.main_footprint
    data: dict = {
        "name": instance.name,
        "main": {
            "origin": list(fp.origin),
            "width": fp.width,
            "height": fp.height,
            "pins": [
                {"id": p.id, "pos": list(p.pos), "net": p.net} for p in instance.pins
            ],
        },
        "passives": [
            {"id": p.id, "dims": list(p.dims), "net": p.net}
            for p in instance.passives
        ],
        "slots": [list(s.anchor) for s in instance.slots],
        "excluded_nets": sorted(instance.excluded_nets),
    }
    if instance.gt_tewl is not None:
        data["gt_tewl"] = instance.gt_tewl
    return data


def loads_instance(text: str, where: str = "instance") -> PcbInstance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(
            f"{where}: line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return instance_from_dict(data, where)


def load_instance(path: str | Path) -> PcbInstance:
    """Read, parse and validate an instance file."""
    path = Path(path)
    return loads_instance(path.read_text(encoding="utf-8"), where=str(path))


def save_instance(instance: PcbInstance, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(instance_to_dict(instance), indent=2) + "\n", encoding="utf-8"
    )


# ---------------------------------------------------------------------------
# Placement file I/O
# ---------------------------------------------------------------------------


def save_placement(
    instance: PcbInstance,
    placement: Placement,
    path: str | Path,
    tewl: float | None = None,
    overlaps: int | None = None,
) -> None:
    data = {
        "instance": instance.name,
        "assignments": [
            {"passive": instance.passives[s].id, "slot": a}
            for s, a in sorted(placement.assignment.items())
        ],
        "tewl": tewl,
        "overlaps": overlaps,
    }
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


def load_placement(instance: PcbInstance, path: str | Path) -> Placement:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(
            f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc

    by_id = {p.id: p.index for p in instance.passives}
    mapping: dict[int, int] = {}
    for i, raw in enumerate(_expect(data, "assignments", list, str(path))):
        ctx = f"{path}.assignments[{i}]"
        pid = _expect(raw, "passive", str, ctx)
        slot = _expect(raw, "slot", int, ctx)
        if pid not in by_id:
            raise ValidationError(f"{ctx}: unknown passive id {pid!r}")
        if not 0 <= slot < instance.num_actions:
            raise ValidationError(f"{ctx}: slot {slot} out of range")
        if by_id[pid] in mapping:
            raise ValidationError(f"{ctx}: passive {pid!r} assigned twice")
        mapping[by_id[pid]] = slot
    return Placement.from_mapping(instance, mapping)
