"""Deterministic SVG drawings of instances and placements.

Output is plain SVG 1.1 text with every coordinate printed at fixed
precision, so identical inputs render byte-identical files and drawings can
be golden-tested. Board y grows upward; SVG y grows downward; the renderer
flips accordingly.
"""

from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import escape

from .board import PcbInstance, Placement
from .metrics import nearest_pin, passive_center, require_complete

MARGIN = 3.0


@dataclass(frozen=True)
class RenderStyle:
    scale: float = 8.0
    color_main: str = "#9aa7b5"
    color_passive: str = "#e8a33d"
    color_slot: str = "#5b7fa6"
    color_segment: str = "#b03a48"
    labels: bool = True
    slot_size: float = 1.0

    def __post_init__(self) -> None:
        if self.scale <= 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        if self.slot_size <= 0:
            raise ValueError(f"slot size must be positive, got {self.slot_size}")


def _bounds(instance: PcbInstance) -> tuple[float, float, float, float]:
    fp = instance.main_footprint
    xs = [fp.origin[0], fp.origin[0] + fp.width]
    ys = [fp.origin[1], fp.origin[1] + fp.height]
    reach = max(max(p.dims) for p in instance.passives)
    for slot in instance.slots:
        xs += [slot.anchor[0], slot.anchor[0] + reach]
        ys += [slot.anchor[1], slot.anchor[1] + reach]
    for pin in instance.pins:
        xs.append(pin.pos[0])
        ys.append(pin.pos[1])
    return min(xs), min(ys), max(xs), max(ys)


def render_svg(
    instance: PcbInstance,
    placement: Placement | None = None,
    style: RenderStyle | None = None,
) -> str:
    """Draw footprint, slots, pins, and (if given) placed passives + wires."""
    style = style or RenderStyle()
    if placement is not None:
        require_complete(instance, placement)

    xmin, ymin, xmax, ymax = _bounds(instance)
    sc = style.scale

    def px(x: float) -> str:
        return f"{(x - xmin + MARGIN) * sc:.3f}"

    def py(y: float) -> str:
        return f"{(ymax + MARGIN - y) * sc:.3f}"

    width = (xmax - xmin + 2 * MARGIN) * sc
    height = (ymax - ymin + 2 * MARGIN) * sc
    font = max(sc * 0.9, 6.0)

    out: list[str] = []
    out.append(
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width:.3f}" height="{height:.3f}" '
        f'viewBox="0 0 {width:.3f} {height:.3f}">'
    )
    out.append(f'<rect width="{width:.3f}" height="{height:.3f}" fill="#ffffff"/>')

    fp = instance.main_footprint
    out.append(
        f'<rect x="{px(fp.origin[0])}" y="{py(fp.origin[1] + fp.height)}" '
        f'width="{fp.width * sc:.3f}" height="{fp.height * sc:.3f}" '
        f'fill="{style.color_main}" stroke="#33404d" stroke-width="1"/>'
    )

    half = style.slot_size / 2.0
    for slot in instance.slots:
        x, y = slot.anchor
        out.append(
            f'<rect x="{px(x - half)}" y="{py(y + half)}" '
            f'width="{style.slot_size * sc:.3f}" height="{style.slot_size * sc:.3f}" '
            f'fill="none" stroke="{style.color_slot}" stroke-width="0.75"/>'
        )

    if placement is not None:
        for s in range(instance.num_passives):
            pin = nearest_pin(instance, s, placement.assignment[s])
            if pin is None:
                continue
            cx, cy = passive_center(
                instance.passives[s],
                instance.slots[placement.assignment[s]].anchor,
            )
            out.append(
                f'<line x1="{px(cx)}" y1="{py(cy)}" '
                f'x2="{px(pin.pos[0])}" y2="{py(pin.pos[1])}" '
                f'stroke="{style.color_segment}" stroke-width="1"/>'
            )
        for s in range(instance.num_passives):
            passive = instance.passives[s]
            ax, ay = instance.slots[placement.assignment[s]].anchor
            out.append(
                f'<rect x="{px(ax)}" y="{py(ay + passive.dims[1])}" '
                f'width="{passive.dims[0] * sc:.3f}" '
                f'height="{passive.dims[1] * sc:.3f}" '
                f'fill="{style.color_passive}" fill-opacity="0.85" '
                f'stroke="#7a5417" stroke-width="0.75"/>'
            )
            if style.labels:
                cx, cy = passive_center(passive, (ax, ay))
                out.append(
                    f'<text x="{px(cx)}" y="{py(cy)}" font-size="{font:.3f}" '
                    f'text-anchor="middle" dominant-baseline="middle" '
                    f'fill="#222222">{escape(passive.id)}</text>'
                )

    for pin in instance.pins:
        out.append(
            f'<circle cx="{px(pin.pos[0])}" cy="{py(pin.pos[1])}" '
            f'r="{0.4 * sc:.3f}" fill="#2d6a4f"/>'
        )
        if style.labels:
            out.append(
                f'<text x="{px(pin.pos[0])}" y="{py(pin.pos[1] + 0.8)}" '
                f'font-size="{font:.3f}" text-anchor="middle" '
                f'fill="#2d6a4f">{escape(pin.net)}</text>'
            )

    out.append("</svg>")
    return "\n".join(out) + "\n"
