"""Space-time diagrams: one wire per qubit, one box per action over its interval.

Actions that overlap in time on the same qubit (measurement siblings, or
clashing actions of different processes) are stacked in separate lanes.
"""

from __future__ import annotations

from fractions import Fraction
from xml.sax.saxutils import escape

from .model import Action, System


def _lanes(s: System) -> dict[str, list[list[Action]]]:
    """Greedy lane assignment per qubit, earliest start first."""
    out: dict[str, list[list[Action]]] = {q: [] for q in s.qubits}
    for q in s.qubits:
        acts = sorted((a for a in s if q in a.qubits), key=lambda a: (a.interval.lo, a.interval.hi, a.id))
        for a in acts:
            for lane in out[q]:
                if lane[-1].interval.hi < a.interval.lo:
                    lane.append(a)
                    break
            else:
                out[q].append([a])
        if not out[q]:
            out[q].append([])
    return out


def _horizon(s: System) -> Fraction:
    return max([a.interval.hi for a in s] + [Fraction(1)])


def ascii_diagram(s: System, width: int = 72) -> str:
    horizon = _horizon(s)
    label_w = max(len(q) for q in s.qubits) + 2
    cols = width - label_w

    def col(t: Fraction) -> int:
        return min(cols - 1, int(t * (cols - 1) / horizon))

    lines = []
    for q, lanes in _lanes(s).items():
        for n, lane in enumerate(lanes):
            row = ["-"] * cols
            for a in lane:
                lo, hi = col(a.interval.lo), col(a.interval.hi)
                hi = max(hi, lo + len(a.id) + 1)
                body = f"[{a.id}"
                for k in range(lo, min(hi, cols)):
                    row[k] = "="
                for k, ch in enumerate(body):
                    if lo + k < cols:
                        row[lo + k] = ch
                if hi < cols:
                    row[hi] = "]"
            name = q if n == 0 else " " * (len(q) - 1) + "\\"
            lines.append(name.ljust(label_w) + "".join(row))
    scale = " " * label_w + "0".ljust(cols - len(str(horizon))) + str(horizon)
    lines.append(scale)
    return "\n".join(lines) + "\n"


def svg_diagram(s: System, px_per_unit: float | None = None) -> str:
    horizon = _horizon(s)
    width = 720.0
    unit = px_per_unit or (width - 80) / float(horizon)
    lane_h, margin = 34, 60
    rows = []
    y = 20
    for q, lanes in _lanes(s).items():
        for n, lane in enumerate(lanes):
            rows.append((q if n == 0 else "", y, lane))
            y += lane_h
        y += 8
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{y + 20}" font-family="monospace" font-size="11">'
    ]
    for label, yy, lane in rows:
        mid = yy + lane_h / 2
        parts.append(f'<text x="4" y="{mid + 4:.1f}">{escape(label)}</text>')
        parts.append(f'<line x1="{margin}" y1="{mid:.1f}" x2="{width - 10:.0f}" y2="{mid:.1f}" stroke="black"/>')
        for a in lane:
            x0 = margin + float(a.interval.lo) * unit
            w = max(4.0, float(a.interval.length) * unit)
            parts.append(
                f'<rect x="{x0:.1f}" y="{yy + 4}" width="{w:.1f}" height="{lane_h - 8}" '
                f'fill="white" stroke="black"><title>{escape(a.id)} {a.interval}</title></rect>'
            )
            parts.append(f'<text x="{x0 + 3:.1f}" y="{mid + 4:.1f}">{escape(a.id)}</text>')
    parts.append(f'<text x="{margin}" y="{y + 10}">0</text>')
    parts.append(f'<text x="{width - 40:.0f}" y="{y + 10}">{horizon}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
