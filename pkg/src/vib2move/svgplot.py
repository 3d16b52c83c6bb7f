"""Minimal static SVG emitter for trajectory and metrics figures.

The figures are post-hoc displays, so a small hand-rolled writer beats a
plotting dependency; output is deterministic byte-for-byte for identical
inputs (fixed float formatting, insertion-ordered elements).
"""

from __future__ import annotations

import math
from pathlib import Path

STAGE_COLORS = {0: "#cccccc", 1: "#cfe8ff", 2: "#d7f4d7", 3: "#ffd9e6"}
CLASS_COLORS = {"near_rotational": "#e75480", "translational": "#3aa0c9"}


def _f(v: float) -> str:
    return f"{v:.3f}"


class SvgCanvas:
    """Fixed-size canvas with a data-space to pixel-space mapping (y up)."""

    def __init__(self, width=640, height=480, margin=48):
        self.width = width
        self.height = height
        self.margin = margin
        self.elements: list[str] = []
        self._bounds = None

    def set_bounds(self, xmin, xmax, ymin, ymax, pad_frac=0.08):
        dx, dy = xmax - xmin, ymax - ymin
        dx = dx if dx > 1e-9 else 1.0
        dy = dy if dy > 1e-9 else 1.0
        self._bounds = (xmin - pad_frac * dx, xmax + pad_frac * dx,
                        ymin - pad_frac * dy, ymax + pad_frac * dy)

    def to_px(self, x, y):
        xmin, xmax, ymin, ymax = self._bounds
        sx = (self.width - 2 * self.margin) / (xmax - xmin)
        sy = (self.height - 2 * self.margin) / (ymax - ymin)
        s = min(sx, sy)
        px = self.margin + (x - xmin) * s
        py = self.height - self.margin - (y - ymin) * s
        return px, py

    def polyline(self, points, stroke="#000000", width=1.5, opacity=1.0):
        if len(points) < 2:
            return
        pts = " ".join(f"{_f(px)},{_f(py)}" for px, py in (self.to_px(*p) for p in points))
        self.elements.append(
            f'<polyline points="{pts}" fill="none" stroke="{stroke}" '
            f'stroke-width="{_f(width)}" stroke-opacity="{_f(opacity)}"/>')

    def circle(self, x, y, r_px, fill="#000000", stroke="none"):
        px, py = self.to_px(x, y)
        self.elements.append(
            f'<circle cx="{_f(px)}" cy="{_f(py)}" r="{_f(r_px)}" fill="{fill}" stroke="{stroke}"/>')

    def segment(self, a, b, stroke="#000000", width=1.5):
        pa, pb = self.to_px(*a), self.to_px(*b)
        self.elements.append(
            f'<line x1="{_f(pa[0])}" y1="{_f(pa[1])}" x2="{_f(pb[0])}" y2="{_f(pb[1])}" '
            f'stroke="{stroke}" stroke-width="{_f(width)}"/>')

    def rect_data(self, x0, y0, x1, y1, fill, opacity=0.35):
        p0, p1 = self.to_px(x0, y1), self.to_px(x1, y0)
        self.elements.append(
            f'<rect x="{_f(p0[0])}" y="{_f(p0[1])}" width="{_f(p1[0] - p0[0])}" '
            f'height="{_f(p1[1] - p0[1])}" fill="{fill}" fill-opacity="{_f(opacity)}"/>')

    def text(self, x_px, y_px, s, size=12, fill="#333333", anchor="start"):
        self.elements.append(
            f'<text x="{_f(x_px)}" y="{_f(y_px)}" font-size="{size}" fill="{fill}" '
            f'text-anchor="{anchor}" font-family="sans-serif">{s}</text>')

    def save(self, path: str | Path, title: str = ""):
        if title:
            self.text(self.width / 2, 24, title, size=15, anchor="middle")
        body = "\n".join(self.elements)
        svg = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
               f'height="{self.height}" viewBox="0 0 {self.width} {self.height}">\n'
               f'<rect width="100%" height="100%" fill="white"/>\n{body}\n</svg>\n')
        Path(path).write_text(svg)


def plot_pulse_path(points, obj, out_path, title="slide path"):
    """Object-center path during one pulse, colored by motion class."""
    xy = [(p.object_pose.x, p.object_pose.y) for p in points]
    if not xy:
        return
    canvas = SvgCanvas()
    canvas.set_bounds(min(x for x, _ in xy), max(x for x, _ in xy),
                      min(y for _, y in xy), max(y for _, y in xy))
    run, color = [], None
    for p, pt in zip(points, xy):
        c = CLASS_COLORS.get(p.motion_class.value if p.motion_class else "", "#999999")
        if c != color and run:
            canvas.polyline(run, stroke=color, width=2.0)
            run = run[-1:]
        color = c
        run.append(pt)
    if run and color:
        canvas.polyline(run, stroke=color, width=2.0)
    canvas.circle(*xy[0], 4, fill="#444444")
    canvas.text(canvas.margin, canvas.height - 14,
                "pink: near-rotational, blue: translational", size=11)
    canvas.save(out_path, title)


STAGE_PATH_COLORS = {1: "#5b9bd5", 2: "#58b368", 3: "#e75480"}


def plot_plan_object_frame(result, goal, out_path, title="finger path in object frame"):
    """Stage-colored finger path in the object frame, with the goal marked.

    The trajectory records carry world poses per slide step; stage
    membership of each step is recovered from the per-stage pulse lengths
    in the action log.
    """
    from .se2 import invert_point

    rel_path = [invert_point(p.object_pose, p.finger_pose.position) for p in result.trajectory]
    if not rel_path:
        return
    steps_per_stage = {1: 0, 2: 0, 3: 0}
    for a in result.actions:
        if a.kind == "pulse" and a.n_steps:
            steps_per_stage[a.stage] += a.n_steps
    boundaries = []
    acc = 0
    for st in (1, 2, 3):
        acc += steps_per_stage[st]
        boundaries.append((st, acc))

    canvas = SvgCanvas()
    xs = [p[0] for p in rel_path] + [goal.x]
    ys = [p[1] for p in rel_path] + [goal.y]
    canvas.set_bounds(min(xs), max(xs), min(ys), max(ys))

    run, cur_stage = [], 1
    for i, pt in enumerate(rel_path):
        while boundaries and i >= boundaries[0][1] and boundaries[0][0] < 3:
            boundaries.pop(0)
        st = boundaries[0][0] if boundaries else 3
        if st != cur_stage and run:
            canvas.polyline(run, stroke=STAGE_PATH_COLORS[cur_stage], width=2.0)
            run = run[-1:]
        cur_stage = st
        run.append(pt)
    if run:
        canvas.polyline(run, stroke=STAGE_PATH_COLORS[cur_stage], width=2.0)

    canvas.circle(goal.x, goal.y, 5, fill="none", stroke="#cc0000")
    canvas.segment((goal.x, goal.y),
                   (goal.x + 0.008 * math.cos(goal.theta), goal.y + 0.008 * math.sin(goal.theta)),
                   stroke="#cc0000", width=2.0)
    canvas.text(canvas.margin, canvas.height - 14,
                "blue: centering, green: positioning, pink: orientation; red: goal", size=11)
    canvas.save(out_path, title)


def plot_error_distribution(report, out_path, title="final pose error per object"):
    """Per-object columns of final position errors (mm)."""
    groups: dict[str, list[float]] = {}
    for t in report.trials:
        if t.success:
            groups.setdefault(t.object_name, []).append(t.err_pos * 1000.0)
    if not groups:
        return
    canvas = SvgCanvas()
    names = sorted(groups)
    ymax = max(max(v) for v in groups.values())
    canvas.set_bounds(-0.5, len(names) - 0.5, 0.0, max(ymax, 1e-6))
    for i, name in enumerate(names):
        for v in groups[name]:
            canvas.circle(i, v, 3, fill="#3aa0c9")
        mean = sum(groups[name]) / len(groups[name])
        canvas.segment((i - 0.25, mean), (i + 0.25, mean), stroke="#cc0000", width=2.0)
        px, py = canvas.to_px(i, 0)
        canvas.text(px, canvas.height - canvas.margin + 18, name, size=11, anchor="middle")
    canvas.text(14, canvas.margin, "mm", size=11)
    canvas.save(out_path, title)
