"""Deterministic frame rendering: SVG (golden format), PNG, and sequences.

SVG output is byte-identical for identical FrameStates: fixed float
formatting, stable edge ordering by (weight, node pair), nodes in id
order.  PNG rasterizes the same scene with Pillow primitives; edge
opacity is pre-blended against the background so no alpha compositing is
involved.  Video assembly is delegated to an external encoder; the
documented command line is part of the export manifest.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from PIL import Image, ImageDraw

from .heat import color_hex, heat_to_color
from .session import FrameState, Session

MAX_CANVAS_PIXELS = 10**8


class AllocationFailure(MemoryError):
    pass


@dataclass
class RenderStyle:
    width: int = 1920
    height: int = 1080
    background: str = "#10141e"
    margin: float = 40.0
    node_radius_mode: str = "scaled"  # or "fixed"
    fixed_radius: float = 3.0
    radius_scale: float = 2.0  # scaled mode: radius_scale * sqrt(members)
    radius_min: float = 1.5
    radius_max: float = 14.0
    edge_color: str = "#7f8ca6"
    edge_width: float = 1.0
    opacity_min: float = 0.05
    opacity_max: float = 1.0
    palette: tuple = None  # None = the session's configured palette

    def node_radius(self, members: int) -> float:
        if self.node_radius_mode == "fixed":
            return self.fixed_radius
        r = self.radius_scale * (members ** 0.5)
        return min(max(r, self.radius_min), self.radius_max)


def _scene(frame: FrameState, style: RenderStyle):
    """Project unit-box positions to pixels and precompute draw params."""
    w = style.width - 2 * style.margin
    h = style.height - 2 * style.margin
    xs = style.margin + frame.positions[:, 0] * w
    ys = style.margin + frame.positions[:, 1] * h
    max_w = float(frame.edge_w.max()) if len(frame.edge_w) else 0.0
    edges = []
    for i in range(len(frame.edge_u)):
        u = int(frame.edge_u[i])
        v = int(frame.edge_v[i])
        ew = float(frame.edge_w[i])
        rel = ew / max_w if max_w > 0 else 0.0
        opacity = min(max(rel, style.opacity_min), style.opacity_max)
        edges.append((ew, u, v, opacity))
    edges.sort()
    palette = style.palette
    nodes = []
    for i in range(len(frame.node_ids)):
        heat = min(max(float(frame.heats[i]), 0.0), 1.0)
        color = (heat_to_color(heat, palette) if palette is not None
                 else heat_to_color(heat))
        radius = style.node_radius(int(frame.member_counts[i]))
        nodes.append((float(xs[i]), float(ys[i]), radius, color))
    return xs, ys, edges, nodes


def render_svg(frame: FrameState, style: Optional[RenderStyle] = None) -> str:
    """Vector rendering of one frame; deterministic to the byte."""
    style = style or RenderStyle()
    xs, ys, edges, nodes = _scene(frame, style)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{style.width}" '
        f'height="{style.height}" viewBox="0 0 {style.width} {style.height}">',
        f'<rect width="{style.width}" height="{style.height}" '
        f'fill="{style.background}"/>',
    ]
    for _w, u, v, opacity in edges:
        x1, y1 = xs[u - 1], ys[u - 1]
        x2, y2 = xs[v - 1], ys[v - 1]
        out.append(
            f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
            f'stroke="{style.edge_color}" stroke-width="{style.edge_width:.2f}" '
            f'stroke-opacity="{opacity:.3f}"/>')
    for x, y, radius, color in nodes:
        out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{radius:.2f}" '
                   f'fill="{color_hex(color)}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _hex_to_rgb(value: str) -> Tuple[int, int, int]:
    value = value.lstrip("#")
    return tuple(int(value[i:i + 2], 16) for i in (0, 2, 4))


def render_png(frame: FrameState, style: Optional[RenderStyle] = None) -> Image.Image:
    """Raster rendering of the same scene; pixel-deterministic per build."""
    style = style or RenderStyle()
    if style.width * style.height > MAX_CANVAS_PIXELS:
        raise AllocationFailure(
            f"canvas {style.width}x{style.height} exceeds pixel cap")
    bg = _hex_to_rgb(style.background)
    img = Image.new("RGB", (style.width, style.height), bg)
    draw = ImageDraw.Draw(img)
    xs, ys, edges, nodes = _scene(frame, style)
    ec = _hex_to_rgb(style.edge_color)
    for _w, u, v, opacity in edges:
        blended = tuple(int(c * opacity + b * (1.0 - opacity) + 0.5)
                        for c, b in zip(ec, bg))
        draw.line([(xs[u - 1], ys[u - 1]), (xs[v - 1], ys[v - 1])],
                  fill=blended, width=max(1, round(style.edge_width)))
    for x, y, radius, color in nodes:
        draw.ellipse([x - radius, y - radius, x + radius, y + radius],
                     fill=color)
    return img


def encoder_command(fps: float, video_name: str = "out.mp4",
                    out_dir: str = "") -> str:
    """External command turning exported frames into a video file.

    Paths are relative to the export directory unless `out_dir` is given,
    so the manifest stays byte-identical wherever the export lands.
    """
    pattern = os.path.join(out_dir, "frame-%06d.png") if out_dir \
        else "frame-%06d.png"
    target = os.path.join(out_dir, video_name) if out_dir else video_name
    return (f"ffmpeg -framerate {fps:g} -i {pattern} "
            f"-c:v libx264 -pix_fmt yuv420p {target}")


def export_sequence(session: Session, out_dir: str, fps: float,
                    frame_count: int, relayout_every: int = 0,
                    style: Optional[RenderStyle] = None,
                    write_png: bool = True, write_svg: bool = False) -> dict:
    """Headless export: spread the event log evenly over `frame_count` frames.

    Writes frame-%06d.png (and .svg when asked) plus manifest.json with
    everything needed to reproduce the run; returns the manifest dict.
    Wall-clock statistics are deliberately excluded from the manifest.
    """
    os.makedirs(out_dir, exist_ok=True)
    style = style or RenderStyle()
    total = len(session.log)
    manifest_frames = []
    for i in range(frame_count):
        target = round((i + 1) * total / frame_count) if frame_count else total
        if relayout_every and i > 0 and i % relayout_every == 0:
            session.trigger_relayout(block=True)
        frame = session.seek(target)
        frame = dataclasses.replace(frame, frame_index=i)
        entry = {"index": i, "cursor": frame.cursor,
                 "layout_rev": frame.layout_rev}
        if write_png:
            png_name = f"frame-{i:06d}.png"
            render_png(frame, style).save(os.path.join(out_dir, png_name))
            entry["png"] = png_name
        if write_svg:
            svg_name = f"frame-{i:06d}.svg"
            with open(os.path.join(out_dir, svg_name), "w",
                      encoding="utf-8") as fp:
                fp.write(render_svg(frame, style))
            entry["svg"] = svg_name
        manifest_frames.append(entry)
    manifest = {
        "config": session.config.describe(),
        "total_events": total,
        "fps": fps,
        "frame_count": frame_count,
        "relayout_every": relayout_every,
        "style": {k: (list(v) if isinstance(v, tuple) else v)
                  for k, v in dataclasses.asdict(style).items()},
        "frames": manifest_frames,
        "encoder_command": encoder_command(fps),
    }
    with open(os.path.join(out_dir, "manifest.json"), "w",
              encoding="utf-8") as fp:
        json.dump(manifest, fp, indent=2, sort_keys=True)
        fp.write("\n")
    return manifest
