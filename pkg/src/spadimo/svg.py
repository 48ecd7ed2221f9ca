"""Minimal SVG 1.1 plots: a sign heatmap and a count-versus-eta screeplot.

Positive values use a red ramp and negative values a blue ramp, with
intensity proportional to |value| relative to the row maximum.
"""

from xml.sax.saxutils import escape

import numpy as np

CELL = 14
MARGIN = 60
FONT = 'font-family="sans-serif" font-size="10"'


def _num(x):
    return f"{x:.2f}".rstrip("0").rstrip(".")


def _header(width, height):
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_num(width)}" '
        f'height="{_num(height)}" viewBox="0 0 {_num(width)} {_num(height)}">',
        f'<rect x="0" y="0" width="{_num(width)}" height="{_num(height)}" fill="white"/>',
    ]


def cell_colour(value, scale):
    """Hex colour: white at zero, saturated red (+) or blue (-) at |value| = scale."""
    if value == 0.0 or scale <= 0.0:
        return "#ffffff"
    level = min(1.0, abs(value) / scale)
    fade = int(round(255 * (1.0 - 0.85 * level)))
    if value > 0:
        return f"#ff{fade:02x}{fade:02x}"
    return f"#{fade:02x}{fade:02x}ff"


def heatmap(values, row_labels, col_labels, title=""):
    """Rows of signed values drawn as coloured cells; zeros stay white."""
    values = np.asarray(values, dtype=float)
    rows, cols = values.shape
    width = 2 * MARGIN + cols * CELL
    height = 2 * MARGIN + rows * CELL
    out = _header(width, height)
    if title:
        out.append(f'<text x="{MARGIN}" y="20" {FONT}>{escape(title)}</text>')
    for j, label in enumerate(col_labels):
        x = MARGIN + j * CELL + CELL / 2
        out.append(f'<text x="{_num(x)}" y="{MARGIN - 4}" {FONT} text-anchor="end" '
                   f'transform="rotate(-90 {_num(x)} {MARGIN - 4})">{escape(str(label))}</text>')
    for i, label in enumerate(row_labels):
        y = MARGIN + i * CELL
        out.append(f'<text x="{MARGIN - 4}" y="{_num(y + CELL - 3)}" {FONT} '
                   f'text-anchor="end">{escape(str(label))}</text>')
        scale = float(np.abs(values[i]).max()) if cols else 0.0
        for j in range(cols):
            out.append(f'<rect x="{MARGIN + j * CELL}" y="{y}" width="{CELL}" height="{CELL}" '
                       f'fill="{cell_colour(values[i, j], scale)}" stroke="#cccccc"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def screeplot(etas, counts, marker_eta=None, title=""):
    """Number of nonzero components against eta, with an optional marker."""
    width, height = 420, 300
    left, right, top, bottom = MARGIN, width - 20, 40, height - 40
    etas = [float(e) for e in etas]
    top_count = max(1, max(counts) if counts else 1)
    lo, hi = 0.0, 1.0

    def px(e):
        return left + (e - lo) / (hi - lo) * (right - left)

    def py(c):
        return bottom - c / top_count * (bottom - top)

    out = _header(width, height)
    if title:
        out.append(f'<text x="{left}" y="20" {FONT}>{escape(title)}</text>')
    out.append(f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>')
    out.append(f'<line x1="{left}" y1="{bottom}" x2="{left}" y2="{top}" stroke="black"/>')
    for k in range(0, 11, 2):
        e = k / 10
        out.append(f'<text x="{_num(px(e))}" y="{bottom + 14}" {FONT} '
                   f'text-anchor="middle">{_num(e)}</text>')
    for c in sorted({0, top_count}):
        out.append(f'<text x="{left - 6}" y="{_num(py(c) + 3)}" {FONT} '
                   f'text-anchor="end">{c}</text>')
    out.append(f'<text x="{_num((left + right) / 2)}" y="{height - 8}" {FONT} '
               f'text-anchor="middle">eta</text>')
    out.append(f'<text x="14" y="{_num((top + bottom) / 2)}" {FONT} text-anchor="middle" '
               f'transform="rotate(-90 14 {_num((top + bottom) / 2)})">flagged variables</text>')
    order = sorted(range(len(etas)), key=lambda k: etas[k])
    points = " ".join(f"{_num(px(etas[k]))},{_num(py(counts[k]))}" for k in order)
    if points:
        out.append(f'<polyline points="{points}" fill="none" stroke="black"/>')
    for k in order:
        out.append(f'<circle cx="{_num(px(etas[k]))}" cy="{_num(py(counts[k]))}" r="3" '
                   f'fill="black"/>')
    if marker_eta is not None and marker_eta in etas:
        c = counts[etas.index(marker_eta)]
        x, y = px(marker_eta), py(c)
        out.append(f'<polygon points="{_num(x)},{_num(y - 7)} {_num(x - 6)},{_num(y + 4)} '
                   f'{_num(x + 6)},{_num(y + 4)}" fill="red"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
