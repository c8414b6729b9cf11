"""Minimal hand-written SVG plots: ellipses, polygons and line charts."""
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd")
WIDTH, HEIGHT, PAD = 480, 480, 40


def _fmt(v):
    return f"{v:.3f}"


class _Frame:
    """Maps data coordinates onto the canvas, z up."""

    def __init__(self, xs, ys, equal=True):
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        x0, x1 = float(xs.min()), float(xs.max())
        y0, y1 = float(ys.min()), float(ys.max())
        if x1 == x0:
            x0, x1 = x0 - 1, x1 + 1
        if y1 == y0:
            y0, y1 = y0 - 1, y1 + 1
        sx = (WIDTH - 2 * PAD) / (x1 - x0)
        sy = (HEIGHT - 2 * PAD) / (y1 - y0)
        if equal:
            sx = sy = min(sx, sy)
        self.x0, self.y0, self.x1, self.y1, self.sx, self.sy = x0, y0, x1, y1, sx, sy
        self.cx = PAD + 0.5 * ((WIDTH - 2 * PAD) - sx * (x1 - x0))
        self.cy = PAD + 0.5 * ((HEIGHT - 2 * PAD) - sy * (y1 - y0))

    def __call__(self, x, y):
        return self.cx + (x - self.x0) * self.sx, HEIGHT - (self.cy + (y - self.y0) * self.sy)

    def points(self, P):
        return " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in (self(x, y) for x, y in P))


def _document(title, body, legend):
    items = []
    for i, name in enumerate(legend):
        y = 18 + 16 * i
        items.append(f'<rect x="{WIDTH - 130}" y="{y - 9}" width="10" height="10" '
                     f'fill="{PALETTE[i % len(PALETTE)]}"/>'
                     f'<text x="{WIDTH - 115}" y="{y}" font-size="11">{escape(name)}</text>')
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">\n'
            f'<rect width="100%" height="100%" fill="white"/>\n'
            f'<text x="{PAD}" y="20" font-size="13">{escape(title)}</text>\n'
            + "\n".join(body) + "\n" + "\n".join(items) + "\n</svg>\n")


def ellipse_points(matrix, samples=181):
    """Boundary ``{x : x^T sym(A)^-1 x = 1}`` of the ellipse of a 2x2 matrix."""
    A = 0.5 * (np.asarray(matrix, dtype=float) + np.asarray(matrix, dtype=float).T)
    w, V = np.linalg.eigh(A)
    t = np.linspace(0.0, 2 * np.pi, samples)
    circle = np.vstack([np.cos(t), np.sin(t)])
    return (V @ (np.sqrt(np.clip(w, 0, None))[:, None] * circle)).T


def ellipses_svg(named_matrices, title="inertia ellipses"):
    curves = [(name, ellipse_points(M)) for name, M in named_matrices]
    allp = np.vstack([c for _, c in curves])
    fr = _Frame(allp[:, 0], allp[:, 1])
    body = []
    for i, (_, P) in enumerate(curves):
        d = "M " + " L ".join(f"{_fmt(a)} {_fmt(b)}" for a, b in (fr(x, y) for x, y in P)) + " Z"
        body.append(f'<path d="{d}" fill="none" stroke="{PALETTE[i % len(PALETTE)]}" '
                    f'stroke-width="1.5"/>')
    return _document(title, body, [n for n, _ in curves])


def polygons_svg(named_vertices, title="force capability"):
    polys = [(n, np.asarray(V, dtype=float)) for n, V in named_vertices]
    finite = [V for _, V in polys if np.all(np.isfinite(V))]
    allp = np.vstack(finite)
    fr = _Frame(allp[:, 0], allp[:, 1])
    body = []
    for i, (_, V) in enumerate(polys):
        if not np.all(np.isfinite(V)):
            continue
        body.append(f'<polygon points="{fr.points(V)}" fill="none" '
                    f'stroke="{PALETTE[i % len(PALETTE)]}" stroke-width="1.5"/>')
    return _document(title, body, [n for n, _ in polys])


def lines_svg(x, named_series, title="sweep", log_y=False):
    x = np.asarray(x, dtype=float)
    series = []
    for n, y in named_series:
        y = np.asarray(y, dtype=float)
        series.append((n, np.log10(y) if log_y else y))
    ally = np.concatenate([y[np.isfinite(y)] for _, y in series])
    fr = _Frame(x, ally, equal=False)
    body = []
    for i, (_, y) in enumerate(series):
        ok = np.isfinite(y)
        body.append(f'<polyline points="{fr.points(zip(x[ok], y[ok]))}" fill="none" '
                    f'stroke="{PALETTE[i % len(PALETTE)]}" stroke-width="1.5"/>')
    lo, hi = fr(fr.x0, fr.y0), fr(fr.x1, fr.y1)
    body.append(f'<text x="{_fmt(lo[0])}" y="{HEIGHT - 12}" font-size="10">{fr.x0:.3g}</text>')
    body.append(f'<text x="{_fmt(hi[0]) }" y="{HEIGHT - 12}" font-size="10" '
                f'text-anchor="end">{fr.x1:.3g}</text>')
    return _document(title + (" (log10)" if log_y else ""), body, [n for n, _ in series])
