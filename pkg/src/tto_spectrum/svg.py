"""Minimal static SVG emitter for spectrum and annulus plots.

Coordinates are printed with a fixed number of decimals so that identical
inputs give byte-identical files.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SIZE = 560
PAD = 30


def _f(x: float) -> str:
    return f"{x:.3f}"


@dataclass
class Canvas:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    title: str = ""
    items: list = field(default_factory=list)

    def _xy(self, w: complex) -> tuple[float, float]:
        span = max(self.re_max - self.re_min, self.im_max - self.im_min)
        s = (SIZE - 2 * PAD) / span
        x = PAD + (w.real - self.re_min) * s
        y = SIZE - PAD - (w.imag - self.im_min) * s
        return x, y

    def cell(self, w: complex, dre: float, dim: float, fill: str = "#cccccc") -> None:
        x0, y0 = self._xy(complex(w.real - dre / 2, w.imag + dim / 2))
        x1, y1 = self._xy(complex(w.real + dre / 2, w.imag - dim / 2))
        self.items.append(f'<rect x="{_f(x0)}" y="{_f(y0)}" width="{_f(x1 - x0)}" '
                          f'height="{_f(y1 - y0)}" fill="{fill}" stroke="none"/>')

    def polyline(self, pts, stroke: str = "#1f77b4", width: float = 1.0) -> None:
        coords = " ".join(f"{_f(x)},{_f(y)}" for x, y in (self._xy(complex(p)) for p in pts))
        self.items.append(f'<polyline points="{coords}" fill="none" stroke="{stroke}" '
                          f'stroke-width="{width}"/>')

    def circle(self, center: complex, radius: float, stroke: str = "#444444", dash: bool = False) -> None:
        t = np.linspace(0, 2 * np.pi, 361)
        pts = list(center + radius * np.exp(1j * t))
        coords = " ".join(f"{_f(x)},{_f(y)}" for x, y in (self._xy(complex(p)) for p in pts))
        extra = ' stroke-dasharray="4,3"' if dash else ""
        self.items.append(f'<polyline points="{coords}" fill="none" stroke="{stroke}"{extra}/>')

    def dot(self, w: complex, fill: str = "#d62728", r: float = 3.5) -> None:
        x, y = self._xy(complex(w))
        self.items.append(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="{r}" fill="{fill}"/>')

    def cross(self, w: complex, stroke: str = "#2ca02c", r: float = 4.0) -> None:
        x, y = self._xy(complex(w))
        self.items.append(f'<path d="M{_f(x - r)},{_f(y - r)} L{_f(x + r)},{_f(y + r)} '
                          f'M{_f(x - r)},{_f(y + r)} L{_f(x + r)},{_f(y - r)}" stroke="{stroke}"/>')

    def render(self) -> str:
        x0, y0 = self._xy(complex(self.re_min, self.im_max))
        x1, y1 = self._xy(complex(self.re_max, self.im_min))
        head = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" '
            f'viewBox="0 0 {SIZE} {SIZE}">',
            '<rect width="100%" height="100%" fill="white"/>',
            f'<rect x="{_f(x0)}" y="{_f(y0)}" width="{_f(x1 - x0)}" height="{_f(y1 - y0)}" '
            'fill="none" stroke="black"/>',
        ]
        if self.title:
            head.append(f'<text x="{PAD}" y="{PAD - 10}" font-family="sans-serif" font-size="12">'
                        f'{self.title}</text>')
        return "\n".join(head + self.items + ["</svg>", ""])


def spectrum_svg(region, eigenvalues, excluded, curve=None, cell=(0.0, 0.0)) -> str:
    """Eigenvalues as dots, excluded grid cells shaded, optional Phi(T) curve."""
    cv = Canvas(*region, title="eigenvalues (red), excluded cells (grey), Phi(T) (blue)")
    dre, dim = cell
    for w in excluded:
        cv.cell(complex(w), dre, dim)
    if curve is not None:
        cv.polyline(curve)
    for lam in eigenvalues:
        cv.dot(lam)
    return cv.render()


def annulus_svg(inner_radius: float, zeros, trivial, outer_radius: float = 1.0) -> str:
    """The annulus inner_radius < |z| < outer_radius with zeros of F and trivial points."""
    R = 1.1 * max(outer_radius, 1.0)
    cv = Canvas(-R, R, -R, R, title="zeros of F (red), trivial points (green), annulus boundary")
    cv.circle(0j, outer_radius)
    cv.circle(0j, inner_radius, dash=True)
    for z in zeros:
        cv.dot(z, r=2.5)
    for z in trivial:
        cv.cross(z)
    return cv.render()
