"""
Rendu SVG des tournées : points gris pour les récompenses, marqueur du
départ, et une polyligne sur les `prefix` premières récompenses.
"""

import math
from xml.sax.saxutils import escape

import drawsvg as draw
import numpy as np

from ..exceptions import NoCoordinates
from ..models import RenderSpec


MARGIN = 0.05


class Polyline(draw.DrawingBasicElement):
    """Élément SVG <polyline> (drawsvg ne fournit que des <path>)."""
    TAG_NAME = 'polyline'

    def __init__(self, points, **kwargs):
        coords = ' '.join(f'{x:.3f},{y:.3f}' for x, y in points)
        super().__init__(points=coords, **kwargs)


def star_layout(inst):
    """
    Disposition radiale schématique pour une instance sans coordonnées.

    Le départ est au centre ; la récompense i est à la distance d(0, i) du
    centre, à l'angle 2 pi (i - 1) / n. Seules les distances au départ sont
    respectées.
    """
    n = inst.n
    radii = np.asarray(inst.distance_row(0), dtype=float)
    angles = np.concatenate([[0.0], 2.0 * math.pi * np.arange(n) / n])
    return np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])


def _points(spec):
    inst = spec.instance
    if inst.coords is not None:
        return np.asarray(inst.coords, dtype=float), spec.title
    if spec.layout == 'star':
        title = f"{spec.title} (disposition schématique)".strip()
        return star_layout(inst), title
    raise NoCoordinates("Instance sans coordonnées : utiliser la disposition 'star'")


def _viewport(points, size):
    """
    Projection des points sur un canevas carré avec 5 % de marge ;
    l'axe y est retourné (nord en haut).
    """
    low = points.min(axis=0)
    high = points.max(axis=0)
    span = float(max(np.max(high - low), 1e-12))
    inner = size * (1.0 - 2.0 * MARGIN)
    scale = inner / span
    offset = size * MARGIN + (inner - (high - low) * scale) / 2.0

    def project(point):
        x = offset[0] + (point[0] - low[0]) * scale
        y = size - (offset[1] + (point[1] - low[1]) * scale)
        return float(x), float(y)

    return project


def render_svg(spec):
    """
    Document SVG d'une tournée.

    Args:
        spec: RenderSpec

    Returns:
        str: Document SVG

    Raises:
        NoCoordinates: instance sans coordonnées et sans layout 'star'
    """
    points, title = _points(spec)
    size = spec.canvas_size
    project = _viewport(points, size)

    drawing = draw.Drawing(size, size)
    if title:
        drawing.append(draw.Raw(f'<title>{escape(title)}</title>'))
    drawing.append(draw.Rectangle(0, 0, size, size, fill='white'))

    for reward in spec.instance.rewards:
        cx, cy = project(points[reward])
        drawing.append(draw.Circle(cx, cy, spec.dot_radius, fill=spec.dot_color))

    if spec.prefix > 0:
        path = [0] + list(spec.tour.order[:spec.prefix])
        drawing.append(Polyline(
            [project(points[node]) for node in path],
            fill='none',
            stroke=spec.stroke_color,
            stroke_width=spec.stroke_width,
        ))

    sx, sy = project(points[0])
    half = spec.start_size / 2.0
    drawing.append(draw.Rectangle(sx - half, sy - half, spec.start_size, spec.start_size,
                                  fill=spec.start_color))
    return drawing.as_svg()


class RenderService:
    """
    Service de rendu des tournées.
    """

    def __init__(self, logger=None):
        self.logger = logger

    def log(self, level, message):
        """Log un message si logger disponible."""
        if self.logger:
            getattr(self.logger, level)(message)

    def render(self, instance, tour, **options):
        """
        Construit le RenderSpec et rend le SVG.

        Args:
            instance: MetricInstance
            tour: Tour
            **options: Champs de RenderSpec (prefix, k, layout, title...)
        """
        spec = RenderSpec(instance, tour, **options)
        svg = render_svg(spec)
        self.log('debug', f"  Rendu de {spec.prefix}/{instance.n} récompenses")
        return svg

    def save(self, path, instance, tour, **options):
        svg = self.render(instance, tour, **options)
        with open(path, 'w', encoding='utf-8') as f:
            f.write(svg)
        self.log('info', f"SVG écrit : {path}")
        return path
