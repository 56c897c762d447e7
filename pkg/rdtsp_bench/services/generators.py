"""
Générateurs de scénarios reproductibles.

Cinq familles d'expériences (random_cities, line3, random_clusters, circles,
rural_urban) plus des chemins aléatoires. Le départ est toujours à (0, 0),
et (kind, n, seed) détermine entièrement l'instance.
"""

import math

import numpy as np

from .. import get_settings
from ..exceptions import NTooSmall, RdtspError, UnknownKind
from ..models import RngStream, ScenarioKind, ScenarioSpec, validate_instance
from .evaluation import instance_from_points
from .utils import gamma_of_x


ORIGIN = (0.0, 0.0)

# Au-delà de 64x, une récompense vaut au plus 2^-64
LINE3_CLAMP = 64.0

MAX_REJECTIONS = 10000


def _generator(spec):
    kind_code = list(ScenarioKind).index(spec.kind)
    return RngStream(spec.seed, (kind_code, spec.n)).generator()


def _split(n, parts):
    """Découpe n en `parts` tailles aussi égales que possible (les premières plus grandes)."""
    base, extra = divmod(n, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


def random_cities(spec, rng):
    """Récompenses uniformes dans [0, x]^2."""
    return rng.uniform(0.0, spec.x, size=(spec.n, 2))


def line3(spec, rng):
    """
    Trois groupes : un amas à gauche de l'origine (groupe 1), un amas à
    droite un peu plus proche (groupe 2), et des récompenses à (theta/3) 2^i
    (groupe 3, bornées à 64x).

    L'étalement des amas est min(ell, theta/12) pour que le groupe 2 reste à
    droite de l'origine et plus proche que le groupe 1 pour tout n. Les tirages
    du groupe 2 qui ne sont pas strictement plus proches que tout le groupe 1
    sont rejetés.
    """
    theta, x = spec.theta, spec.x
    spread = min(spec.ell, theta / 12.0)
    sizes = _split(spec.n, 3)

    group1 = np.column_stack([
        rng.uniform(-theta / 3.0 - spread, -theta / 3.0 + spread, size=sizes[0]),
        rng.normal(0.0, spread, size=sizes[0]),
    ])
    limit = np.min(np.hypot(group1[:, 0], group1[:, 1])) if sizes[0] else np.inf

    group2 = []
    attempts = 0
    while len(group2) < sizes[1]:
        attempts += 1
        if attempts > MAX_REJECTIONS * max(1, sizes[1]):
            raise RdtspError("line3 : échantillonnage par rejet du groupe 2 sans succès")
        point = (rng.uniform(theta / 3.0 - 3.0 * spread, theta / 3.0 - 2.0 * spread),
                 rng.normal(0.0, spread))
        if math.hypot(*point) < limit:
            group2.append(point)
    group2 = np.array(group2, dtype=float).reshape(-1, 2)

    exponents = np.arange(1, sizes[2] + 1, dtype=float)
    # 2^i déborde pour i > 1023 : on borne l'exposant avant de calculer
    cap = math.log2(LINE3_CLAMP * x / (theta / 3.0))
    reach = (theta / 3.0) * np.exp2(np.minimum(exponents, cap))
    group3 = np.column_stack([np.minimum(reach, LINE3_CLAMP * x), np.zeros(sizes[2])])

    return np.vstack([group1, group2, group3])


def random_clusters(spec, rng):
    """
    k centres sur le cercle de rayon x (bruit radial gaussien d'écart-type
    `spec.jitter`), puis chaque récompense uniforme dans un carré de côté
    20 ell autour d'un centre tiré uniformément.
    """
    k = spec.k_clusters
    angles = rng.uniform(0.0, 2.0 * math.pi, size=k)
    radii = spec.x + rng.normal(0.0, spec.jitter, size=k)
    centers = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
    owners = rng.integers(0, k, size=spec.n)
    half = 10.0 * spec.ell
    offsets = rng.uniform(-half, half, size=(spec.n, 2))
    return centers[owners] + offsets


def circles(spec, rng):
    """
    floor(sqrt(n)) cercles centrés à l'origine, rayons
    rho_i = (x / sqrt(n)) (1 + n^(-1/4))^i, récompenses équiréparties en angle
    (phase nulle), tronquées à n.
    """
    n = spec.n
    count = math.isqrt(n)
    per_circle = math.ceil(n / count)
    ratio = 1.0 + n ** -0.25
    points = []
    for i in range(1, count + 1):
        rho = spec.x / math.sqrt(n) * ratio ** i
        angles = 2.0 * math.pi * np.arange(per_circle) / per_circle
        points.append(np.column_stack([rho * np.cos(angles), rho * np.sin(angles)]))
    return np.vstack(points)[:n]


def rural_urban(spec, rng):
    """ceil(n/2) récompenses en ville autour de (x, 0), floor(n/2) dans la campagne."""
    city = math.ceil(spec.n / 2)
    village = spec.n - city
    x, ell = spec.x, spec.ell
    city_points = np.column_stack([rng.normal(x, ell, size=city), rng.normal(0.0, ell, size=city)])
    village_points = np.column_stack([
        rng.normal(-x, 10.0 * x, size=village),
        rng.normal(0.0, 10.0 * x, size=village),
    ])
    return np.vstack([city_points, village_points])


def generate_path(n, x, seed, gamma=None, generator_version=None):
    """
    n récompenses sur une droite, écarts positifs aléatoires de somme x.

    Le départ est sur la première récompense. Sans gamma explicite, on prend
    gamma = 2^(-1/x), de sorte que x soit la distance de demi-vie.

    Returns:
        MetricInstance
    """
    if n < 2:
        raise NTooSmall(f"Un chemin demande n >= 2 (reçu {n})")
    rng = RngStream(seed, (list(ScenarioKind).index(ScenarioKind.PATH), n)).generator()
    gaps = rng.exponential(1.0, size=n - 1)
    gaps = gaps / np.sum(gaps) * x
    positions = np.concatenate([[0.0], np.cumsum(gaps)])
    points = [ORIGIN] + [(float(p), 0.0) for p in positions]
    provenance = {
        'kind': ScenarioKind.PATH.value,
        'n': n,
        'seed': seed,
        'x': x,
        'generator_version': generator_version or get_settings()['generator_version'],
    }
    return instance_from_points(points, gamma if gamma is not None else gamma_of_x(x), provenance)


BUILDERS = {
    ScenarioKind.RANDOM_CITIES: random_cities,
    ScenarioKind.LINE3: line3,
    ScenarioKind.RANDOM_CLUSTERS: random_clusters,
    ScenarioKind.CIRCLES: circles,
    ScenarioKind.RURAL_URBAN: rural_urban,
}


def generate_scenario(spec, generator_version=None):
    """
    Construit l'instance d'un scénario.

    Args:
        spec: ScenarioSpec
        generator_version: Version écrite dans la provenance

    Returns:
        MetricInstance avec gamma = 1 - 1/n et provenance (kind, n, seed, version)
    """
    version = generator_version or get_settings()['generator_version']
    if spec.kind is ScenarioKind.PATH:
        return generate_path(spec.n, spec.x, spec.seed, spec.gamma, version)
    builder = BUILDERS.get(spec.kind)
    if builder is None:
        raise UnknownKind(f"Scénario inconnu : {spec.kind}")
    rewards = builder(spec, _generator(spec))
    points = np.vstack([np.asarray([ORIGIN]), rewards])
    provenance = {
        'kind': spec.kind.value,
        'n': spec.n,
        'seed': spec.seed,
        'generator_version': version,
    }
    return instance_from_points(points, spec.gamma, provenance)


class ScenarioService:
    """
    Service de génération des instances d'expériences.
    """

    def __init__(self, logger=None, settings=None):
        self.logger = logger
        self.settings = settings or get_settings()

    def log(self, level, message):
        """Log un message si logger disponible."""
        if self.logger:
            getattr(self.logger, level)(message)

    def build(self, kind, n, seed, validate=True, **params):
        """
        Génère et valide une instance.

        Args:
            kind: ScenarioKind ou nom
            n: Nombre de récompenses
            seed: Graine 64 bits
            validate: Vérifier les invariants de l'instance
            **params: Paramètres libres de ScenarioSpec (cluster_jitter, k_clusters)

        Returns:
            MetricInstance
        """
        spec = ScenarioSpec(kind, n, seed, **params)
        inst = generate_scenario(spec, self.settings['generator_version'])
        if validate:
            validate_instance(
                inst,
                self.settings['triangle_tolerance'],
                self.settings['coord_tolerance'],
            ).raise_for_error()
        self.log('debug', f"  Instance {spec.kind.value} n={n} seed={seed} générée")
        return inst
