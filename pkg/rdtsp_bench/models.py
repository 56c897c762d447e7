"""
Modèles du domaine RD-TSP.

Le noeud 0 est toujours le départ s0, les récompenses sont indexées de 1 à n.
Les instances sont immuables une fois construites.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import exceptions


class PolicyKind(str, Enum):
    NN = 'nn'
    R_NN = 'rnn'
    NN_RDFS = 'nnrdfs'
    NN_RA = 'nnra'
    # Branches aléatoires seules, sans pièce ni repli sur NN
    RDFS = 'rdfs'
    RA = 'ra'

    @property
    def deterministic(self):
        return self is PolicyKind.NN

    @property
    def mixed(self):
        """Politique du banc de mesure : NN ou mélange 1/2 avec NN."""
        return self in MIXED_POLICIES

    @property
    def label(self):
        return {
            PolicyKind.NN: 'NN',
            PolicyKind.R_NN: 'R-NN',
            PolicyKind.NN_RDFS: 'NN-RDFS',
            PolicyKind.NN_RA: 'NN-RA',
            PolicyKind.RDFS: 'RDFS',
            PolicyKind.RA: 'RA',
        }[self]

    @classmethod
    def parse(cls, value):
        """Accepte le nom court ('nnrdfs') ou le nom d'enum ('NN_RDFS')."""
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            try:
                return cls[str(value).upper()]
            except KeyError:
                raise exceptions.UnknownKind(f"Politique inconnue : {value}")


MIXED_POLICIES = (PolicyKind.NN, PolicyKind.R_NN, PolicyKind.NN_RDFS, PolicyKind.NN_RA)


class ScenarioKind(str, Enum):
    RANDOM_CITIES = 'random_cities'
    LINE3 = 'line3'
    RANDOM_CLUSTERS = 'random_clusters'
    CIRCLES = 'circles'
    RURAL_URBAN = 'rural_urban'
    PATH = 'path'

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise exceptions.UnknownKind(f"Scénario inconnu : {value}")


class StarFamily(str, Enum):
    GENERAL = 'general'
    DETERMINISTIC_STAR = 'deterministic_star'
    CLIQUE_STAR = 'clique_star'


# ========== Instance ==========

@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    code: str = ''
    indices: tuple = ()
    message: str = ''

    def raise_for_error(self):
        if self.ok:
            return
        error_class = getattr(exceptions, self.code, exceptions.InstanceValidationError)
        raise error_class(self.message, self.indices)


@dataclass(frozen=True, eq=False)
class MetricInstance:
    """
    Métrique complète sur {départ, n récompenses} avec facteur gamma.

    Attributes:
        n: Nombre de récompenses
        gamma: Facteur d'actualisation dans ]0, 1[
        dist: Matrice (n+1)x(n+1) symétrique, en lecture seule
        coords: Points planaires (n+1)x2 ou None
        provenance: Métadonnées du générateur (kind, n, seed, version...)
    """
    n: int
    gamma: float
    dist: np.ndarray
    coords: np.ndarray = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise exceptions.InvalidShape(f"Une instance doit contenir au moins une récompense (n={self.n})")
        dist = np.array(self.dist, dtype=float)
        if dist.ndim != 2 or dist.shape != (self.n + 1, self.n + 1):
            raise exceptions.InvalidShape(
                f"Matrice {dist.shape} incompatible avec n={self.n}"
            )
        dist.setflags(write=False)
        object.__setattr__(self, 'dist', dist)
        if self.coords is not None:
            coords = np.array(self.coords, dtype=float)
            if coords.shape != (self.n + 1, 2):
                raise exceptions.InvalidShape(
                    f"Coordonnées {coords.shape} incompatibles avec n={self.n}"
                )
            coords.setflags(write=False)
            object.__setattr__(self, 'coords', coords)
        object.__setattr__(self, 'gamma', float(self.gamma))

    @property
    def euclidean(self):
        return self.coords is not None

    @property
    def rewards(self):
        return range(1, self.n + 1)

    def distance(self, i, j):
        return float(self.dist[i, j])

    def distance_row(self, i):
        """Ligne i de la matrice (vue en lecture seule)."""
        return self.dist[i]

    def clean(self, triangle_tolerance=1e-9, coord_tolerance=1e-12):
        """Lève l'exception du premier invariant violé."""
        validate_instance(self, triangle_tolerance, coord_tolerance).raise_for_error()
        return self

    def with_gamma(self, gamma):
        return MetricInstance(self.n, gamma, self.dist, self.coords, dict(self.provenance))


def validate_instance(inst, triangle_tolerance=1e-9, coord_tolerance=1e-12):
    """
    Vérifie les invariants d'une instance métrique.

    Ordre des vérifications : gamma, signe, diagonale, symétrie, puis
    cohérence avec les coordonnées (si présentes) ou inégalité triangulaire.
    L'inégalité triangulaire n'est pas recalculée pour les instances
    euclidiennes, elle est garantie par construction.

    Args:
        inst: MetricInstance
        triangle_tolerance: Tolérance absolue sur d(i,k) <= d(i,j) + d(j,k)
        coord_tolerance: Tolérance relative entre dist et les coordonnées

    Returns:
        ValidationResult: ok, ou le premier invariant violé avec ses indices
    """
    from .services.utils import check_gamma

    dist = inst.dist

    try:
        check_gamma(inst.gamma)
    except exceptions.GammaOutOfRange as e:
        return ValidationResult(False, 'GammaOutOfRange', (), str(e))

    if not np.all(np.isfinite(dist)):
        i, j = np.argwhere(~np.isfinite(dist))[0]
        return ValidationResult(False, 'InvalidShape', (int(i), int(j)),
                                f"Distance non finie en ({i}, {j})")

    negative = np.argwhere(dist < 0)
    if len(negative):
        i, j = negative[0]
        return ValidationResult(False, 'NegativeDistance', (int(i), int(j)),
                                f"Distance négative entre {i} et {j} : {dist[i, j]}")

    diagonal = np.flatnonzero(np.diag(dist) != 0)
    if len(diagonal):
        i = int(diagonal[0])
        return ValidationResult(False, 'NonSymmetric', (i, i),
                                f"Diagonale non nulle au noeud {i}")

    asymmetric = np.argwhere(dist != dist.T)
    if len(asymmetric):
        i, j = asymmetric[0]
        return ValidationResult(False, 'NonSymmetric', (int(i), int(j)),
                                f"d({i},{j}) != d({j},{i})")

    if inst.coords is not None:
        expected = euclidean_matrix(inst.coords)
        mismatch = np.argwhere(
            np.abs(dist - expected) > coord_tolerance * np.maximum(expected, 1.0)
        )
        if len(mismatch):
            i, j = mismatch[0]
            return ValidationResult(False, 'CoordMismatch', (int(i), int(j)),
                                    f"d({i},{j})={dist[i, j]} != {expected[i, j]}")
        return ValidationResult(True)

    # Inégalité triangulaire, vectorisée sur le noeud intermédiaire j
    for j in range(inst.n + 1):
        via_j = dist[:, j:j + 1] + dist[j:j + 1, :]
        violated = np.argwhere(dist > via_j + triangle_tolerance)
        if len(violated):
            i, k = violated[0]
            return ValidationResult(
                False, 'TriangleViolation', (int(i), j, int(k)),
                f"d({i},{k})={dist[i, k]} > d({i},{j}) + d({j},{k})"
            )

    return ValidationResult(True)


def euclidean_matrix(points):
    """Matrice des distances euclidiennes planaires entre points (m x 2)."""
    points = np.asarray(points, dtype=float)
    delta = points[:, None, :] - points[None, :, :]
    return np.hypot(delta[..., 0], delta[..., 1])


# ========== Tournées ==========

@dataclass(frozen=True)
class Tour:
    """
    Ordre de collecte des récompenses, le départ 0 est implicite.

    Attributes:
        order: Tuple des indices de récompenses
        walk: Marche physique optionnelle (noeuds successifs, départ inclus)
              quand le trajet réel diffère des liaisons directes
    """
    order: tuple
    walk: tuple = None

    def __post_init__(self):
        object.__setattr__(self, 'order', tuple(int(i) for i in self.order))
        if self.walk is not None:
            object.__setattr__(self, 'walk', tuple(int(i) for i in self.walk))

    def __len__(self):
        return len(self.order)


@dataclass(frozen=True)
class TourEvaluation:
    value: float
    cum_dist: tuple


# ========== Aléa ==========

@dataclass(frozen=True)
class RngStream:
    """
    Flux aléatoire reproductible : (algorithme, graine maître, chemin).

    Le chemin est passé comme spawn_key à SeedSequence, donc deux chemins
    distincts donnent des sous-flux indépendants.
    """
    seed: int
    path: tuple = ()
    algorithm: str = 'PCG64'

    def generator(self):
        bit_generator = getattr(np.random, self.algorithm)
        sequence = np.random.SeedSequence(int(self.seed), spawn_key=tuple(self.path))
        return np.random.Generator(bit_generator(sequence))

    def child(self, *keys):
        return RngStream(self.seed, tuple(self.path) + tuple(int(k) for k in keys),
                         self.algorithm)


# ========== Scénarios ==========

@dataclass(frozen=True)
class ScenarioSpec:
    """
    Famille de générateur et ses paramètres.

    Les champs dérivés (gamma, x, ell, theta) sont recalculés à chaque accès.
    cluster_jitter : écart-type du bruit radial des centres de clusters
    (None → ell).
    """
    kind: ScenarioKind
    n: int
    seed: int
    cluster_jitter: float = None
    k_clusters: int = 10

    def __post_init__(self):
        object.__setattr__(self, 'kind', ScenarioKind.parse(self.kind))
        if self.n < 3:
            raise exceptions.NTooSmall(f"n doit être >= 3 (reçu {self.n})")

    @property
    def gamma(self):
        return 1.0 - 1.0 / self.n

    @property
    def x(self):
        from .services.utils import x_of_gamma
        return x_of_gamma(self.gamma)

    @property
    def ell(self):
        return 0.01 * self.x

    @property
    def theta(self):
        return self.x / math.sqrt(self.n)

    @property
    def jitter(self):
        return self.ell if self.cluster_jitter is None else self.cluster_jitter


@dataclass(frozen=True, eq=False)
class AdversarialStar:
    """
    Étoile (rayons de longueur d, gamma^d = 1/2) avec une clique cachée
    d'arêtes de longueur `short` entre certaines feuilles.
    """
    n: int
    clique: frozenset
    d: float
    gamma: float
    instance: MetricInstance
    short: float = 1.0
    family: StarFamily = StarFamily.DETERMINISTIC_STAR

    def reference_tour(self):
        """Tournée de référence : la clique d'abord, puis les autres feuilles."""
        clique = sorted(self.clique)
        rest = [leaf for leaf in range(1, self.n + 1) if leaf not in self.clique]
        return Tour(clique + rest)


# ========== Géométries simples ==========

@dataclass(frozen=True)
class LineInstance:
    """
    Récompenses sur une droite.

    Les positions égales sont fusionnées : `positions` est strictement
    croissant et `weights` compte les récompenses à chaque position.
    """
    start: float
    positions: tuple
    weights: tuple = None

    def __post_init__(self):
        positions = [float(p) for p in self.positions]
        weights = list(self.weights) if self.weights is not None else [1] * len(positions)
        if len(weights) != len(positions):
            raise exceptions.InvalidLine("positions et weights de tailles différentes")
        if not positions:
            raise exceptions.InvalidLine("Aucune récompense sur la droite")
        if not all(math.isfinite(p) for p in positions + [float(self.start)]):
            raise exceptions.InvalidLine("Position non finie")
        merged = {}
        for position, weight in zip(positions, weights):
            if int(weight) < 1:
                raise exceptions.InvalidLine(f"Poids invalide : {weight}")
            merged[position] = merged.get(position, 0) + int(weight)
        ordered = sorted(merged)
        object.__setattr__(self, 'start', float(self.start))
        object.__setattr__(self, 'positions', tuple(ordered))
        object.__setattr__(self, 'weights', tuple(merged[p] for p in ordered))

    @property
    def n(self):
        return sum(self.weights)

    def expanded_positions(self):
        """Positions avec répétition, dans l'ordre croissant (récompenses 1..n)."""
        expanded = []
        for position, weight in zip(self.positions, self.weights):
            expanded.extend([position] * weight)
        return expanded

    def to_instance(self, gamma):
        """Instance métrique équivalente (euclidienne, ordonnée)."""
        from .services.evaluation import instance_from_points
        points = [(self.start, 0.0)] + [(p, 0.0) for p in self.expanded_positions()]
        return instance_from_points(points, gamma)


@dataclass(frozen=True)
class DStarInstance:
    """
    Récompenses sur d bras reliés à un centre, départ au centre.

    Attributes:
        arms: Tuple de tuples triés des distances au centre, par bras
    """
    arms: tuple

    def __post_init__(self):
        if len(self.arms) < 1:
            raise exceptions.InvalidStar("Il faut au moins un bras")
        arms = []
        for arm in self.arms:
            arm = tuple(sorted(float(v) for v in arm))
            if any(not (math.isfinite(v) and v > 0) for v in arm):
                raise exceptions.InvalidStar(f"Distances au centre non positives : {arm}")
            arms.append(arm)
        object.__setattr__(self, 'arms', tuple(arms))

    @property
    def d(self):
        return len(self.arms)

    @property
    def n(self):
        return sum(len(arm) for arm in self.arms)

    def offsets(self):
        """Indice de récompense (moins 1) du premier élément de chaque bras."""
        offsets, total = [], 0
        for arm in self.arms:
            offsets.append(total)
            total += len(arm)
        return offsets

    def to_instance(self, gamma):
        """
        Instance métrique de l'arbre : même bras → |p - q|, bras différents → p + q.

        Les récompenses sont numérotées bras par bras, du centre vers l'extérieur.
        """
        depth = [0.0]
        arm_of = [-1]
        for a, arm in enumerate(self.arms):
            depth.extend(arm)
            arm_of.extend([a] * len(arm))
        depth = np.array(depth)
        arm_of = np.array(arm_of)
        same_arm = (arm_of[:, None] == arm_of[None, :]) & (arm_of[:, None] >= 0)
        dist = np.where(same_arm,
                        np.abs(depth[:, None] - depth[None, :]),
                        depth[:, None] + depth[None, :])
        np.fill_diagonal(dist, 0.0)
        return MetricInstance(self.n, gamma, dist)


@dataclass(frozen=True)
class ExactSolution:
    value: float
    tour: Tour
    solver: str


# ========== Banc de mesure ==========

@dataclass(frozen=True)
class ExperimentConfig:
    """
    Configuration du protocole expérimental.

    Les cartes utilisées sont map_start .. map_start + n_maps - 1.
    """
    scenarios: tuple
    master_seed: int
    n_list: tuple = (100, 200, 400, 600, 800, 1000)
    n_maps: int = 10
    n_alg: int = 100
    policies: tuple = MIXED_POLICIES
    workers: int = 1
    map_start: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'scenarios',
                           tuple(ScenarioKind.parse(s) for s in self.scenarios))
        object.__setattr__(self, 'policies',
                           tuple(PolicyKind.parse(p) for p in self.policies))
        object.__setattr__(self, 'n_list', tuple(int(n) for n in self.n_list))
        if self.n_maps < 1 or self.n_alg < 1:
            raise exceptions.UsageError("n_maps et n_alg doivent être >= 1")
        if self.workers < 1:
            raise exceptions.UsageError("workers doit être >= 1")
        if not self.scenarios or not self.policies or not self.n_list:
            raise exceptions.UsageError("scenarios, policies et n_list ne peuvent être vides")

    @property
    def map_indices(self):
        return range(self.map_start, self.map_start + self.n_maps)

    def runs_for(self, policy):
        return 1 if PolicyKind.parse(policy).deterministic else self.n_alg


@dataclass(frozen=True)
class BenchRow:
    """
    Agrégat d'une cellule (scénario, n, politique).

    Attributes:
        map_indices: Indices des cartes, croissants
        map_means: Moyenne des exécutions sur chaque carte
        map_stds: Écart-type intra-carte des exécutions
    """
    scenario: str
    n: int
    policy: str
    map_indices: tuple
    map_means: tuple
    map_stds: tuple
    n_alg: int

    @property
    def n_maps(self):
        return len(self.map_means)

    @property
    def mean(self):
        return float(np.mean(self.map_means))

    @property
    def min(self):
        return float(np.min(self.map_means))

    @property
    def stderr(self):
        if len(self.map_means) < 2:
            return 0.0
        return float(np.std(self.map_means, ddof=1) / math.sqrt(len(self.map_means)))

    @property
    def key(self):
        return (self.scenario, self.n, self.policy)


@dataclass(frozen=True)
class BenchReport:
    rows: tuple
    master_seed: int
    n_maps: int
    n_alg: int
    rng_algorithm: str = 'PCG64'
    generator_version: str = ''

    def row(self, scenario, n, policy):
        key = (ScenarioKind.parse(scenario).value, int(n), PolicyKind.parse(policy).value)
        for row in self.rows:
            if row.key == key:
                return row
        raise KeyError(key)


@dataclass(frozen=True)
class RenderSpec:
    instance: MetricInstance
    tour: Tour
    prefix: int = None
    canvas_size: int = 800
    dot_color: str = '#9e9e9e'
    dot_radius: float = 3.0
    stroke_color: str = '#1f77b4'
    stroke_width: float = 1.5
    start_color: str = '#d62728'
    start_size: float = 9.0
    layout: str = None
    title: str = ''
    k: int = 8

    def __post_init__(self):
        n = self.instance.n
        if self.k < 1:
            raise ValueError(f"k doit être >= 1 (reçu {self.k})")
        prefix = math.ceil(n / self.k) if self.prefix is None else int(self.prefix)
        if prefix < 0 or prefix > n or prefix > len(self.tour):
            raise ValueError(f"prefix {prefix} hors bornes (n={n})")
        object.__setattr__(self, 'prefix', prefix)
