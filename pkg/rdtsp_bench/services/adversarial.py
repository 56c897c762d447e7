"""
Étoiles adverses : un centre (le départ), n feuilles à distance d avec
gamma^d = 1/2, et une clique cachée d'arêtes courtes entre certaines feuilles.

La matrice retournée est la fermeture métrique (plus courts chemins) du
graphe étoile + clique, calculée en forme close :
centre-feuille d, paire de la clique min(short, 2d), autre paire 2d.
"""

import math

import networkx as nx
import numpy as np

from .. import get_settings
from ..exceptions import InvalidTour, NTooSmall, PolicyNondeterministic
from ..models import AdversarialStar, MetricInstance, PolicyKind, RngStream, StarFamily, Tour
from .evaluation import check_tour
from .policies import run_policy
from .utils import x_of_gamma


def star_graph(n, clique, d, short=1.0):
    """
    Graphe pondéré étoile + clique (avant fermeture métrique).

    Le noeud 0 est le centre, les feuilles sont 1..n.
    """
    graph = nx.Graph()
    graph.add_nodes_from(range(n + 1))
    graph.add_weighted_edges_from((0, leaf, d) for leaf in range(1, n + 1))
    members = sorted(clique)
    graph.add_weighted_edges_from(
        (a, b, short) for i, a in enumerate(members) for b in members[i + 1:]
    )
    return graph


def star_metric(n, clique, d, short=1.0):
    """Fermeture métrique du graphe étoile + clique, en (n+1)x(n+1)."""
    dist = np.full((n + 1, n + 1), 2.0 * d)
    dist[0, :] = d
    dist[:, 0] = d
    members = np.asarray(sorted(clique), dtype=int)
    if len(members):
        dist[np.ix_(members, members)] = min(short, 2.0 * d)
    np.fill_diagonal(dist, 0.0)
    return dist


def _star(n, clique, gamma, family, short=1.0, provenance=None):
    d = x_of_gamma(gamma)
    clique = frozenset(int(leaf) for leaf in clique)
    instance = MetricInstance(n, gamma, star_metric(n, clique, d, short),
                              provenance=dict(provenance or {}))
    star = AdversarialStar(n, clique, d, gamma, instance, short, family)
    instance.provenance.update({
        'family': family.value,
        'n': n,
        'clique': sorted(clique),
        'reference_tour': list(star.reference_tour().order),
    })
    return star


def _tour_builder(policy):
    """Normalise la politique en une fonction instance -> Tour."""
    if callable(policy) and not isinstance(policy, (str, PolicyKind)):
        return policy
    kind = PolicyKind.parse(policy)
    if not kind.deterministic:
        raise PolicyNondeterministic(f"La politique {kind.label} est stochastique")
    return lambda inst: run_policy(kind, inst)


def adversarial_star_deterministic(policy, n):
    """
    Étoile adverse contre une politique déterministe.

    La politique est simulée deux fois sur l'étoile symétrique (sans clique) ;
    la clique relie les n/2 dernières feuilles qu'elle visite. Ses n/2
    premiers choix évitent donc la clique.

    Args:
        policy: PolicyKind déterministe, nom, ou fonction instance -> Tour
        n: Nombre de feuilles, pair et >= 8

    Returns:
        AdversarialStar avec gamma = 1 - 1/n

    Raises:
        NTooSmall: n impair ou n < 8
        PolicyNondeterministic: deux simulations différentes
    """
    if n < 8 or n % 2:
        raise NTooSmall(f"L'étoile déterministe demande n pair >= 8 (reçu {n})")
    build = _tour_builder(policy)
    gamma = 1.0 - 1.0 / n
    symmetric = MetricInstance(n, gamma, star_metric(n, (), x_of_gamma(gamma)))

    first, second = build(symmetric), build(symmetric)
    if tuple(first.order) != tuple(second.order):
        raise PolicyNondeterministic("Deux simulations sur l'étoile symétrique diffèrent")
    try:
        check_tour(symmetric, first.order)
    except InvalidTour as e:
        raise PolicyNondeterministic(f"La politique ne rend pas une permutation : {e}")

    clique = first.order[n // 2:]
    return _star(n, clique, gamma, StarFamily.DETERMINISTIC_STAR)


def adversarial_star_clique(n, seed, algorithm='PCG64'):
    """
    Étoile à clique de taille floor(sqrt(n)), feuilles tirées uniformément.

    Args:
        n: Nombre de feuilles (>= 16)
        seed: Graine du tirage de la clique

    Returns:
        AdversarialStar avec gamma = 1 - 1/sqrt(n)
    """
    if n < 16:
        raise NTooSmall(f"L'étoile à clique demande n >= 16 (reçu {n})")
    size = math.isqrt(n)
    generator = RngStream(seed, (), algorithm).generator()
    clique = generator.choice(n, size=size, replace=False) + 1
    gamma = 1.0 - 1.0 / math.sqrt(n)
    return _star(n, clique.tolist(), gamma, StarFamily.CLIQUE_STAR,
                 provenance={'seed': int(seed)})


def clique_first_tour(star):
    """Tournée de référence : la clique, puis les feuilles restantes."""
    return star.reference_tour()


def star_from_instance(inst):
    """
    Reconstruit l'AdversarialStar d'une instance relue depuis un fichier.

    Returns:
        AdversarialStar, ou None si la provenance ne décrit pas une étoile
    """
    provenance = inst.provenance or {}
    family = provenance.get('family')
    if family not in (StarFamily.DETERMINISTIC_STAR.value, StarFamily.CLIQUE_STAR.value):
        return None
    clique = frozenset(int(leaf) for leaf in provenance.get('clique', ()))
    d = float(inst.dist[0, 1])
    short = float(inst.dist[min(clique), max(clique)]) if len(clique) > 1 else 1.0
    return AdversarialStar(inst.n, clique, d, inst.gamma, inst, short, StarFamily(family))


def reference_from_provenance(inst):
    """Tournée de référence écrite dans la provenance, ou None."""
    order = (inst.provenance or {}).get('reference_tour')
    return Tour(order) if order else None


class AdversarialService:
    """
    Service de construction des étoiles adverses.
    """

    def __init__(self, logger=None, settings=None):
        self.logger = logger
        self.settings = settings or get_settings()

    def log(self, level, message):
        """Log un message si logger disponible."""
        if self.logger:
            getattr(self.logger, level)(message)

    def build_deterministic(self, policy, n):
        star = adversarial_star_deterministic(policy, n)
        self.log('info', f"  Étoile déterministe n={n}, clique de {len(star.clique)} feuilles")
        return star

    def build_clique(self, n, seed):
        star = adversarial_star_clique(n, seed, self.settings['rng_algorithm'])
        self.log('info', f"  Étoile à clique n={n}, clique de {len(star.clique)} feuilles")
        return star
