"""
Évaluation actualisée des tournées et analyse des composantes à seuil.

Toutes les fonctions sont pures : elles ne modifient jamais l'instance.
"""

import networkx as nx
import numpy as np

from ..exceptions import EmptySubset, InvalidShape, InvalidTour
from ..models import MetricInstance, TourEvaluation, euclidean_matrix
from .utils import UNDERFLOW_FLOOR, check_gamma, discount


def check_tour(inst, order, full=True):
    """
    Vérifie qu'un ordre est une permutation (ou un préfixe sans répétition).

    Args:
        inst: MetricInstance
        order: Séquence d'indices de récompenses
        full: Exiger les n récompenses

    Raises:
        InvalidTour: indice inconnu, répétition ou tournée incomplète
    """
    seen = set()
    for reward in order:
        if not 1 <= reward <= inst.n:
            raise InvalidTour(f"Récompense inconnue : {reward}")
        if reward in seen:
            raise InvalidTour(f"Récompense visitée deux fois : {reward}")
        seen.add(reward)
    if full and len(seen) != inst.n:
        raise InvalidTour(f"Tournée incomplète : {len(seen)}/{inst.n} récompenses")


def _evaluate_path(inst, nodes, floor):
    """Valeur et distances cumulées le long de 0 -> nodes[0] -> nodes[1] ..."""
    path = np.asarray([0] + list(nodes), dtype=int)
    legs = inst.dist[path[:-1], path[1:]]
    cum_dist = np.cumsum(legs)
    values = discount(cum_dist, inst.gamma, floor)
    return float(np.sum(values)), tuple(float(d) for d in cum_dist)


def evaluate_tour(inst, tour, floor=UNDERFLOW_FLOOR):
    """
    Retour actualisé d'une tournée complète : somme des gamma^D_j.

    Si la tournée porte une marche physique (`tour.walk`), la valeur est
    celle de la marche, chaque récompense étant collectée à sa première
    visite.

    Args:
        inst: MetricInstance
        tour: Tour (permutation de 1..n)

    Returns:
        TourEvaluation
    """
    check_tour(inst, tour.order)
    if tour.walk is not None:
        return evaluate_walk(inst, tour.walk, floor)
    value, cum_dist = _evaluate_path(inst, tour.order, floor)
    return TourEvaluation(value, cum_dist)


def evaluate_prefix(inst, order, floor=UNDERFLOW_FLOOR):
    """Évalue les k premières récompenses d'une tournée (k <= n)."""
    check_tour(inst, order, full=False)
    if not len(order):
        return TourEvaluation(0.0, ())
    value, cum_dist = _evaluate_path(inst, order, floor)
    return TourEvaluation(value, cum_dist)


def evaluate_walk(inst, walk, floor=UNDERFLOW_FLOOR):
    """
    Évalue une marche physique qui commence au départ.

    Args:
        inst: MetricInstance
        walk: Noeuds successifs, walk[0] == 0, les revisites sont permises

    Returns:
        TourEvaluation: cum_dist[j] = distance parcourue à la j-ème collecte
    """
    walk = list(walk)
    if not walk or walk[0] != 0:
        raise InvalidTour("La marche doit commencer au départ (noeud 0)")
    travelled = 0.0
    collected = set()
    cum_dist = []
    for previous, node in zip(walk[:-1], walk[1:]):
        if not 0 <= node <= inst.n:
            raise InvalidTour(f"Noeud inconnu : {node}")
        travelled += inst.dist[previous, node]
        if node != 0 and node not in collected:
            collected.add(node)
            cum_dist.append(travelled)
    if len(collected) != inst.n:
        raise InvalidTour(f"Marche incomplète : {len(collected)}/{inst.n} récompenses")
    value = float(np.sum(discount(np.asarray(cum_dist), inst.gamma, floor)))
    return TourEvaluation(value, tuple(float(d) for d in cum_dist))


def threshold_components(inst, theta, subset=None):
    """
    Composantes connexes du graphe « arêtes strictement plus courtes que theta ».

    Args:
        inst: MetricInstance
        theta: Seuil (> 0)
        subset: Ensemble de récompenses (défaut : toutes)

    Returns:
        list: Composantes (frozenset), triées par plus petit indice
    """
    if not theta > 0:
        raise ValueError(f"theta doit être > 0 : {theta}")
    nodes = sorted(inst.rewards if subset is None else subset)
    if not nodes:
        raise EmptySubset("Sous-ensemble de récompenses vide")
    for node in nodes:
        if not 1 <= node <= inst.n:
            raise EmptySubset(f"Récompense inconnue dans le sous-ensemble : {node}")

    index = np.asarray(nodes)
    block = inst.dist[np.ix_(index, index)]
    rows, cols = np.nonzero(np.triu(block < theta, k=1))

    graph = nx.Graph()
    graph.add_nodes_from(nodes)
    graph.add_edges_from(zip(index[rows].tolist(), index[cols].tolist()))
    components = [frozenset(c) for c in nx.connected_components(graph)]
    return sorted(components, key=min)


def instance_from_points(points, gamma, provenance=None):
    """
    Construit une instance euclidienne dense ; points[0] est le départ.

    Les doublons sont permis (distance 0).

    Raises:
        GammaOutOfRange: gamma hors de ]0, 1[
        InvalidShape: moins d'une récompense ou points mal formés
    """
    check_gamma(gamma)
    coords = np.asarray(points, dtype=float)
    if coords.ndim != 2 or coords.shape[1] != 2:
        raise InvalidShape(f"Points attendus en (m, 2), reçu {coords.shape}")
    if coords.shape[0] < 2:
        raise InvalidShape("Il faut au moins une récompense en plus du départ")
    dist = euclidean_matrix(coords)
    return MetricInstance(coords.shape[0] - 1, gamma, dist, coords, dict(provenance or {}))
