"""
Politiques locales pour le RD-TSP : NN, R-NN, NN-RDFS et NN-RA, ainsi que
les branches RDFS et RA seules.

Les politiques ne lisent jamais la matrice de distances directement. Elles
passent par un LocalAgent qui ne lit que la ligne du noeud courant
(déjà visité) : aucune distance entre deux récompenses non visitées n'est lue.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..exceptions import InvalidHistory, UnknownKind
from ..models import PolicyKind, RngStream, Tour
from .evaluation import evaluate_tour
from .utils import UNDERFLOW_FLOOR, ceil_log2, discount, x_of_gamma


TRAVEL_MODES = ('shortcut', 'tree')


@dataclass(frozen=True, eq=False)
class LocalObservation:
    """
    Vue locale d'un agent : noeud courant, historique et valeurs d'options.

    Attributes:
        current: Noeud courant
        history: Noeuds collectés dans l'ordre, en commençant par 0
        candidates: Récompenses non collectées, triées (tableau numpy)
        option_values: V_i(current) = gamma^d(current, i), aligné sur candidates
        option_distances: d(current, i), même information que option_values
    """
    current: int
    history: tuple
    candidates: np.ndarray
    option_values: np.ndarray
    option_distances: np.ndarray

    @property
    def visited(self):
        return frozenset(self.history[1:])

    def values_by_reward(self):
        return dict(zip(self.candidates.tolist(), self.option_values.tolist()))

    def best(self):
        """Option de plus grande valeur, la plus petite récompense en cas d'égalité."""
        return int(self.candidates[np.argmin(self.option_distances)])

    def within(self, theta, collected_mask=None):
        """
        Récompenses à distance strictement inférieure à theta, par distance
        croissante puis indice croissant.

        Args:
            theta: Seuil
            collected_mask: Masque booléen (n+1) des récompenses collectées
                depuis l'observation ; elles sont écartées
        """
        keep = self.option_distances < theta
        if collected_mask is not None:
            keep &= ~collected_mask[self.candidates]
        candidates = self.candidates[keep]
        distances = self.option_distances[keep]
        return candidates[np.lexsort((candidates, distances))]

    def sorted_by_distance(self):
        return self.candidates[np.lexsort((self.candidates, self.option_distances))]


class LocalAgent:
    """
    État interne d'un agent local : position, historique, récompenses restantes.

    Seule méthode qui lit des distances : observe(), et uniquement la ligne
    de la position courante.
    """

    def __init__(self, inst, floor=UNDERFLOW_FLOOR):
        self.inst = inst
        self.floor = floor
        self.history = [0]
        self.walk = [0]
        self.position = 0
        self.collected = np.zeros(inst.n + 1, dtype=bool)
        self.collected[0] = True

    @property
    def done(self):
        return len(self.history) == self.inst.n + 1

    def observe(self):
        row = np.asarray(self.inst.distance_row(self.position))
        candidates = np.flatnonzero(~self.collected)
        distances = row[candidates]
        values = discount(distances, self.inst.gamma, self.floor)
        return LocalObservation(
            current=self.position,
            history=tuple(self.history),
            candidates=candidates,
            option_values=np.atleast_1d(values),
            option_distances=distances,
        )

    def collect(self, reward):
        reward = int(reward)
        if self.collected[reward]:
            raise InvalidHistory(f"Récompense déjà collectée : {reward}")
        self.collected[reward] = True
        self.history.append(reward)
        self.walk.append(reward)
        self.position = reward

    def move(self, node):
        """Déplacement physique vers un noeud déjà visité (retour arrière)."""
        if not self.collected[node]:
            raise InvalidHistory(f"Retour vers un noeud non visité : {node}")
        if node != self.position:
            self.walk.append(int(node))
            self.position = int(node)

    def greedy(self):
        """Termine en NN depuis la position courante."""
        while not self.done:
            self.collect(self.observe().best())

    def tour(self, with_walk=False):
        walk = tuple(self.walk) if with_walk else None
        return Tour(self.history[1:], walk)


def observe(inst, history, floor=UNDERFLOW_FLOOR):
    """
    Observation locale après un historique donné.

    Args:
        inst: MetricInstance
        history: Séquence de noeuds, commençant par 0, sans revisite

    Returns:
        LocalObservation

    Raises:
        InvalidHistory: historique vide, ne commençant pas par 0,
            noeud inconnu ou revisite
    """
    history = list(history)
    if not history or history[0] != 0:
        raise InvalidHistory("L'historique doit commencer au départ (noeud 0)")
    agent = LocalAgent(inst, floor)
    for node in history[1:]:
        if not 1 <= node <= inst.n:
            raise InvalidHistory(f"Noeud inconnu : {node}")
        if agent.collected[node]:
            raise InvalidHistory(f"Revisite du noeud {node}")
        agent.collect(node)
    return agent.observe()


def _generator(rng):
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng)).generator()
    return rng


def _heads(gen):
    """Pièce équilibrée : True avec probabilité 1/2."""
    return gen.random() < 0.5


def _pick_reward(gen, n):
    return int(gen.integers(1, n + 1))


# ========== Branches déterministes ==========

def nn(inst):
    """NN : collecte toujours la récompense de plus grande valeur V_i(courant)."""
    agent = LocalAgent(inst)
    agent.greedy()
    return agent.tour()


def nn_from(inst, first):
    """Collecte `first` puis termine en NN."""
    agent = LocalAgent(inst)
    agent.collect(first)
    agent.greedy()
    return agent.tour()


def rdfs_theta(inst, i):
    """
    Seuil de NN-RDFS pour le tirage i : theta = x / sqrt(n'), n' = max(1, n / 2^i).
    """
    n_prime = max(1, inst.n >> int(i))
    return x_of_gamma(inst.gamma) / math.sqrt(n_prime)


def rdfs_branch(inst, s1, i, travel='shortcut'):
    """
    Branche RDFS : DFS depuis s1 sur les arêtes plus courtes que theta,
    voisins par distance croissante, puis NN sur le reste.

    En mode 'shortcut', l'agent va directement d'une récompense nouvellement
    collectée à la suivante. En mode 'tree', il paie les retours arrière le
    long de l'arbre DFS et la tournée porte la marche physique.

    Le DFS réutilise l'observation faite à chaque noeud lors de sa collecte :
    aucune nouvelle distance n'est lue pendant les retours arrière.
    """
    if travel not in TRAVEL_MODES:
        raise ValueError(f"Mode de déplacement inconnu : {travel}")
    theta = rdfs_theta(inst, i)
    agent = LocalAgent(inst)
    agent.collect(s1)
    snapshots = {s1: agent.observe()}
    stack = [s1]

    while stack:
        node = stack[-1]
        if travel == 'tree':
            agent.move(node)
        neighbours = snapshots[node].within(theta, agent.collected)
        if len(neighbours):
            reward = int(neighbours[0])
            agent.collect(reward)
            snapshots[reward] = agent.observe()
            stack.append(reward)
        else:
            stack.pop()

    agent.greedy()
    return agent.tour(with_walk=(travel == 'tree'))


def ra_branch(inst, s1):
    """Branche RA : s1, puis les autres récompenses par distance croissante à s1."""
    agent = LocalAgent(inst)
    agent.collect(s1)
    for reward in agent.observe().sorted_by_distance():
        agent.collect(reward)
    return agent.tour()


# ========== Politiques stochastiques ==========

def r_nn(inst, rng):
    """R-NN : avec probabilité 1/2, première récompense uniforme puis NN."""
    gen = _generator(rng)
    if _heads(gen):
        return nn_from(inst, _pick_reward(gen, inst.n))
    return nn(inst)


def rdfs(inst, rng, travel='shortcut'):
    """RDFS seul : s1 uniforme, i ~ U{1..ceil(log2 n)}, sans repli sur NN."""
    gen = _generator(rng)
    s1 = _pick_reward(gen, inst.n)
    i = int(gen.integers(1, max(1, ceil_log2(inst.n)) + 1))
    return rdfs_branch(inst, s1, i, travel)


def ra(inst, rng):
    """RA seul : s1 uniforme puis ordre de distance à s1."""
    return ra_branch(inst, _pick_reward(_generator(rng), inst.n))


def nn_rdfs(inst, rng, travel='shortcut'):
    """NN-RDFS : avec probabilité 1/2 RDFS, sinon NN."""
    gen = _generator(rng)
    if _heads(gen):
        return rdfs(inst, gen, travel)
    return nn(inst)


def nn_ra(inst, rng):
    """NN-RA : avec probabilité 1/2 RA, sinon NN."""
    gen = _generator(rng)
    if _heads(gen):
        return ra(inst, gen)
    return nn(inst)


def run_policy(kind, inst, rng=None, travel='shortcut'):
    """Exécute une politique par son type."""
    kind = PolicyKind.parse(kind)
    if kind is PolicyKind.NN:
        return nn(inst)
    if rng is None:
        raise ValueError(f"La politique {kind.label} exige un flux aléatoire")
    if kind is PolicyKind.R_NN:
        return r_nn(inst, rng)
    if kind is PolicyKind.NN_RDFS:
        return nn_rdfs(inst, rng, travel)
    if kind is PolicyKind.NN_RA:
        return nn_ra(inst, rng)
    if kind is PolicyKind.RDFS:
        return rdfs(inst, rng, travel)
    if kind is PolicyKind.RA:
        return ra(inst, rng)
    raise UnknownKind(f"Politique inconnue : {kind}")


def _rdfs_branches(inst, travel, weight):
    m = max(1, ceil_log2(inst.n))
    for s1 in inst.rewards:
        for i in range(1, m + 1):
            yield weight / (inst.n * m), rdfs_branch(inst, s1, i, travel)


def _ra_branches(inst, weight):
    for s1 in inst.rewards:
        yield weight / inst.n, ra_branch(inst, s1)


def policy_branches(kind, inst, travel='shortcut'):
    """
    Énumère les branches déterministes d'une politique.

    Yields:
        tuple: (probabilité, Tour)
    """
    kind = PolicyKind.parse(kind)
    if kind is PolicyKind.NN:
        yield 1.0, nn(inst)
    elif kind is PolicyKind.RDFS:
        yield from _rdfs_branches(inst, travel, 1.0)
    elif kind is PolicyKind.RA:
        yield from _ra_branches(inst, 1.0)
    else:
        yield 0.5, nn(inst)
        if kind is PolicyKind.R_NN:
            for s1 in inst.rewards:
                yield 0.5 / inst.n, nn_from(inst, s1)
        elif kind is PolicyKind.NN_RDFS:
            yield from _rdfs_branches(inst, travel, 0.5)
        elif kind is PolicyKind.NN_RA:
            yield from _ra_branches(inst, 0.5)


def expected_value(kind, inst, travel='shortcut'):
    """Espérance exacte de la valeur d'une politique, par énumération des branches."""
    return math.fsum(
        probability * evaluate_tour(inst, tour).value
        for probability, tour in policy_branches(kind, inst, travel)
    )


class PolicyService:
    """
    Service d'exécution des politiques locales sur une instance.
    """

    def __init__(self, logger=None, travel='shortcut'):
        """
        Initialise le service.

        Args:
            logger: Logger pour les messages (optionnel)
            travel: Mode de déplacement RDFS ('shortcut' ou 'tree')
        """
        self.logger = logger
        self.travel = travel

    def log(self, level, message):
        """Log un message si logger disponible."""
        if self.logger:
            getattr(self.logger, level)(message)

    def run(self, kind, inst, stream=None):
        """
        Une exécution seedée.

        Returns:
            tuple: (Tour, valeur)
        """
        tour = run_policy(kind, inst, stream, self.travel)
        return tour, evaluate_tour(inst, tour).value

    def run_many(self, kind, inst, stream, runs):
        """
        `runs` exécutions indépendantes, l'exécution r utilisant stream.child(r).

        Returns:
            list: Tours et valeurs [(Tour, float), ...]
        """
        kind = PolicyKind.parse(kind)
        if kind.deterministic:
            runs = 1
        results = [self.run(kind, inst, stream.child(run) if stream else None)
                   for run in range(runs)]
        self.log('debug', f"    {kind.label}: {len(results)} exécutions sur n={inst.n}")
        return results
