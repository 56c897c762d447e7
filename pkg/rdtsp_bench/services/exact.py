"""
Solveurs exacts du RD-TSP : force brute, Held-Karp, droite et d-étoile.

Held-Karp utilise la récurrence « valeur restante » : depuis la récompense k
avec l'ensemble S déjà collecté, la valeur future est
W(S, k) = max_{j hors S} gamma^d(k,j) * (1 + W(S ∪ {j}, j)).
Le facteur gamma^(distance déjà parcourue) se factorise, donc la récurrence
est exacte. La récurrence avant (C, V) qui ne garde qu'un couple par état
est exposée séparément par held_karp_tables().
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .. import get_settings
from ..exceptions import InvalidLine, InvalidStar, TooLarge
from ..models import DStarInstance, ExactSolution, LineInstance, Tour
from .evaluation import evaluate_tour
from .utils import UNDERFLOW_FLOOR, check_gamma, discount


LEFT, RIGHT = 0, 1


def _solution(inst, order, solver):
    tour = Tour(order)
    return ExactSolution(evaluate_tour(inst, tour).value, tour, solver)


# ========== Force brute ==========

def brute_force(inst, max_n=10):
    """
    Maximum exact sur toutes les permutations.

    Les permutations sont parcourues dans l'ordre lexicographique et seul un
    gain strict remplace le meilleur : en cas d'égalité, la plus petite
    tournée lexicographique est gardée.

    Raises:
        TooLarge: n > max_n
    """
    n = inst.n
    if n > max_n:
        raise TooLarge(f"Force brute limitée à n <= {max_n} (n={n})")
    dist = inst.dist.tolist()
    log_gamma = math.log(inst.gamma)
    best = [-1.0, None]
    order = []
    remaining = list(range(1, n + 1))

    def explore(node, travelled, value):
        if not remaining:
            if value > best[0]:
                best[0], best[1] = value, tuple(order)
            return
        for position, reward in enumerate(list(remaining)):
            arrival = travelled + dist[node][reward]
            gain = math.exp(arrival * log_gamma)
            if gain < UNDERFLOW_FLOOR:
                gain = 0.0
            order.append(reward)
            del remaining[position]
            explore(reward, arrival, value + gain)
            remaining.insert(position, reward)
            order.pop()

    explore(0, 0.0, 0.0)
    return _solution(inst, best[1], 'brute_force')


# ========== Held-Karp ==========

def _popcount_layers(n):
    """Masques regroupés par nombre de bits à 1 : layers[c] = masques de popcount c."""
    masks = np.arange(1 << n, dtype=np.int64)
    popcount = np.zeros(1 << n, dtype=np.int64)
    for j in range(n):
        popcount += (masks >> j) & 1
    return [masks[popcount == c] for c in range(n + 1)]


def held_karp(inst, max_n=20):
    """
    Held-Karp exact pour le RD-TSP (chemin ouvert, sans retour au départ).

    Tables de taille 2^n x n remplies par nombre décroissant de récompenses
    collectées ; la tournée est reconstruite par pointeurs arrière.

    Raises:
        TooLarge: n > max_n
    """
    n = inst.n
    if n > max_n:
        raise TooLarge(f"Held-Karp limité à n <= {max_n} (n={n})")
    g = discount(inst.dist, inst.gamma)
    layers = _popcount_layers(n)

    future = np.zeros((1 << n, n))
    choice = np.full((1 << n, n), -1, dtype=np.int8)

    for count in range(n - 1, 0, -1):
        masks = layers[count]
        best = np.full((len(masks), n), -np.inf)
        arg = np.full((len(masks), n), -1, dtype=np.int8)
        for j in range(n):
            lacking = ((masks >> j) & 1) == 0
            continuation = 1.0 + future[masks[lacking] | (1 << j), j]
            candidate = continuation[:, None] * g[1:, j + 1][None, :]
            improved = candidate > best[lacking]
            best[lacking] = np.where(improved, candidate, best[lacking])
            arg[lacking] = np.where(improved, j, arg[lacking])
        future[masks] = best
        choice[masks] = arg

    # Départ : aucune récompense collectée, agent au noeud 0
    start_values = g[0, 1:] * (1.0 + future[1 << np.arange(n), np.arange(n)])
    current = int(np.argmax(start_values))
    mask = 1 << current
    order = [current + 1]
    while len(order) < n:
        current = int(choice[mask, current])
        mask |= 1 << current
        order.append(current + 1)
    return _solution(inst, order, 'held_karp')


@dataclass(frozen=True, eq=False)
class HeldKarpTables:
    """
    Tables de la récurrence avant jointe.

    Attributes:
        C: Longueur du chemin retenu pour (S, k), nan si k hors de S
        V: Valeur actualisée de ce chemin, nan si k hors de S
        value: max_k V(tout, k)
    """
    C: np.ndarray
    V: np.ndarray
    value: float


def held_karp_tables(inst, max_n=16):
    """
    Récurrence avant qui garde, pour chaque (S, k), le chemin de valeur
    maximale et sa longueur :
    Q(S,k,a) = V(S\\{k},a) + gamma^(C(S\\{k},a) + d(a,k)).

    Ce n'est qu'une borne inférieure de l'optimum : un chemin de valeur
    moindre mais plus court peut mieux se prolonger.
    """
    n = inst.n
    if n > max_n:
        raise TooLarge(f"Tables Held-Karp limitées à n <= {max_n} (n={n})")
    dist = inst.dist
    log_gamma = math.log(inst.gamma)
    layers = _popcount_layers(n)
    C = np.full((1 << n, n), np.nan)
    V = np.full((1 << n, n), np.nan)

    for k in range(n):
        C[1 << k, k] = dist[0, k + 1]
        V[1 << k, k] = discount(dist[0, k + 1], inst.gamma)

    for count in range(2, n + 1):
        masks = layers[count]
        for k in range(n):
            with_k = masks[((masks >> k) & 1) == 1]
            previous = with_k ^ (1 << k)
            best_q = np.full(len(with_k), -np.inf)
            best_c = np.full(len(with_k), np.nan)
            for a in range(n):
                if a == k:
                    continue
                has_a = ((previous >> a) & 1) == 1
                length = C[previous, a] + dist[a + 1, k + 1]
                q = V[previous, a] + np.exp(length * log_gamma)
                improved = has_a & (q > best_q)
                best_q = np.where(improved, q, best_q)
                best_c = np.where(improved, length, best_c)
            C[with_k, k] = best_c
            V[with_k, k] = best_q

    full = (1 << n) - 1
    return HeldKarpTables(C, V, float(np.max(V[full])))


# ========== Droite ==========

def _walk_out(origin, positions, weights, gamma):
    """Valeur de la collecte des positions dans l'ordre, depuis origin, sans demi-tour."""
    if not len(positions):
        return 0.0
    distances = np.abs(np.asarray(positions) - origin)
    return float(np.dot(np.asarray(weights, dtype=float), discount(distances, gamma)))


def line_dp(line, gamma):
    """
    Solution exacte sur une droite en O(n^2) états (l, r, direction).

    Les récompenses collectées forment toujours un intervalle contenant le
    départ. Les états où un seul côté reste à collecter sont initialisés par
    la marche explicite vers l'extérieur ; les autres sont remplis par nombre
    croissant de récompenses restantes. Les récompenses situées exactement
    au départ sont collectées gratuitement avant la DP. En cas d'égalité, la
    gauche est préférée.

    Args:
        line: LineInstance
        gamma: Facteur d'actualisation

    Returns:
        ExactSolution (tournée indexée comme line.to_instance(gamma))
    """
    if not isinstance(line, LineInstance):
        raise InvalidLine(f"LineInstance attendue, reçu {type(line).__name__}")
    check_gamma(gamma)
    start = line.start

    # Indices globaux (ordre croissant) -> récompenses de l'instance développée
    rewards_at, next_reward = [], 1
    for weight in line.weights:
        rewards_at.append(list(range(next_reward, next_reward + weight)))
        next_reward += weight

    free = [q for q, p in enumerate(line.positions) if p == start]
    kept = [q for q, p in enumerate(line.positions) if p != start]
    P = [line.positions[q] for q in kept]
    w = [line.weights[q] for q in kept]
    m = len(P)
    a = sum(1 for p in P if p < start)

    def position(l, r, side):
        return P[l] if side == LEFT else P[r - 1]

    table = {}

    def value_of(l, r, side):
        return table[(l, r, side)][0]

    for remaining in range(0, m):
        for l in range(0, min(a, remaining) + 1):
            r = m - (remaining - l)
            if r < a or r > m:
                continue
            for side in (LEFT, RIGHT):
                if side == LEFT and l >= a:
                    continue
                if side == RIGHT and r <= a:
                    continue
                here = position(l, r, side)
                if l == 0:
                    table[(l, r, side)] = (_walk_out(here, P[r:], w[r:], gamma), RIGHT)
                    continue
                if r == m:
                    table[(l, r, side)] = (
                        _walk_out(here, P[:l][::-1], w[:l][::-1], gamma), LEFT
                    )
                    continue
                go_left = discount(here - P[l - 1], gamma) * (w[l - 1] + value_of(l - 1, r, LEFT))
                go_right = discount(P[r] - here, gamma) * (w[r] + value_of(l, r + 1, RIGHT))
                table[(l, r, side)] = (go_left, LEFT) if go_left >= go_right else (go_right, RIGHT)

    order = [reward for q in free for reward in rewards_at[q]]
    if m:
        go_left = go_right = -1.0
        if a > 0:
            go_left = discount(start - P[a - 1], gamma) * (w[a - 1] + value_of(a - 1, a, LEFT))
        if a < m:
            go_right = discount(P[a] - start, gamma) * (w[a] + value_of(a, a + 1, RIGHT))
        if go_left >= go_right:
            l, r, side = a - 1, a, LEFT
        else:
            l, r, side = a, a + 1, RIGHT
        order.extend(rewards_at[kept[l if side == LEFT else r - 1]])
        while l > 0 or r < m:
            step = table[(l, r, side)][1]
            if step == LEFT:
                l, side = l - 1, LEFT
                order.extend(rewards_at[kept[l]])
            else:
                r, side = r + 1, RIGHT
                order.extend(rewards_at[kept[r - 1]])

    return _solution(line.to_instance(gamma), order, 'line_dp')


# ========== d-étoile ==========

def dstar_dp(star, gamma, max_arms=3, max_rewards=60):
    """
    Solution exacte sur une d-étoile, départ au centre.

    L'état est (nombre de récompenses collectées par bras, bras courant) ;
    l'agent se trouve sur la dernière récompense collectée de son bras, ou au
    centre au départ. Les états où un seul bras reste à collecter sont
    initialisés par la marche explicite vers l'extérieur. En cas d'égalité,
    le bras de plus petit indice est préféré.

    Raises:
        InvalidStar: entrée qui n'est pas une DStarInstance
        TooLarge: plus de max_arms bras ou de max_rewards récompenses
    """
    if not isinstance(star, DStarInstance):
        raise InvalidStar(f"DStarInstance attendue, reçu {type(star).__name__}")
    check_gamma(gamma)
    arms = star.arms
    d = star.d
    if d > max_arms or star.n > max_rewards:
        raise TooLarge(
            f"d-étoile limitée à {max_arms} bras et {max_rewards} récompenses "
            f"(d={d}, n={star.n})"
        )
    sizes = [len(arm) for arm in arms]
    offsets = star.offsets()

    def depth(counts, current):
        return 0.0 if current < 0 else arms[current][counts[current] - 1]

    def hop(counts, current, target):
        here = depth(counts, current)
        there = arms[target][counts[target]]
        return abs(there - here) if target == current else here + there

    table = {}
    all_counts = sorted(itertools.product(*[range(size + 1) for size in sizes]),
                        key=lambda counts: -sum(counts))
    for counts in all_counts:
        open_arms = [i for i in range(d) if counts[i] < sizes[i]]
        if sum(counts) == 0:
            currents = [-1]
        else:
            currents = [i for i in range(d) if counts[i] > 0]
        for current in currents:
            if not open_arms:
                table[(counts, current)] = (0.0, None)
                continue
            if len(open_arms) == 1:
                target = open_arms[0]
                here = depth(counts, current)
                rest = arms[target][counts[target]:]
                if target == current:
                    distances = [v - here for v in rest]
                else:
                    distances = [v + here for v in rest]
                value = float(np.sum(discount(np.asarray(distances), gamma)))
                table[(counts, current)] = (value, target)
                continue
            best, best_arm = -1.0, None
            for target in open_arms:
                following = list(counts)
                following[target] += 1
                following = tuple(following)
                value = discount(hop(counts, current, target), gamma) * (
                    1.0 + table[(following, target)][0]
                )
                if value > best:
                    best, best_arm = value, target
            table[(counts, current)] = (best, best_arm)

    counts, current, order = tuple([0] * d), -1, []
    while len(order) < star.n:
        target = table[(counts, current)][1]
        order.append(offsets[target] + counts[target] + 1)
        following = list(counts)
        following[target] += 1
        counts, current = tuple(following), target

    return _solution(star.to_instance(gamma), order, 'dstar_dp')


# ========== Reconnaissance des géométries ==========

def line_from_instance(inst, tolerance=1e-9):
    """
    Droite équivalente à une instance euclidienne dont tous les points sont
    alignés.

    Returns:
        tuple: (LineInstance, rewards) où rewards[k] est la récompense de
            l'instance placée au rang k + 1 de la droite développée, ou None
            si l'instance n'a pas de coordonnées ou n'est pas alignée
    """
    if inst.coords is None:
        return None
    centered = inst.coords - inst.coords[0]
    norms = np.hypot(centered[:, 0], centered[:, 1])
    far = int(np.argmax(norms))
    if norms[far] == 0:
        axis = np.array([1.0, 0.0])
    else:
        axis = centered[far] / norms[far]
    off_line = np.abs(centered[:, 0] * axis[1] - centered[:, 1] * axis[0])
    if off_line.max() > tolerance * max(1.0, norms[far]):
        return None
    positions = centered[1:] @ axis
    rewards = np.argsort(positions, kind='stable') + 1
    return LineInstance(0.0, positions.tolist()), rewards.tolist()


def dstar_from_instance(inst, tolerance=1e-9):
    """
    d-étoile centrée au départ équivalente à une instance dont la métrique est
    celle d'un arbre en étoile : même bras → |p - q|, bras différents → p + q.

    Returns:
        tuple: (DStarInstance, rewards), même convention que
            line_from_instance, ou None si la métrique n'est pas une d-étoile
    """
    dist = inst.dist
    depth = dist[0]
    if np.any(depth[1:] <= 0):
        return None
    arms = []
    for reward in inst.rewards:
        for arm in arms:
            head = arm[0]
            if abs(dist[reward, head] - abs(depth[reward] - depth[head])) <= tolerance:
                arm.append(reward)
                break
        else:
            arms.append([reward])
    rewards = []
    for arm in arms:
        rewards.extend(sorted(arm, key=lambda reward: depth[reward]))
    star = DStarInstance(tuple(tuple(depth[reward] for reward in arm) for arm in arms))
    nodes = [0] + rewards
    expected = star.to_instance(inst.gamma).dist
    if not np.allclose(dist[np.ix_(nodes, nodes)], expected, rtol=0.0,
                       atol=tolerance * max(1.0, float(depth.max()))):
        return None
    return star, rewards


def _relabel(inst, solution, rewards):
    """Ramène une solution de droite ou d'étoile aux indices de l'instance."""
    order = [rewards[reward - 1] for reward in solution.tour.order]
    return _solution(inst, order, solution.solver)


# ========== Service ==========

class ExactSolverService:
    """
    Service de résolution exacte : choisit le solveur selon la taille.
    """

    SOLVERS = ('brute_force', 'held_karp', 'line_dp', 'dstar_dp')

    def __init__(self, logger=None, settings=None):
        """
        Initialise le service.

        Args:
            logger: Logger pour les messages (optionnel)
            settings: Réglages (défaut : get_settings())
        """
        self.logger = logger
        self.settings = settings or get_settings()

    def log(self, level, message):
        """Log un message si logger disponible."""
        if self.logger:
            getattr(self.logger, level)(message)

    def solve(self, inst, solver=None):
        """
        Résout une instance.

        Sans solveur explicite : force brute jusqu'à n = 8, Held-Karp au-delà
        tant que la garde le permet, puis la DP de droite ou de d-étoile si
        la géométrie de l'instance s'y prête.

        Raises:
            TooLarge: aucune méthode exacte ne s'applique
            InvalidLine: line_dp demandé sur une instance non alignée
            InvalidStar: dstar_dp demandé sur une métrique qui n'est pas une d-étoile
        """
        if solver is None:
            solver = self.pick(inst)
        if solver == 'brute_force':
            solution = brute_force(inst, self.settings['brute_force_max_n'])
        elif solver == 'held_karp':
            solution = held_karp(inst, self.settings['held_karp_max_n'])
        elif solver == 'line_dp':
            solution = self.solve_line(inst)
        elif solver == 'dstar_dp':
            solution = self.solve_star(inst)
        else:
            raise ValueError(f"Solveur inconnu : {solver}")
        self.log('info', f"  {solver}: n={inst.n} valeur={solution.value:.6f}")
        return solution

    def pick(self, inst):
        if inst.n <= 8:
            return 'brute_force'
        if inst.n <= self.settings['held_karp_max_n']:
            return 'held_karp'
        tolerance = self.settings['triangle_tolerance']
        if line_from_instance(inst, tolerance) is not None:
            return 'line_dp'
        if dstar_from_instance(inst, tolerance) is not None:
            return 'dstar_dp'
        raise TooLarge(
            f"n={inst.n} dépasse Held-Karp ({self.settings['held_karp_max_n']}) "
            f"et l'instance n'est ni une droite ni une d-étoile"
        )

    def solve_line(self, inst):
        found = line_from_instance(inst, self.settings['triangle_tolerance'])
        if found is None:
            raise InvalidLine("Les points de l'instance ne sont pas alignés")
        line, rewards = found
        return _relabel(inst, line_dp(line, inst.gamma), rewards)

    def solve_star(self, inst):
        found = dstar_from_instance(inst, self.settings['triangle_tolerance'])
        if found is None:
            raise InvalidStar("La métrique de l'instance n'est pas une d-étoile centrée au départ")
        star, rewards = found
        solution = dstar_dp(star, inst.gamma,
                            self.settings['dstar_max_arms'],
                            self.settings['dstar_max_rewards'])
        return _relabel(inst, solution, rewards)
