"""
Fonctions utilitaires numériques partagées par les services.
"""

import hashlib
import math

import numpy as np

from ..exceptions import GammaOutOfRange


UNDERFLOW_FLOOR = 1e-300


def check_gamma(gamma):
    """
    Vérifie que le facteur d'actualisation est dans ]0, 1[.

    Raises:
        GammaOutOfRange: si gamma est hors bornes ou non fini
    """
    if not isinstance(gamma, (int, float, np.floating)) or not math.isfinite(gamma):
        raise GammaOutOfRange(f"gamma invalide : {gamma!r}")
    if not 0.0 < gamma < 1.0:
        raise GammaOutOfRange(f"gamma doit être dans ]0, 1[ : {gamma}")
    return float(gamma)


def x_of_gamma(gamma):
    """
    Distance de demi-vie x = log_{1/gamma}(2), telle que gamma^x = 1/2.

    Args:
        gamma: Facteur d'actualisation dans ]0, 1[

    Returns:
        float: x
    """
    gamma = check_gamma(gamma)
    return math.log(2.0) / -math.log(gamma)


def gamma_of_x(x):
    """Inverse de x_of_gamma : gamma = 2^(-1/x)."""
    if not x > 0:
        raise GammaOutOfRange(f"x doit être strictement positif : {x}")
    return 2.0 ** (-1.0 / x)


def discount(distance, gamma, floor=UNDERFLOW_FLOOR):
    """
    Calcule gamma^distance sous la forme exp(distance * ln gamma).

    Les valeurs sous `floor` sont ramenées à 0. Accepte un scalaire ou un
    tableau numpy.
    """
    values = np.exp(np.asarray(distance, dtype=float) * math.log(gamma))
    values = np.where(values < floor, 0.0, values)
    if values.ndim == 0:
        return float(values)
    return values


def derive_seed(master_seed, *parts):
    """
    Dérive une graine 64 bits stable à partir d'une graine maître et d'un tuple.

    Utilise blake2b sur la représentation canonique du tuple, donc le
    résultat ne dépend ni de la plateforme ni de PYTHONHASHSEED.

    Args:
        master_seed: Graine maître (int)
        *parts: Composantes (str ou int) identifiant la cellule

    Returns:
        int: Graine dans [0, 2^64)
    """
    canonical = '|'.join([str(int(master_seed))] + [str(part) for part in parts])
    digest = hashlib.blake2b(canonical.encode('utf-8'), digest_size=8).digest()
    return int.from_bytes(digest, 'little')


def ceil_log2(n):
    """Renvoie ceil(log2(n)) pour n >= 1 (0 pour n = 1)."""
    return max(0, (int(n) - 1).bit_length())
