"""
Exceptions du paquet rdtsp_bench.

Chaque erreur nommée dans les opérations a sa classe. Les erreurs de
validation portent un code machine et les indices fautifs.
"""


class RdtspError(Exception):
    """Erreur de base du paquet."""


class UsageError(RdtspError):
    """Mauvaise utilisation de la ligne de commande ou de la configuration."""


class InstanceValidationError(RdtspError, ValueError):
    """
    Instance invalide.

    Attributes:
        code: Nom de l'invariant violé (ex: 'NegativeDistance')
        indices: Tuple des indices de noeuds concernés
    """
    code = 'InvalidInstance'

    def __init__(self, message, indices=()):
        super().__init__(message)
        self.indices = tuple(indices)


class InvalidShape(InstanceValidationError):
    code = 'InvalidShape'


class NonSymmetric(InstanceValidationError):
    code = 'NonSymmetric'


class NegativeDistance(InstanceValidationError):
    code = 'NegativeDistance'


class TriangleViolation(InstanceValidationError):
    code = 'TriangleViolation'


class GammaOutOfRange(InstanceValidationError):
    code = 'GammaOutOfRange'


class CoordMismatch(InstanceValidationError):
    code = 'CoordMismatch'


class InvalidTour(RdtspError, ValueError):
    """La tournée n'est pas une permutation des récompenses."""


class InvalidHistory(RdtspError, ValueError):
    """Historique d'observation invalide (revisite ou noeud inconnu)."""


class EmptySubset(RdtspError, ValueError):
    pass


class TooLarge(RdtspError, ValueError):
    """L'instance dépasse la garde de taille d'un solveur."""


class InvalidLine(RdtspError, ValueError):
    pass


class InvalidStar(RdtspError, ValueError):
    pass


class UnknownKind(RdtspError, ValueError):
    pass


class NTooSmall(RdtspError, ValueError):
    pass


class PolicyNondeterministic(RdtspError):
    """Deux simulations de la même politique ont donné des tournées différentes."""


class NoReference(RdtspError):
    pass


class NoCoordinates(RdtspError):
    """Instance sans coordonnées : impossible à dessiner sans layout."""


class BenchCellError(RdtspError):
    """
    Échec dans une cellule du banc de mesure.

    Attributes:
        cell: Dict de provenance (scenario, n, map_index, policy)
    """

    def __init__(self, message, cell=None):
        super().__init__(message)
        self.cell = dict(cell or {})

    def __reduce__(self):
        # Les cellules tournent dans des processus séparés
        return (self.__class__, (str(self), self.cell))
