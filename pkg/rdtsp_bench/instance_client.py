import json
import logging
import os
import sys

from . import get_settings
from .exceptions import RdtspError, UsageError
from .models import ExperimentConfig
from .serializers import InstanceSerializer, RunSerializer, to_builtin

logger = logging.getLogger(__name__)


class InstanceFileClient:
    """
    Client pour lire et écrire les fichiers du banc : instances, configurations
    de banc, sorties d'exécution et documents SVG.

    Le chemin '-' désigne la sortie standard en écriture.
    """

    def __init__(self, validate=True, settings=None):
        """
        Initialise le client.

        Args:
            validate: Vérifier les invariants des instances relues
            settings: Réglages (défaut : get_settings())
        """
        self.validate = validate
        self.settings = settings or get_settings()
        self.instances = InstanceSerializer()
        self.runs = RunSerializer()

    def _load(self, path):
        """Lit un fichier JSON."""
        try:
            with open(path, encoding='utf-8') as f:
                return json.load(f)
        except FileNotFoundError as e:
            logger.error(f"Fichier introuvable : {path}")
            raise RdtspError(f"Fichier introuvable : {path}") from e
        except json.JSONDecodeError as e:
            logger.error(f"JSON invalide dans {path}: {e}")
            raise RdtspError(f"JSON invalide dans {path}: {e}") from e
        except OSError as e:
            logger.error(f"Erreur de lecture de {path}: {e}")
            raise RdtspError(f"Erreur de lecture de {path}: {e}") from e

    def write_text(self, path, text):
        """Écrit un texte (fichier ou sortie standard)."""
        if path in (None, '-'):
            sys.stdout.write(text)
            if not text.endswith('\n'):
                sys.stdout.write('\n')
            return
        try:
            directory = os.path.dirname(os.path.abspath(path))
            os.makedirs(directory, exist_ok=True)
            with open(path, 'w', encoding='utf-8', newline='') as f:
                f.write(text)
        except OSError as e:
            logger.error(f"Erreur d'écriture de {path}: {e}")
            raise RdtspError(f"Erreur d'écriture de {path}: {e}") from e
        logger.debug(f"Fichier écrit : {path}")

    def _dump(self, path, data):
        self.write_text(path, json.dumps(to_builtin(data), indent=2) + '\n')

    # ========== Instances ==========

    def read_instance(self, path):
        """
        Lit une instance.

        Returns:
            MetricInstance (validée si le client le demande)
        """
        inst = self.instances.from_dict(self._load(path))
        if self.validate:
            inst.clean(self.settings['triangle_tolerance'], self.settings['coord_tolerance'])
        logger.debug(f"Instance lue : {path} (n={inst.n})")
        return inst

    def write_instance(self, path, inst):
        self._dump(path, self.instances.to_dict(inst))

    # ========== Configuration du banc ==========

    def read_config(self, path, **overrides):
        """
        Lit une configuration de banc (champs d'ExperimentConfig).

        Les champs absents prennent les valeurs par défaut ; les overrides non
        None (graine, workers) remplacent ceux du fichier.

        Raises:
            UsageError: master_seed absent ou champ inconnu
        """
        data = self._load(path)
        if not isinstance(data, dict):
            raise UsageError(f"La configuration {path} doit être un objet JSON")
        data.update({key: value for key, value in overrides.items() if value is not None})
        known = set(ExperimentConfig.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        if unknown:
            raise UsageError(f"Champs inconnus dans {path}: {', '.join(unknown)}")
        if data.get('master_seed') is None:
            raise UsageError("master_seed manquant (fichier ou --seed)")
        if 'scenarios' not in data:
            raise UsageError(f"scenarios manquant dans {path}")
        defaults = {
            'n_list': self.settings['n_list'],
            'n_maps': self.settings['n_maps'],
            'n_alg': self.settings['n_alg'],
            'workers': self.settings['workers'],
        }
        for key, value in defaults.items():
            data.setdefault(key, value)
        try:
            return ExperimentConfig(**data)
        except TypeError as e:
            raise UsageError(f"Configuration invalide dans {path}: {e}") from e

    # ========== Sorties d'exécution ==========

    def read_runs(self, path):
        """Relit une sortie de solve : liste de (Tour, valeur)."""
        return self.runs.tours(self._load(path))

    def write_json(self, path, data):
        self._dump(path, data)
