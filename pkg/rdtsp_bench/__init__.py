import copy
import os


class RdtspConfig:
    name = 'rdtsp_bench'
    verbose_name = 'RD-TSP Bench'
    description = 'Politiques locales, solveurs exacts et banc de mesure pour le RD-TSP'
    version = '0.3'

    default_settings = {
        'workers': 1,
        'n_maps': 10,  # Graphes générés par (scénario, n)
        'n_alg': 100,  # Exécutions par politique stochastique et par graphe
        'n_list': [100, 200, 400, 600, 800, 1000],
        'triangle_tolerance': 1e-9,
        'coord_tolerance': 1e-12,  # Relative
        'underflow_floor': 1e-300,
        'brute_force_max_n': 10,
        'held_karp_max_n': 20,
        'dstar_max_arms': 3,
        'dstar_max_rewards': 60,
        'render_k': 8,  # On n'affiche que les n/k premières récompenses
        'canvas_size': 800,
        'rdfs_travel': 'shortcut',  # ou 'tree' pour payer les retours arrière
        'rng_algorithm': 'PCG64',
        'generator_version': '0.3',
    }

    @classmethod
    def get_settings(cls, **overrides):
        """
        Retourne une copie des réglages effectifs.

        Ordre de priorité : overrides explicites, puis variable
        d'environnement RDTSP_WORKERS, puis default_settings.
        """
        settings = copy.deepcopy(cls.default_settings)
        workers = os.environ.get('RDTSP_WORKERS')
        if workers:
            settings['workers'] = int(workers)
        for key, value in overrides.items():
            if value is not None:
                settings[key] = value
        return settings


config = RdtspConfig
get_settings = RdtspConfig.get_settings
__version__ = RdtspConfig.version
