"""
Accès aux paramètres numériques du projet.

Les valeurs viennent du dictionnaire FREDHOLM de settings.py ; les clés absentes
retombent sur DEFAULTS. La lecture est faite à chaque accès pour que
override_settings fonctionne dans les tests.
"""
from django.conf import settings
from django.core.exceptions import ImproperlyConfigured


DEFAULTS = {
    'GRID_POINTS': 1001,
    'RANK_TOL': 1e-8,
    'MARGINAL_FACTOR': 10.0,
    'DET_FLOOR': 1e-12,
    'CONSISTENCY_TOL': 1e-7,
    'MAX_CONDITION': 1e12,
    'ORACLE_GRID_POINTS': 41,
    'ORACLE_RANK_TOL': 1e-6,
    'ORACLE_SPECTRAL_GAP': 1e3,
    'ORACLE_MAX_REFINEMENTS': 2,
    'ORACLE_AMBIGUITY_RATIO': 1e-2,
}


class FredholmSettings:

    def __getattr__(self, name):
        if name not in DEFAULTS:
            raise AttributeError(f"Paramètre FREDHOLM inconnu : '{name}'")
        try:
            user_settings = getattr(settings, 'FREDHOLM', {})
        except ImproperlyConfigured:
            # utilisation en bibliothèque, sans projet Django configuré
            user_settings = {}
        return user_settings.get(name, DEFAULTS[name])


fredholm_settings = FredholmSettings()


def resolve(value, name):
    """Retourne value si elle est fournie, sinon le paramètre name"""
    return getattr(fredholm_settings, name) if value is None else value
