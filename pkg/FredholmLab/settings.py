"""
Django settings for FredholmLab project.

Le projet n'expose aucune vue web : Django fournit ici la configuration,
les commandes de gestion (manage.py diagnose, solve, ...) et le lanceur de tests.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.1/ref/settings/
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get(
    'DJANGO_SECRET_KEY',
    'django-insecure-7c1q$0v!fz2n8w3m@k4p^r6x+t9b&h5j(e)d-s_a=u0y#gl1io'
)

DEBUG = True

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'rest_framework',
    'core'
]

# Pas de base de données : les problèmes sont lus depuis des fichiers YAML.
DATABASES = {}


# Internationalization

LANGUAGE_CODE = 'fr-fr'

USE_TZ = True
TIME_ZONE = 'Africa/Douala'

USE_I18N = True


# Paramètres numériques par défaut (surchargeables par les options des commandes)

FREDHOLM = {
    'GRID_POINTS': int(os.environ.get('FREDHOLM_GRID_POINTS', 1001)),
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


# Logging

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '{levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'core': {
            'handlers': ['console'],
            'level': os.environ.get('FREDHOLM_LOG_LEVEL', 'WARNING'),
        },
    },
}
