"""
Django settings for the fleet backcasting project
"""

from pathlib import Path
import os

from dotenv import load_dotenv

BASE_DIR = Path(__file__).resolve().parent.parent

load_dotenv(BASE_DIR / '.env')

SECRET_KEY = os.environ.get('DJANGO_SECRET_KEY', 'django-insecure-fleet-backcast-local')

DEBUG = os.environ.get('DEBUG', 'True') == 'True'

ALLOWED_HOSTS = []

# Application definition
INSTALLED_APPS = [
    'django.contrib.auth',
    'django.contrib.contenttypes',
    # Third-party apps
    'rest_framework',
    # Local apps
    'fleet',
    'backcast',
    'calibration',
]

# No persistence beyond files
DATABASES = {}

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'Europe/Paris'
USE_I18N = True
USE_TZ = True

# Backcasting run defaults (overridden by --config files and command flags)
BACKCAST = {
    'FIXTURES_DIR': Path(os.environ.get('BACKCAST_FIXTURES_DIR', BASE_DIR / 'data' / 'france')),
    'OUT_DIR': Path(os.environ.get('BACKCAST_OUT_DIR', BASE_DIR / 'out')),
    'WORKERS': int(os.environ.get('BACKCAST_WORKERS', '1')),
    'START_YEAR': 2022,
    'END_YEAR': 2050,
    'TOL_EMISSIONS_GT': 1e-4,
    'TOL_GRAD': 1e-6,
    'MAX_OUTER_ITERATIONS': 80,
    'MAX_INNER_ITERATIONS': 400,
    'INITIAL_INCENTIVE': 5000.0,  # € per EV, starting point of every inner solve
    'IC_AMOUNT': 5000.0,
    'PARETO_TARGETS_GT': [0.98, 0.96, 0.91, 0.87, 0.82, 0.73],
}

# Logging Configuration
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {process:d} {thread:d} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': os.environ.get('BACKCAST_LOG_LEVEL', 'INFO'),
    },
    'loggers': {
        # Per-iteration solver traces are DEBUG; keep them out of normal runs
        'backcast.ocp': {
            'level': os.environ.get('BACKCAST_SOLVER_LOG_LEVEL', 'INFO'),
        },
    },
}
