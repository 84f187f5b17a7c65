"""
Django settings for the rainways forecasting project.

This project has no database and no web surface: Django provides the settings
layer, logging configuration, app registry and the management-command CLI.
Values are loaded from environment variables (optionally via a local `.env`
file next to this module), but the only variable that changes what the engine
produces is RAINWAYS_OUTPUT_DIR, the default root for command outputs.

Engine defaults live in the FORECASTING dictionary. Management commands read
them and pass them down explicitly; the numerical modules never import Django.
"""

from pathlib import Path

import environ

# ==============================================================================
# CORE SETTINGS
# ==============================================================================

# ------------------------------------------------------------------------------
# Paths
# ------------------------------------------------------------------------------
BASE_DIR = Path(__file__).resolve().parent.parent


# ------------------------------------------------------------------------------
# Environment
# ------------------------------------------------------------------------------
env = environ.Env(
    DJANGO_ENV=(str, "development"),
)

env.read_env(Path(__file__).parent / ".env")

DJANGO_ENV = env("DJANGO_ENV")
# No sessions, no signing: the key only satisfies Django's startup checks.
SECRET_KEY = env("DJANGO_SECRET_KEY", default="rainways-cli-without-sessions")

IS_PRODUCTION = DJANGO_ENV == "production"
DEBUG = not IS_PRODUCTION

ALLOWED_HOSTS = []


# ==============================================================================
# APPLICATION DEFINITION
# ==============================================================================

INSTALLED_APPS = [
    # Local apps
    "apps.forecasting",
    # Third-party apps
    "rest_framework",
]

DATABASES = {}


# ==============================================================================
# INTERNATIONALIZATION
# ==============================================================================

LANGUAGE_CODE = "en-gb"
TIME_ZONE = "UTC"
USE_I18N = False
USE_TZ = True


# ==============================================================================
# LOGGING
# ==============================================================================

LOG_DIR = BASE_DIR / "logs"
LOG_DIR.mkdir(exist_ok=True)

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "{levelname} - {asctime} - {module} - {process:d} - {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "level": "INFO",
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        },
        "forecasting_file": {
            "level": "DEBUG",
            "class": "logging.handlers.RotatingFileHandler",
            "filename": LOG_DIR / "forecasting.log",
            "maxBytes": 5 * 1024 * 1024,
            "backupCount": 3,
            "formatter": "verbose",
        },
    },
    "loggers": {
        "apps.forecasting": {
            "handlers": ["console", "forecasting_file"],
            "level": "INFO" if IS_PRODUCTION else "DEBUG",
            "propagate": False,
        },
    },
}


# ==============================================================================
# THIRD-PARTY SETTINGS
# ==============================================================================

# ------------------------------------------------------------------------------
# Django REST Framework
# ------------------------------------------------------------------------------
# Serializers validate JSON config files only; nothing is served over HTTP.
REST_FRAMEWORK = {
    "DEFAULT_AUTHENTICATION_CLASSES": [],
    "DEFAULT_PERMISSION_CLASSES": [],
    "UNAUTHENTICATED_USER": None,
}


# ==============================================================================
# FORECASTING ENGINE
# ==============================================================================

FORECASTING = {
    # Outputs (the one environment override that affects results on disk)
    "OUTPUT_DIR": Path(env("RAINWAYS_OUTPUT_DIR", default=str(BASE_DIR / "var" / "runs"))),
    # Ingestion
    "STATION_COLUMNS": {
        "station_id": "station_id",
        "district": "district",
        "date": "date",
        "rainfall": "rainfall_mm",
        "latitude": "latitude",
        "longitude": "longitude",
    },
    "MAX_REJECTED_FRACTION": 0.1,
    "DATE_RANGE": ("1900-01-01", "2019-12-31"),
    "TRAIN_END": "2010-12",
    # Stage-1 regression
    "LASSO_TOL": 1e-7,
    "LASSO_MAX_ITER": 10_000,
    # Cross-validation and search
    "CV_FOLDS": 5,
    "CV_VAL_MONTHS": 120,
    "SEARCH_SAMPLES": 2000,
    # Climate analytics
    "SPI_BASELINE": (1900, 1970),
    "SPI_THRESHOLD": 1.65,
    "DECADES": ((1971, 1980), (1981, 1990), (1991, 2000), (2001, 2010)),
}
