"""
Django settings for the kas3 project.

Only the pieces the toolkit needs are configured: the single `app` holding the
3-matrix pipeline, logging, and the `KAS3` block with worker and guard limits.
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.environ.get("KAS3_SECRET_KEY", "kas3-local-only")

DEBUG = False

ALLOWED_HOSTS: list[str] = []

# Application definition

INSTALLED_APPS = [
    "app",
]

# No model touches the database; sqlite keeps the test runner happy.
DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": BASE_DIR / "kas3.sqlite3",
    },
}

LANGUAGE_CODE = "en-us"
TIME_ZONE = "UTC"
USE_I18N = False
USE_TZ = False

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

KAS3 = {
    "THREADS": int(os.environ.get("KAS3_THREADS", "1")),
    "LOG_LEVEL": os.environ.get("KAS3_LOG_LEVEL", "INFO"),
    "GUARDS": {
        "KERNEL_DIM": 24,  # cycle space dimension enumerated over GF(p)
        "CODEWORDS": 1 << 24,  # p**dim words in an enumerated span
        "CODE_DIM": 24,  # binary code dimension k
        "SIGNING_EDGES": 20,  # exhaustive Pfaffian signing search
        "RYSER_N": 20,
        "BC_SUBSETS": 100_000,  # column subsets in the Binet-Cauchy sum
        "DENSE_N": 4,  # dense double-permutation oracle
        "CERTIFY_SIDE": 24,  # tensor side for sign certification
        "DIMER_VERTICES": 16,
        "BIJECTION_EDGES": 16,
    },
}

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        },
        "file": {
            "class": "logging.FileHandler",
            "filename": BASE_DIR / "kas3.log",
            "formatter": "verbose",
        },
    },
    "formatters": {
        "verbose": {
            "format": "[{levelname}] {asctime} {name} {message}",
            "style": "{",
        },
    },
    "loggers": {
        "app": {
            "handlers": ["file"],
            "level": KAS3["LOG_LEVEL"],
            "propagate": False,
        },
        "app.management": {
            "handlers": ["console", "file"],
            "level": "WARNING",
            "propagate": False,
        },
    },
}
