"""
Django settings for the genuine-operads project.

For more information on this file, see
https://docs.djangoproject.com/en/5.2/topics/settings/

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

from pathlib import Path
import os

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get("SECRET_KEY", "genop-development-key-not-for-production")

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = os.environ.get("DEBUG", "False").lower() in ("1", "true", "yes")

ALLOWED_HOSTS = ["localhost", "127.0.0.1", "testserver"]

# Cache settings (the JSON API caches reports by canonical command text)
CACHES = {
    "default": {
        "BACKEND": "django.core.cache.backends.locmem.LocMemCache",
        "LOCATION": "genop-report-cache",
    }
}

# Application definition

INSTALLED_APPS = [
    "genop",
]

MIDDLEWARE = [
    "django.middleware.security.SecurityMiddleware",
    "django.middleware.common.CommonMiddleware",
    "django.middleware.csrf.CsrfViewMiddleware",
]

ROOT_URLCONF = "genuine_operads.urls"

WSGI_APPLICATION = "genuine_operads.wsgi.application"


# Database
# https://docs.djangoproject.com/en/5.2/ref/settings/#databases

DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": BASE_DIR / "db.sqlite3",
    }
}


# Internationalization
# https://docs.djangoproject.com/en/5.2/topics/i18n/

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = True

USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"


# --- Logging ---
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {"format": "%(levelname)s %(name)s: %(message)s"},
    },
    "handlers": {
        "stderr": {
            "class": "logging.StreamHandler",
            "formatter": "plain",
        },
    },
    "loggers": {
        "genop": {
            "handlers": ["stderr"],
            "level": os.environ.get("GENOP_LOG_LEVEL", "WARNING"),
            "propagate": False,
        },
    },
}


# --- Enumeration bounds and workers ---
GENOP = {
    "SUBGROUP_BOUND": int(os.environ.get("GENOP_SUBGROUP_BOUND", 64)),
    "ENUMERATION_BOUND": int(os.environ.get("GENOP_ENUMERATION_BOUND", 100000)),
    "ARITY_BOUND": int(os.environ.get("GENOP_ARITY_BOUND", 4)),
    "MAX_GV": int(os.environ.get("GENOP_MAX_GV", 3)),
    "DEPTH": int(os.environ.get("GENOP_DEPTH", 2)),
    "THREADS": int(os.environ.get("GENOP_THREADS", os.cpu_count() or 1)),
}
