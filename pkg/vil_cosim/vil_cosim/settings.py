"""
Django settings for vil_cosim project.

Generated by 'django-admin startproject' using Django 5.2.4.

For more information on this file, see
https://docs.djangoproject.com/en/5.2/topics/settings/

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# Quick-start development settings - unsuitable for production
# See https://docs.djangoproject.com/en/5.2/howto/deployment/checklist/

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get(
    "VIL_SECRET_KEY",
    "django-insecure-u7r!c0s1m-9qz4w%x&l8n2k5t@v6b1h3j0p#e7d4a2f8g5m9c1",
)

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = os.environ.get("VIL_DEBUG", "1") == "1"

ALLOWED_HOSTS = ["localhost", "127.0.0.1"]


# Application definition

INSTALLED_APPS = [
    "django.contrib.admin",
    "django.contrib.auth",
    "django.contrib.contenttypes",
    "django.contrib.sessions",
    "django.contrib.messages",
    "django.contrib.staticfiles",
    "rest_framework",
    "django_filters",
    "drf_yasg",
    "track",
    "drivers",
    "qpsolver",
    "mpc",
    "wire",
    "energy",
    "sim",
    "experiments",
]

MIDDLEWARE = [
    "django.middleware.security.SecurityMiddleware",
    "django.contrib.sessions.middleware.SessionMiddleware",
    "django.middleware.common.CommonMiddleware",
    "django.middleware.csrf.CsrfViewMiddleware",
    "django.contrib.auth.middleware.AuthenticationMiddleware",
    "django.contrib.messages.middleware.MessageMiddleware",
    "django.middleware.clickjacking.XFrameOptionsMiddleware",
]

ROOT_URLCONF = "vil_cosim.urls"

TEMPLATES = [
    {
        "BACKEND": "django.template.backends.django.DjangoTemplates",
        "DIRS": [],
        "APP_DIRS": True,
        "OPTIONS": {
            "context_processors": [
                "django.template.context_processors.request",
                "django.contrib.auth.context_processors.auth",
                "django.contrib.messages.context_processors.messages",
            ],
        },
    },
]

WSGI_APPLICATION = "vil_cosim.wsgi.application"


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


# Static files (CSS, JavaScript, Images)
# https://docs.djangoproject.com/en/5.2/howto/static-files/

STATIC_URL = "static/"

# Default primary key field type
# https://docs.djangoproject.com/en/5.2/ref/settings/#default-auto-field

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

REST_FRAMEWORK = {
    'DEFAULT_PERMISSION_CLASSES': (
        'rest_framework.permissions.AllowAny',
    ),
    'DEFAULT_FILTER_BACKENDS': (
        'django_filters.rest_framework.DjangoFilterBackend',
    ),
}

SWAGGER_SETTINGS = {
    'USE_SESSION_AUTH': False,
    'SECURITY_DEFINITIONS': {},
}


# Logging

LOG_LEVEL = os.environ.get("VIL_LOG_LEVEL", "INFO").upper()

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "{asctime} {levelname} {name} {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        },
    },
    "root": {
        "handlers": ["console"],
        "level": "WARNING",
    },
    "loggers": {
        app: {"handlers": ["console"], "level": LOG_LEVEL, "propagate": False}
        for app in (
            "track", "drivers", "qpsolver", "mpc", "wire",
            "energy", "sim", "experiments",
        )
    },
}


# Co-simulation defaults. Every key can be overridden from a flat
# `key = value` file or a VIL_<KEY> environment variable (dots become `__`),
# see experiments.config.load_config.

VIL_COSIM = {
    # circuit
    "straight_length": 1550.0,
    "turn_diameter": 95.0,
    "v_straight": 22.3,
    "v_turn": 7.0,
    "a_c": -2.0,
    "vehicle_length": 5.0,
    "limit_lead_time": 0.275,

    # timing and network
    "tick": 0.1,
    "v2v_delay": 0.1,
    "stale_timeout": 0.5,
    "clock_sync_period": 1.0,
    "server_host": "127.0.0.1",
    "server_port": 47600,
    "client_port": 0,
    "time_scale": 1.0,

    # outputs
    "trace_all_vehicles": False,
    "qp_dump_dir": "",

    # chance constraint
    "sigma_a": 10.84,

    # MPC, shared entries
    "mpc.q_g": 1.0,
    "mpc.d_min": 2.0,
    "mpc.rho1": 1e6,
    "mpc.rho2": 5e5,
    "mpc.rho3": 5e5,
    "mpc.rho4": 1e6,
    "mpc.m1": 0.285,
    "mpc.m2": -0.121,
    "mpc.b1": 2.00,
    "mpc.b2": 4.83,
    "mpc.u_min": -5.5,
    "mpc.tau_a": 0.275,
    "mpc.dt_h": 1.0,
    "mpc.alpha_lo": 0.5,
    "mpc.alpha_hi": 0.99999,
    "mpc.t_f": 10.0,
    "mpc.per_stage_slacks": False,

    # MPC profiles
    "mpc_u.N": 16,
    "mpc_u.q_a": 2050.0,
    "mpc_u.T": 1.3,
    "mpc_u.d_r": 2.0,
    "mpc_c.N": 17,
    "mpc_c.q_a": 4000.0,
    "mpc_c.T": 0.0,
    "mpc_c.d_r": 6.0,

    # QP solver
    "qp.tol": 1e-6,
    "qp.max_iter": 4000,

    # Wiedemann 99
    "wie.cc0": 3.00,
    "wie.cc1": 1.35,
    "wie.cc2": 8.00,
    "wie.cc3": -8.00,
    "wie.cc4": -0.35,
    "wie.cc5": 0.35,
    "wie.cc6": 11.4,
    "wie.cc7": 0.25,
    "wie.cc8": 3.50,
    "wie.cc9": 1.50,
    "wie.driver_random": 0.35,

    # IDM
    "idm.a0": 1.52,
    "idm.b0": 3.24,
    "idm.T": 1.02,
    "idm.s0": 10.0,
    "idm.delta": 4.0,

    # energy
    "energy.mass": 1500.0,
    "energy.c0": 120.0,
    "energy.c1": 1.0,
    "energy.c2": 0.55,
    "energy.eta_drive": 0.85,
    "energy.eta_regen": 0.60,
    "energy.icev_efficiency": 0.30,
    "energy.rich_power_start": 30000.0,
    "energy.rich_power_full": 60000.0,
    "energy.lambda_min": 0.70,
    "energy.fuel_lhv": 32.0e6,
    "energy.afr_s": 14.1,
    "energy.r_s": 0.1,
    "energy.maf_bin_width": 10.0,

    # scenarios
    "scenario.n_vehicles": 74,
    "scenario.n_cav_string": 5,
    "scenario.ego_index": 37,
    "scenario.laps": 6,
    "scenario.cycle_laps": 3,
    "scenario.upstream_count": 11,
    "scenario.max_time": 3600.0,

    # drive cycles
    "cycle.us06": "",
    "cycle.udds": "",
    "cycle.us06_scale": 0.6,
    "cycle.udds_scale": 0.8,
}
