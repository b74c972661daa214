"""
Django settings for the WienerHopf project.

Проєкт класифікує алгебраїчні матриці-функції G(k) щодо комутативної
факторизації Вінера-Гопфа. Бібліотека та API живуть у застосунку
`factorization`; цей модуль містить лише конфігурацію.

Числові параметри за замовчуванням зібрано у словнику FACTORIZATION, кожен
ключ можна перевизначити змінною оточення (файл .env підтягується через
python-dotenv).
"""

from pathlib import Path
import os
from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

load_dotenv()

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.getenv('SECRET_KEY', 'wiener-hopf-dev-only-key')

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = os.getenv('DEBUG', 'True') == 'True'

ALLOWED_HOSTS = [host for host in os.getenv('ALLOWED_HOSTS', '').split(',') if host]


# Application definition

INSTALLED_APPS = [
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
    'django.contrib.staticfiles',
    'factorization.apps.FactorizationConfig',
    'ninja',
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'django.contrib.sessions.middleware.SessionMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.middleware.csrf.CsrfViewMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]

ROOT_URLCONF = 'WienerHopf.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.request',
                'django.contrib.auth.context_processors.auth',
                'django.contrib.messages.context_processors.messages',
            ],
        },
    },
]


# Database
# https://docs.djangoproject.com/en/5.2/ref/settings/#databases

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}


# Internationalization
# https://docs.djangoproject.com/en/5.2/topics/i18n/

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = True

USE_TZ = True


# Static files (CSS, JavaScript, Images)
# https://docs.djangoproject.com/en/5.2/howto/static-files/

STATIC_URL = 'static/'

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Wiener-Hopf classifier
# Значення за замовчуванням; CLI-прапорці та секція [options] файлу задачі
# мають пріоритет над ними.

FACTORIZATION = {
    'TOL': float(os.getenv('WH_TOL', '1e-8')),
    'SAMPLES': int(os.getenv('WH_SAMPLES', '16')),
    'SEED': int(os.getenv('WH_SEED', '0')),
    'MAX_DEGREE': int(os.getenv('WH_MAX_DEGREE', '12')),
    'ANCHOR': os.getenv('WH_ANCHOR', '0'),
    'TRACKING_MIN_STEPS': int(os.getenv('WH_TRACKING_MIN_STEPS', '64')),
    'CLUSTER_TOL': float(os.getenv('WH_CLUSTER_TOL', '1e-9')),
    'VERIFY_TOL': float(os.getenv('WH_VERIFY_TOL', '1e-7')),
    'AXIS_TILT': os.getenv('WH_AXIS_TILT', 'auto'),
    'VERSION': '1.0.0',
}


# Logging

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'factorization': {
            'handlers': ['console'],
            'level': os.getenv('WH_LOG_LEVEL', 'INFO'),
            'propagate': False,
        },
    },
}
