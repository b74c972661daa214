"""
Доступ до числових параметрів за замовчуванням.

Якщо Django налаштовано, значення беруться з settings.FACTORIZATION,
інакше (бібліотека використовується напряму) діють вбудовані значення.
"""

BUILTIN_DEFAULTS = {
    'TOL': 1e-8,
    'SAMPLES': 16,
    'SEED': 0,
    'MAX_DEGREE': 12,
    'ANCHOR': '0',
    'TRACKING_MIN_STEPS': 64,
    'CLUSTER_TOL': 1e-9,
    'VERIFY_TOL': 1e-7,
    'AXIS_TILT': 'auto',
    'VERSION': '1.0.0',
}


def get_defaults() -> dict:
    """
    Повертає словник параметрів класифікатора.

    :return: Копія FACTORIZATION з налаштувань, доповнена вбудованими значеннями.
    :rtype: dict
    """
    from django.conf import settings

    values = dict(BUILTIN_DEFAULTS)
    if settings.configured:
        values.update(getattr(settings, 'FACTORIZATION', {}))
    return values
