from django.apps import AppConfig


class QpsolverConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "qpsolver"
    verbose_name = "QP solver"
