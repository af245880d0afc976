from django.apps import AppConfig


class MpcConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "mpc"
    verbose_name = "Model predictive control"
