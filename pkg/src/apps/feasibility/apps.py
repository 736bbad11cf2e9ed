from django.apps import AppConfig


class FeasibilityConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.feasibility'
    verbose_name = 'Feasible force and velocity spaces'
