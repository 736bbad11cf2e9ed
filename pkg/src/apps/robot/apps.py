from django.apps import AppConfig


class RobotConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.robot'
    verbose_name = 'Planar robot kinematics'
