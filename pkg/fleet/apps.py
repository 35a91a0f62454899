from django.apps import AppConfig


class FleetConfig(AppConfig):
    name = 'fleet'
    verbose_name = 'Fleet turnover model'
