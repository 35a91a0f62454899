from django.apps import AppConfig


class BackcastConfig(AppConfig):
    name = 'backcast'
