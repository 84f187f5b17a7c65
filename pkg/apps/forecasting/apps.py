"""
Django app configuration for the forecasting application.
"""

from django.apps import AppConfig


class ForecastingConfig(AppConfig):
    """
    Configuration for the forecasting application.

    The app has no models; it contributes management commands, config
    serializers and fixtures.
    """

    name = "apps.forecasting"
    verbose_name = "Rainfall forecasting"
