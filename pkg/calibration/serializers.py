"""
Serializers for the historical series used in calibration
"""

from rest_framework import serializers

from fleet.serializers import FiniteFloatField, FractionYearValueRowSerializer


class HistoricalStockRowSerializer(serializers.Serializer):
    """Row of `historical_stock.csv`: s_voa(τ) in vehicles."""
    year = serializers.IntegerField(min_value=1900, max_value=2200)
    type = serializers.ChoiceField(choices=['thermal', 'electric'])
    ownership = serializers.ChoiceField(choices=['private', 'professional'])
    age = serializers.IntegerField(min_value=0)
    count = FiniteFloatField(min_value=0.0)


class HistoricalEmissionsRowSerializer(serializers.Serializer):
    """Row of `historical_emissions.csv`: annual tailpipe CO2 per type in Mt."""
    year = serializers.IntegerField(min_value=1900, max_value=2200)
    thermal = FiniteFloatField(min_value=0.0)
    electric = FiniteFloatField(min_value=0.0)


class EvSalesRowSerializer(FractionYearValueRowSerializer):
    """Row of `ev_sales_share.csv`: EV share of new sales."""
