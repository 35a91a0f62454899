"""
Serializers for fleet fixture files

Validate the rows of the CSV inputs (one serializer per row schema) and the
model parameter file. Values arrive as strings from the CSV reader.
"""

import math

from rest_framework import serializers

PARAMS_SCHEMA_VERSION = 1


class FiniteFloatField(serializers.FloatField):
    """FloatField rejecting NaN and infinities."""

    def to_internal_value(self, data):
        value = super().to_internal_value(data)
        if not math.isfinite(value):
            raise serializers.ValidationError('A finite number is required.')
        return value


class YearValueRowSerializer(serializers.Serializer):
    """Row of a `year,value` series."""
    year = serializers.IntegerField(min_value=1900, max_value=2200)
    value = FiniteFloatField()


class PositiveYearValueRowSerializer(YearValueRowSerializer):

    def validate_value(self, value):
        if value <= 0:
            raise serializers.ValidationError('Value must be positive.')
        return value


class NonNegativeYearValueRowSerializer(YearValueRowSerializer):
    value = FiniteFloatField(min_value=0.0)


class FractionYearValueRowSerializer(YearValueRowSerializer):
    value = FiniteFloatField(min_value=0.0, max_value=1.0)


class CostRowSerializer(serializers.Serializer):
    """Row of a `year,thermal,electric` cost table."""
    year = serializers.IntegerField(min_value=1900, max_value=2200)
    thermal = FiniteFloatField()
    electric = FiniteFloatField()

    def validate(self, attrs):
        if attrs['thermal'] <= 0 or attrs['electric'] <= 0:
            raise serializers.ValidationError('Costs must be positive.')
        return attrs


class SurvivalRowSerializer(serializers.Serializer):
    """Row of the `age,value` survival table."""
    age = serializers.IntegerField(min_value=1)
    value = FiniteFloatField()

    def validate_value(self, value):
        if not 0 < value <= 1:
            raise serializers.ValidationError('Survival rate must lie in (0, 1].')
        return value


class FleetRowSerializer(serializers.Serializer):
    """Row of the `type,age,count` initial fleet."""
    type = serializers.ChoiceField(choices=['thermal', 'electric'])
    age = serializers.IntegerField(min_value=0)
    count = FiniteFloatField(min_value=0.0)


class LogitSerializer(serializers.Serializer):
    purchase = FiniteFloatField(max_value=0.0)
    operating = FiniteFloatField(max_value=0.0)
    infrastructure = FiniteFloatField(max_value=0.0)
    scale = FiniteFloatField()

    def validate_scale(self, value):
        if value <= 0:
            raise serializers.ValidationError('Logit scale must be positive.')
        return value


class BassSerializer(serializers.Serializer):
    p = FiniteFloatField(min_value=0.0, max_value=1.0)
    q = FiniteFloatField(min_value=0.0)


class ModelParamsSerializer(serializers.Serializer):
    """
    model_params.json, schema version 1.

    Survival rates and new-car emission factors are given either inline or
    as CSV files relative to the JSON file.
    """
    schema_version = serializers.IntegerField()
    logit = LogitSerializer()
    bass = BassSerializer()
    survival = serializers.ListField(child=FiniteFloatField(), required=False, allow_empty=False)
    survival_file = serializers.CharField(required=False)
    emission_factor_new = serializers.DictField(child=FiniteFloatField(min_value=0.0), required=False)
    emission_factor_file = serializers.CharField(required=False)
    mileage_km = FiniteFloatField(required=False, min_value=0.0)

    def validate_schema_version(self, value):
        if value != PARAMS_SCHEMA_VERSION:
            raise serializers.ValidationError(
                f'Unsupported schema version {value}; expected {PARAMS_SCHEMA_VERSION}.'
            )
        return value

    def validate_survival(self, value):
        if any(not 0 < eta <= 1 for eta in value):
            raise serializers.ValidationError('Survival rates must lie in (0, 1].')
        return value

    def validate_emission_factor_new(self, value):
        try:
            return {int(year): factor for year, factor in value.items()}
        except ValueError:
            raise serializers.ValidationError('Keys must be model years.')

    def validate(self, attrs):
        if 'survival' not in attrs and 'survival_file' not in attrs:
            raise serializers.ValidationError('Give either survival or survival_file.')
        if 'emission_factor_new' not in attrs and 'emission_factor_file' not in attrs:
            raise serializers.ValidationError(
                'Give either emission_factor_new or emission_factor_file.'
            )
        return attrs
