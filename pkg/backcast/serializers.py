"""
Serializers for backcasting runs

Validate run configuration files and scenario requests coming from the
command line, and shape the summaries written next to result tables.
"""

import math

from rest_framework import serializers

from fleet.serializers import FiniteFloatField

CONFIG_SCHEMA_VERSION = 1

SCENARIO_KINDS = ['I0', 'IC', 'IP', 'BI', 'optimal', 'pareto']
REFERENCE_KINDS = ['I0', 'IC', 'IP', 'BI']


class RunConfigSerializer(serializers.Serializer):
    """
    Run configuration, schema version 1.

    Paths are resolved by the caller; tolerances are in Gt (emissions) and
    relative projected-gradient reduction.
    """
    schema_version = serializers.IntegerField()
    fixtures_dir = serializers.CharField()
    params_file = serializers.CharField(required=False, allow_null=True, allow_blank=True)
    start_year = serializers.IntegerField(min_value=1900, max_value=2200)
    end_year = serializers.IntegerField(min_value=1900, max_value=2200)
    out_dir = serializers.CharField()
    workers = serializers.IntegerField(min_value=1, max_value=256)
    tol_emissions_gt = FiniteFloatField()
    tol_grad = FiniteFloatField()
    max_outer_iterations = serializers.IntegerField(min_value=1)
    max_inner_iterations = serializers.IntegerField(min_value=1)
    initial_incentive = FiniteFloatField(min_value=0.0)
    ic_amount = FiniteFloatField(min_value=0.0)

    def validate_schema_version(self, value):
        if value != CONFIG_SCHEMA_VERSION:
            raise serializers.ValidationError(
                f'Unsupported schema version {value}; expected {CONFIG_SCHEMA_VERSION}.'
            )
        return value

    def validate_tol_emissions_gt(self, value):
        if value <= 0:
            raise serializers.ValidationError('Tolerance must be positive.')
        return value

    def validate_tol_grad(self, value):
        if not 0 < value < 1:
            raise serializers.ValidationError('Gradient tolerance must lie in (0, 1).')
        return value

    def validate(self, attrs):
        if attrs['start_year'] >= attrs['end_year']:
            raise serializers.ValidationError('start_year must precede end_year.')
        return attrs


class ScenarioSpecSerializer(serializers.Serializer):
    """A scenario request: a reference policy, one target, or a target sweep."""
    kind = serializers.ChoiceField(choices=SCENARIO_KINDS)
    amount = FiniteFloatField(required=False, min_value=0.0)
    target_gt = FiniteFloatField(required=False)
    targets_gt = serializers.ListField(child=FiniteFloatField(), required=False, allow_empty=False)

    def validate_target_gt(self, value):
        if value <= 0:
            raise serializers.ValidationError('Target must be positive.')
        return value

    def validate_targets_gt(self, value):
        if any(target <= 0 for target in value):
            raise serializers.ValidationError('Targets must be positive.')
        return value

    def validate(self, attrs):
        if attrs['kind'] == 'optimal' and 'target_gt' not in attrs:
            raise serializers.ValidationError('An optimal scenario needs target_gt.')
        if attrs['kind'] == 'pareto' and 'targets_gt' not in attrs:
            raise serializers.ValidationError('A sweep needs targets_gt.')
        return attrs


class NullableFloatField(serializers.FloatField):
    """Renders non-finite values as null."""

    def to_representation(self, value):
        value = float(value)
        return value if math.isfinite(value) else None


class ScenarioSummarySerializer(serializers.Serializer):
    scenario = serializers.CharField()
    cum_emissions_gt = NullableFloatField()
    budget_geur = NullableFloatField()
    ev_stock_final_millions = NullableFloatField()
    target_gt = NullableFloatField(required=False)
    nu = NullableFloatField(required=False)
    iterations = serializers.IntegerField(required=False)
    max_stationarity = NullableFloatField(required=False)
    converged = serializers.BooleanField(required=False)
    reference_budget_geur = NullableFloatField(required=False)
    saving_percent = NullableFloatField(required=False)
    reduced_cum_emissions_gt = NullableFloatField(required=False)
    reduced_budget_geur = NullableFloatField(required=False)
    model_mismatch = serializers.BooleanField(required=False)


class FrontierPointSerializer(serializers.Serializer):
    target_gt = NullableFloatField()
    cum_emissions_gt = NullableFloatField(allow_null=True)
    budget_geur = NullableFloatField(allow_null=True)
    nu = NullableFloatField(allow_null=True)
    status = serializers.CharField()
