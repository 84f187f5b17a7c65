"""
Serializers for model configurations and hyperparameter search spaces.

This module contains serializers for:
    - STLM configurations (per-district lag structure and network settings)
    - HSTM configurations (Stage-1 per-feature settings, Stage-2 per district)
    - STLM and HSTM search spaces (grids sampled by the randomized search)

Nothing is served over HTTP: the serializers validate the JSON files passed
to the management commands and render configuration dataclasses back to
JSON. `create()` returns the engine's frozen dataclasses.
"""

from rest_framework import serializers

from .features import FEATURE_TYPES
from .forecasters.hstm import HstmConfig, Stage1FeatureConfig
from .forecasters.stlm import StlmConfig, StlmDistrictConfig
from .search import HstmSearchSpace, Stage1SearchSpace, StlmSearchSpace

# ============================================================================
# Utilities
# ============================================================================


def _positive(value):
    if value <= 0:
        raise serializers.ValidationError("Must be positive.")
    return value


def _grid(child, **kwargs):
    return serializers.ListField(child=child, min_length=1, **kwargs)


def _check_features(value):
    """Require exactly one entry per yearly feature type."""
    missing = [name for name in FEATURE_TYPES if name not in value]
    unknown = [name for name in value if name not in FEATURE_TYPES]
    if missing or unknown:
        problems = []
        if missing:
            problems.append(f"missing {', '.join(missing)}")
        if unknown:
            problems.append(f"unknown {', '.join(unknown)}")
        raise serializers.ValidationError("; ".join(problems))
    return value


# ============================================================================
# Configurations
# ============================================================================


class StlmDistrictSerializer(serializers.Serializer):
    """
    One district's hyperparameters.

    Shared by STLM configurations and the Stage-2 part of HSTM
    configurations; input_dim is derived (p + k·q) and never stored.
    """

    p = serializers.IntegerField(min_value=1)
    k = serializers.IntegerField(min_value=0)
    q = serializers.IntegerField(min_value=1)
    hidden_units = serializers.ListField(
        child=serializers.IntegerField(min_value=1), min_length=1
    )
    learning_rate = serializers.FloatField(validators=[_positive])
    l1_alpha = serializers.FloatField(min_value=0)
    epochs = serializers.IntegerField(min_value=0)
    batch_size = serializers.IntegerField(min_value=1, default=32)
    patience = serializers.IntegerField(min_value=1, default=10)
    val_fraction = serializers.FloatField(min_value=0, max_value=0.5, default=0.1)

    def create(self, validated_data):
        return StlmDistrictConfig(**validated_data)


class StlmConfigSerializer(serializers.Serializer):
    model = serializers.ChoiceField(choices=["stlm"], default="stlm")
    seed = serializers.IntegerField(default=0)
    districts = serializers.DictField(child=StlmDistrictSerializer(), allow_empty=False)

    def to_representation(self, instance):
        data = super().to_representation(instance)
        data["model"] = "stlm"
        return data

    def create(self, validated_data):
        return StlmConfig(
            districts={
                name: StlmDistrictConfig(**values)
                for name, values in validated_data["districts"].items()
            },
            seed=validated_data["seed"],
        )


class Stage1FeatureSerializer(serializers.Serializer):
    """ρ_f = (span, p, q, k, L, lam) for one yearly feature."""

    span = serializers.IntegerField(min_value=1)
    p = serializers.IntegerField(min_value=1)
    q = serializers.IntegerField(min_value=1)
    k = serializers.IntegerField(min_value=0)
    L = serializers.IntegerField(min_value=2)
    lam = serializers.FloatField(min_value=0)

    def create(self, validated_data):
        return Stage1FeatureConfig(**validated_data)


class HstmConfigSerializer(serializers.Serializer):
    model = serializers.ChoiceField(choices=["hstm"], default="hstm")
    seed = serializers.IntegerField(default=0)
    stage1 = serializers.DictField(child=Stage1FeatureSerializer())
    stage2 = serializers.DictField(child=StlmDistrictSerializer(), allow_empty=False)

    def to_representation(self, instance):
        data = super().to_representation(instance)
        data["model"] = "hstm"
        return data

    def validate_stage1(self, value):
        return _check_features(value)

    def create(self, validated_data):
        return HstmConfig(
            stage1={
                name: Stage1FeatureConfig(**values)
                for name, values in validated_data["stage1"].items()
            },
            stage2={
                name: StlmDistrictConfig(**values)
                for name, values in validated_data["stage2"].items()
            },
            seed=validated_data["seed"],
        )


class Stage1TableSerializer(serializers.Serializer):
    """A Stage-1 settings table on its own, such as the shipped reference table."""

    stage1 = serializers.DictField(child=Stage1FeatureSerializer())

    def validate_stage1(self, value):
        return _check_features(value)

    def create(self, validated_data):
        return {
            name: Stage1FeatureConfig(**values)
            for name, values in validated_data["stage1"].items()
        }


# ============================================================================
# Search spaces
# ============================================================================


class StlmSearchSpaceSerializer(serializers.Serializer):
    """
    Grids for one district's hyperparameters; every district draws from the same grids.

    `hidden_units` is the grid for every hidden layer; `hidden_layers` sets
    how many layers are drawn.
    """

    p = _grid(serializers.IntegerField(min_value=1))
    k = _grid(serializers.IntegerField(min_value=0))
    q = _grid(serializers.IntegerField(min_value=1))
    hidden_units = _grid(serializers.IntegerField(min_value=1))
    learning_rate = _grid(serializers.FloatField(validators=[_positive]))
    l1_alpha = _grid(serializers.FloatField(min_value=0))
    epochs = _grid(serializers.IntegerField(min_value=0))
    batch_size = _grid(serializers.IntegerField(min_value=1), default=[32])
    hidden_layers = serializers.IntegerField(min_value=1, default=2)
    patience = serializers.IntegerField(min_value=1, default=10)
    val_fraction = serializers.FloatField(min_value=0, max_value=0.5, default=0.1)

    def create(self, validated_data):
        return StlmSearchSpace(
            **{
                key: tuple(value) if isinstance(value, list) else value
                for key, value in validated_data.items()
            }
        )


class Stage1SearchSpaceSerializer(serializers.Serializer):
    span = _grid(serializers.IntegerField(min_value=1))
    p = _grid(serializers.IntegerField(min_value=1))
    q = _grid(serializers.IntegerField(min_value=1))
    k = _grid(serializers.IntegerField(min_value=0))
    L = _grid(serializers.IntegerField(min_value=2))
    lam = _grid(serializers.FloatField(min_value=0))

    def create(self, validated_data):
        return Stage1SearchSpace(**{key: tuple(value) for key, value in validated_data.items()})


class HstmSearchSpaceSerializer(serializers.Serializer):
    stage1 = Stage1SearchSpaceSerializer()
    stage2 = StlmSearchSpaceSerializer()

    def create(self, validated_data):
        return HstmSearchSpace(
            stage1=Stage1SearchSpaceSerializer().create(validated_data["stage1"]),
            stage2=StlmSearchSpaceSerializer().create(validated_data["stage2"]),
        )


# ============================================================================
# Lookup
# ============================================================================

CONFIG_SERIALIZERS = {
    "stlm": StlmConfigSerializer,
    "hstm": HstmConfigSerializer,
}

SEARCH_SPACE_SERIALIZERS = {
    "stlm": StlmSearchSpaceSerializer,
    "hstm": HstmSearchSpaceSerializer,
}


def load_config(model: str, payload: dict):
    """Validate a configuration payload and return its dataclass."""
    serializer = CONFIG_SERIALIZERS[model](data=payload)
    serializer.is_valid(raise_exception=True)
    return serializer.save()


def load_search_space(model: str, payload: dict):
    serializer = SEARCH_SPACE_SERIALIZERS[model](data=payload)
    serializer.is_valid(raise_exception=True)
    return serializer.save()


def render_config(config) -> dict:
    serializer = StlmConfigSerializer if isinstance(config, StlmConfig) else HstmConfigSerializer
    return serializer(config).data


def load_stage1_table(payload: dict) -> dict:
    serializer = Stage1TableSerializer(data=payload)
    serializer.is_valid(raise_exception=True)
    return serializer.save()
