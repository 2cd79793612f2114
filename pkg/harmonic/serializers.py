"""
API serializers for the harmonic application.

ExperimentConfigSerializer is the single validator for experiment configurations: the
REST endpoint, the `opharm run` command and JSON config files all pass through it before
an ExperimentConfig is built.
"""

from rest_framework import serializers

from .exceptions import ConfigurationError, HarmonicError
from .experiments import EXPERIMENT_KINDS, ExperimentConfig
from .models import ExperimentRun, InvariantSuiteRecord
from .testfn import RadialSymbol
from .utils import opharm_setting, parse_p


class PField(serializers.Field):
    """An exponent p >= 1; accepts numbers and 'inf'."""

    def to_internal_value(self, data):
        try:
            p = parse_p(data)
        except (TypeError, ValueError) as exc:
            raise serializers.ValidationError(f"'{data}' is not a valid exponent.") from exc
        if p < 1:
            raise serializers.ValidationError(f"Exponent must be >= 1, got {p}.")
        return p

    def to_representation(self, value):
        return 'inf' if value == float('inf') else value


class ExperimentConfigSerializer(serializers.Serializer):
    """
    Validates an experiment configuration; omitted fields take the OPHARM defaults.
    """
    kind = serializers.ChoiceField(choices=EXPERIMENT_KINDS)
    seed = serializers.IntegerField(min_value=0, max_value=2 ** 64 - 1, required=False)
    d = serializers.IntegerField(min_value=1, max_value=3, required=False)
    N = serializers.IntegerField(min_value=4, required=False)
    n = serializers.IntegerField(min_value=1, max_value=16, required=False)
    band_m = serializers.IntegerField(min_value=0, required=False)
    p_list = serializers.ListField(child=PField(), allow_empty=False, required=False)
    corpus_size = serializers.IntegerField(min_value=1, required=False)
    scales = serializers.IntegerField(min_value=2, required=False)
    symbol = serializers.CharField(required=False)
    discrete_symbol = serializers.CharField(required=False)
    alpha = serializers.FloatField(min_value=0.0, required=False)
    theta = serializers.CharField(required=False)
    zero_mean = serializers.BooleanField(required=False)
    hermitian = serializers.BooleanField(required=False)
    scale = serializers.FloatField(required=False)
    adjoint = serializers.BooleanField(required=False)
    threads = serializers.IntegerField(min_value=1, required=False)
    methods = serializers.ListField(
        child=serializers.ListField(child=serializers.CharField(), min_length=2, max_length=2),
        required=False, allow_null=True)

    def validate_symbol(self, value):
        return self._validate_symbol_name(value)

    def validate_discrete_symbol(self, value):
        return self._validate_symbol_name(value)

    @staticmethod
    def _validate_symbol_name(value):
        try:
            RadialSymbol.from_name(value)
        except (HarmonicError, ValueError) as exc:
            raise serializers.ValidationError(str(exc)) from exc
        return value

    def validate(self, attrs):
        N = attrs.get('N', int(opharm_setting('N')))
        if N & (N - 1):
            raise serializers.ValidationError({'N': f"N must be a power of two, got {N}."})
        try:
            attrs['_config'] = ExperimentConfig(**attrs)
        except ConfigurationError as exc:
            raise serializers.ValidationError(str(exc)) from exc
        return attrs

    def to_config(self) -> ExperimentConfig:
        """The ExperimentConfig of validated data; call after `is_valid()`."""
        return self.validated_data['_config']


class ExperimentRunSerializer(serializers.ModelSerializer):
    """
    Experiment runs: `config` is validated on create, everything else is produced by the
    worker and read-only.
    """
    owner = serializers.HiddenField(default=serializers.CurrentUserDefault())
    owner_name = serializers.CharField(source='owner.username', read_only=True, default=None)

    class Meta:
        model = ExperimentRun
        fields = ['id', 'kind', 'config', 'status', 'summary', 'notes', 'error',
                  'owner', 'owner_name', 'created_at', 'finished_at']
        read_only_fields = ['id', 'kind', 'status', 'summary', 'notes', 'error',
                            'created_at', 'finished_at']

    def validate_config(self, value):
        config_serializer = ExperimentConfigSerializer(data=value)
        config_serializer.is_valid(raise_exception=True)
        return config_serializer.to_config().to_dict()

    def create(self, validated_data):
        validated_data['kind'] = validated_data['config']['kind']
        return ExperimentRun.objects.create(**validated_data)


class ExperimentRowsSerializer(serializers.ModelSerializer):
    class Meta:
        model = ExperimentRun
        fields = ['id', 'kind', 'status', 'rows']
        read_only_fields = fields


class CompanionQuerySerializer(serializers.Serializer):
    phi = serializers.CharField(default='d_poisson')
    mode = serializers.ChoiceField(choices=['continuous', 'discrete'], default='continuous')
    alpha = serializers.FloatField(min_value=0.0, required=False)
    N = serializers.IntegerField(min_value=4, max_value=4096, default=32)

    def validate(self, attrs):
        name = attrs['phi']
        if 'alpha' in attrs and '(' not in name:
            name = f"{name}({attrs['alpha']})"
        try:
            attrs['symbol'] = RadialSymbol.from_name(name)
        except (HarmonicError, ValueError) as exc:
            raise serializers.ValidationError({'phi': str(exc)}) from exc
        return attrs


class InvariantSuiteRecordSerializer(serializers.ModelSerializer):
    ran_at = serializers.DateTimeField(format="%Y-%m-%d %H:%M:%S", read_only=True)

    class Meta:
        model = InvariantSuiteRecord
        fields = ['id', 'ran_at', 'seed', 'passed', 'results']
        read_only_fields = fields
