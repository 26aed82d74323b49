"""
Forms validating the blocks of a scenario document.

Each block is bound to a form as plain data; unknown keys are rejected and
defaults are filled in after cleaning.
"""
from typing import Dict

from django import forms
from django.core.exceptions import ValidationError

from core_engine.errors import ScenarioError
from core_engine.sim.integrator import EXPLICIT_METHODS, IMPLICIT_METHODS


def validate_positive(value):
    if value is not None and not value > 0:
        raise ValidationError(f'must be > 0, got {value}')


def validate_nonnegative(value):
    if value is not None and value < 0:
        raise ValidationError(f'must be >= 0, got {value}')


class StrictForm(forms.Form):
    """Form over a JSON object: unknown keys are errors, missing optional keys get ``defaults``."""

    defaults: Dict = {}

    @classmethod
    def validate_block(cls, data, block: str) -> Dict:
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ScenarioError(f"{block}: expected an object, got {type(data).__name__}")
        form = cls(data=data)
        unknown = sorted(set(data) - set(form.fields))
        if unknown:
            raise ScenarioError(f"{block}: unknown key(s) {', '.join(unknown)}")
        if not form.is_valid():
            messages = []
            for field, errors in form.errors.items():
                where = block if field == '__all__' else f"{block}.{field}"
                messages.extend(f"{where}: {error}" for error in errors)
            raise ScenarioError('; '.join(messages))
        cleaned = {}
        for name, value in form.cleaned_data.items():
            if name not in data and name in cls.defaults:
                value = cls.defaults[name]
            if value is None and name in cls.defaults:
                value = cls.defaults[name]
            cleaned[name] = value
        return cleaned


class ScenarioForm(StrictForm):
    name = forms.CharField(max_length=200)
    description = forms.CharField(required=False)
    network = forms.JSONField()
    controller = forms.JSONField()
    disturbance = forms.JSONField(required=False)
    schedule = forms.JSONField(required=False)
    simulation = forms.JSONField(required=False)
    dsd = forms.JSONField(required=False)
    costs = forms.JSONField(required=False)
    sweep = forms.JSONField(required=False)
    outputs = forms.JSONField(required=False)

    defaults = {'description': ''}


class NetworkForm(StrictForm):
    builtin = forms.CharField(required=False)
    parameters = forms.JSONField(required=False)
    initial = forms.JSONField(required=False)
    file = forms.CharField(required=False)
    species = forms.JSONField(required=False)
    reactions = forms.JSONField(required=False)
    controlled = forms.CharField(required=False)
    actuated = forms.CharField(required=False)

    defaults = {'parameters': {}, 'initial': {}, 'reactions': []}

    def clean(self):
        cleaned = super().clean()
        sources = [key for key in ('builtin', 'species', 'file') if cleaned.get(key)]
        if len(sources) != 1:
            raise ValidationError('give exactly one of builtin, species or file')
        if cleaned.get('species') and not isinstance(cleaned['species'], list):
            raise ValidationError('species must be a list')
        for key in ('parameters', 'initial'):
            if cleaned.get(key) and not isinstance(cleaned[key], dict):
                raise ValidationError(f'{key} must be an object')
        return cleaned


class ControllerForm(StrictForm):
    mu = forms.FloatField(validators=[validate_positive])
    alpha = forms.FloatField(validators=[validate_positive])
    k = forms.FloatField(validators=[validate_positive])
    v0 = forms.FloatField(required=False, validators=[validate_positive])
    theta = forms.FloatField(required=False, validators=[validate_positive])

    defaults = {'v0': 1.0}


class DisturbanceForm(StrictForm):
    columns = forms.JSONField()
    d = forms.JSONField()

    def clean(self):
        cleaned = super().clean()
        columns, d = cleaned.get('columns'), cleaned.get('d')
        if columns is None or d is None:
            return cleaned
        if not isinstance(columns, list) or not all(isinstance(c, dict) for c in columns):
            raise ValidationError('columns must be a list of {species: weight} objects')
        if not isinstance(d, list) or len(d) != len(columns):
            raise ValidationError(f'd must list one amplitude per column ({len(columns)})')
        if any(not isinstance(value, (int, float)) or value < 0 for value in d):
            raise ValidationError('disturbance amplitudes must be numbers >= 0')
        return cleaned


class RandomProfileForm(StrictForm):
    target = forms.CharField()
    start = forms.FloatField(validators=[validate_nonnegative])
    interval = forms.FloatField(validators=[validate_positive])
    count = forms.IntegerField(min_value=0)
    low = forms.FloatField()
    high = forms.FloatField()
    seed = forms.IntegerField(required=False, min_value=0)

    defaults = {'seed': 0}

    def clean(self):
        cleaned = super().clean()
        low, high = cleaned.get('low'), cleaned.get('high')
        if low is not None and high is not None and high < low:
            raise ValidationError(f'low ({low}) must not exceed high ({high})')
        return cleaned


class ScheduleForm(StrictForm):
    events = forms.JSONField(required=False)
    random_profile = forms.JSONField(required=False)

    defaults = {'events': []}

    def clean_events(self):
        events = self.cleaned_data.get('events') or []
        if not isinstance(events, list):
            raise ValidationError('events must be a list')
        for event in events:
            if not isinstance(event, dict) or set(event) != {'time', 'target', 'value'}:
                raise ValidationError(f'each event needs exactly time, target and value: {event}')
        return events


class SimulationForm(StrictForm):
    t_end = forms.FloatField(required=False, validators=[validate_positive])
    rtol = forms.FloatField(required=False, validators=[validate_positive])
    atol = forms.FloatField(required=False, validators=[validate_positive])
    samples = forms.IntegerField(required=False, min_value=2)
    method = forms.ChoiceField(required=False, choices=[(m, m) for m in EXPLICIT_METHODS + IMPLICIT_METHODS])
    seed = forms.IntegerField(required=False, min_value=0)
    volume_scale = forms.FloatField(required=False, validators=[validate_positive])
    runs = forms.IntegerField(required=False, min_value=1)
    ssa = forms.BooleanField(required=False)
    settling_fraction = forms.FloatField(required=False, min_value=0.0, max_value=0.99)
    averages_from = forms.FloatField(required=False, validators=[validate_nonnegative])
    max_step = forms.FloatField(required=False, validators=[validate_positive])

    defaults = {
        't_end': 100.0,
        'method': 'RK45',
        'seed': 0,
        'runs': 1,
        'settling_fraction': 0.4,
        'max_step': float('inf'),
    }


class DsdForm(StrictForm):
    omega = forms.FloatField(validators=[validate_positive])
    lambda_fast = forms.FloatField(required=False, validators=[validate_positive])
    band = forms.FloatField(required=False, validators=[validate_positive])
    method = forms.ChoiceField(required=False, choices=[(m, m) for m in EXPLICIT_METHODS + IMPLICIT_METHODS])

    defaults = {'lambda_fast': 0.01, 'band': 0.05, 'method': 'LSODA'}


class CostsForm(StrictForm):
    kappa_r = forms.FloatField(required=False, validators=[validate_nonnegative])
    kappa_m = forms.FloatField(required=False, validators=[validate_nonnegative])
    kappa_a = forms.FloatField(required=False, validators=[validate_nonnegative])

    defaults = {'kappa_r': 1.0, 'kappa_m': 1.0, 'kappa_a': 1.0}


class SweepForm(StrictForm):
    parameters = forms.JSONField()
    workers = forms.IntegerField(required=False, min_value=1)

    def clean_parameters(self):
        parameters = self.cleaned_data.get('parameters')
        if not isinstance(parameters, dict) or not parameters:
            raise ValidationError('parameters must map parameter paths to lists of values')
        for path, values in parameters.items():
            if not isinstance(values, list) or not values:
                raise ValidationError(f'{path}: expected a non-empty list of values')
        return parameters


class OutputsForm(StrictForm):
    directory = forms.CharField(required=False)
