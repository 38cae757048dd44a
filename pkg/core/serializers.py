import math

from rest_framework import serializers

from core.exceptions import ExprSyntaxError, InvalidExponent
from core.numerics.exprlang import as_expr
from core.numerics.funcspace import INF, parse_exponent


# Champs

class ComplexField(serializers.Field):
    """Nombre réel ou paire [re, im]"""
    default_error_messages = {
        'invalid': "Nombre attendu : réel ou paire [re, im].",
        'not_finite': "Le nombre doit être fini.",
    }

    def __init__(self, *, as_pair=False, **kwargs):
        self.as_pair = as_pair
        super().__init__(**kwargs)

    def _real(self, value):
        if isinstance(value, bool):
            self.fail('invalid')
        if isinstance(value, (int, float)):
            return float(value)
        if isinstance(value, str):
            try:
                return float(value)
            except ValueError:
                self.fail('invalid')
        self.fail('invalid')

    def to_internal_value(self, data):
        if isinstance(data, (list, tuple)):
            if len(data) != 2:
                self.fail('invalid')
            value = complex(self._real(data[0]), self._real(data[1]))
        else:
            value = complex(self._real(data))
        if not (math.isfinite(value.real) and math.isfinite(value.imag)):
            self.fail('not_finite')
        return value

    def to_representation(self, value):
        value = complex(value)
        if value.imag == 0 and not self.as_pair:
            return value.real
        return [value.real, value.imag]


class ExpressionField(serializers.Field):
    """Expression en t (voir core.numerics.exprlang) ou nombre"""
    default_error_messages = {
        'invalid': "Expression attendue (texte ou nombre).",
    }

    def to_internal_value(self, data):
        if isinstance(data, bool) or not isinstance(data, (str, int, float)):
            self.fail('invalid')
        try:
            return as_expr(data)
        except ExprSyntaxError as exc:
            raise serializers.ValidationError(f"Expression invalide : {exc}")

    def to_representation(self, value):
        return str(value)


class ExponentField(serializers.Field):
    """Exposant de Lebesgue p >= 1 ou 'inf'"""

    def to_internal_value(self, data):
        if isinstance(data, bool):
            raise serializers.ValidationError("Exposant invalide.")
        try:
            return parse_exponent(data)
        except (InvalidExponent, TypeError) as exc:
            raise serializers.ValidationError(str(exc))

    def to_representation(self, value):
        return 'inf' if value == INF else float(value)


class ExtendedFloatField(serializers.FloatField):
    """Flottant pouvant valoir +inf (rendu 'inf')"""

    def to_representation(self, value):
        return 'inf' if value == math.inf else float(value)


def matrix_field(child_class, **kwargs):
    return serializers.ListField(
        child=serializers.ListField(child=child_class(), allow_empty=False),
        allow_empty=False,
        **kwargs,
    )


def matrix_shape(matrix):
    """(lignes, colonnes), ou None si les lignes n'ont pas toutes la même longueur"""
    widths = {len(row) for row in matrix}
    if len(widths) != 1:
        return None
    return len(matrix), widths.pop()


# Fichier de problème

class IntervalSerializer(serializers.Serializer):
    a = serializers.FloatField()
    b = serializers.FloatField()
    grid_points = serializers.IntegerField(min_value=5, required=False)

    def validate_grid_points(self, value):
        if value % 2 == 0:
            raise serializers.ValidationError("Le nombre de points doit être impair (règle de Simpson).")
        return value

    def validate(self, data):
        if not (math.isfinite(data['a']) and math.isfinite(data['b'])):
            raise serializers.ValidationError({'non_field_errors': ["Les bornes doivent être finies."]})
        if data['a'] >= data['b']:
            raise serializers.ValidationError({'b': ["b doit être strictement supérieur à a."]})
        return data


class DimensionsSerializer(serializers.Serializer):
    m = serializers.IntegerField(min_value=1)
    n = serializers.IntegerField(min_value=1)
    r = serializers.IntegerField(min_value=1)
    p = ExponentField(required=False, default=2.0)


class CoefficientSerializer(serializers.Serializer):
    matrix = matrix_field(ExpressionField, required=False)
    csv = serializers.CharField(required=False)

    def validate(self, data):
        if ('matrix' in data) == ('csv' in data):
            raise serializers.ValidationError(
                {'non_field_errors': ["Indiquer soit 'matrix' soit 'csv' (exactement un des deux)."]}
            )
        return data


class ForcingSerializer(serializers.Serializer):
    vector = serializers.ListField(child=ExpressionField(), allow_empty=False, required=False)
    csv = serializers.CharField(required=False)

    def validate(self, data):
        if ('vector' in data) == ('csv' in data):
            raise serializers.ValidationError(
                {'non_field_errors': ["Indiquer soit 'vector' soit 'csv' (exactement un des deux)."]}
            )
        return data


class TwoPointParamsSerializer(serializers.Serializer):
    M_a = matrix_field(ComplexField)
    M_b = matrix_field(ComplexField)


class PointSerializer(serializers.Serializer):
    t = serializers.FloatField()
    M = matrix_field(ComplexField)


class MultipointParamsSerializer(serializers.Serializer):
    points = PointSerializer(many=True, allow_empty=False)


class IntegralParamsSerializer(serializers.Serializer):
    kernel = matrix_field(ExpressionField)


class CauchyParamsSerializer(serializers.Serializer):
    r = serializers.IntegerField(min_value=1, required=False)


PRESET_PARAMS = {
    'two_point': TwoPointParamsSerializer,
    'multipoint': MultipointParamsSerializer,
    'integral': IntegralParamsSerializer,
    'cauchy_padded': CauchyParamsSerializer,
    'cauchy_truncated': CauchyParamsSerializer,
}

SQUARE_PRESETS = ('initial_value', 'endpoint', 'periodic')


class BoundarySerializer(serializers.Serializer):
    preset = serializers.ChoiceField(choices=[*SQUARE_PRESETS, *PRESET_PARAMS], required=False)
    params = serializers.DictField(required=False, allow_null=True)
    alphas = serializers.ListField(child=matrix_field(ComplexField), allow_empty=False, required=False)
    phi = matrix_field(ExpressionField, required=False)
    stack = serializers.ListField(child=serializers.DictField(), allow_empty=False, required=False)
    measure = serializers.JSONField(required=False)

    def validate_measure(self, value):
        raise serializers.ValidationError(
            "Les opérateurs définis par des mesures finiment additives ne sont pas pris en charge ; "
            "utiliser la forme canonique alphas + phi."
        )

    def validate(self, data):
        forms = [key for key in ('preset', 'alphas', 'stack') if key in data]
        if len(forms) != 1:
            raise serializers.ValidationError(
                {'non_field_errors': ["Indiquer exactement une forme : 'preset', 'alphas' (et 'phi') ou 'stack'."]}
            )
        if 'phi' in data and 'alphas' not in data:
            raise serializers.ValidationError({'phi': ["'phi' ne s'utilise qu'avec 'alphas'."]})

        preset = data.get('preset')
        if preset:
            params = data.get('params') or {}
            params_class = PRESET_PARAMS.get(preset)
            if params_class is None:
                if params:
                    raise serializers.ValidationError(
                        {'params': [f"Le préréglage '{preset}' n'accepte aucun paramètre."]}
                    )
                data['params'] = {}
            else:
                params_serializer = params_class(data=params)
                if not params_serializer.is_valid():
                    raise serializers.ValidationError({'params': params_serializer.errors})
                data['params'] = dict(params_serializer.validated_data)

        if 'stack' in data:
            items, errors = [], {}
            for position, item in enumerate(data['stack']):
                item_serializer = BoundarySerializer(data=item)
                if item_serializer.is_valid():
                    items.append(dict(item_serializer.validated_data))
                else:
                    errors[position] = item_serializer.errors
            if errors:
                raise serializers.ValidationError({'stack': errors})
            data['stack'] = items
        return data

    def to_representation(self, instance):
        data = super().to_representation(instance)
        preset = instance.get('preset')
        if preset in PRESET_PARAMS:
            data['params'] = PRESET_PARAMS[preset](instance.get('params', {})).data
        else:
            data.pop('params', None)
        if 'stack' in instance:
            data['stack'] = [BoundarySerializer(item).data for item in instance['stack']]
        return data


def boundary_rows(boundary, m, r):
    """Nombre de conditions portées par une section boundary validée"""
    if 'stack' in boundary:
        return sum(boundary_rows(item, m, None) for item in boundary['stack'])
    if 'alphas' in boundary:
        return len(boundary['alphas'][0])
    preset, params = boundary['preset'], boundary.get('params', {})
    if preset in SQUARE_PRESETS:
        return m
    if preset == 'two_point':
        return len(params['M_a'])
    if preset == 'multipoint':
        return len(params['points'][0]['M'])
    if preset == 'integral':
        return len(params['kernel'])
    return params.get('r', r)


def _check_shape(matrix, shape, what):
    actual = matrix_shape(matrix)
    if actual != shape:
        found = 'lignes de longueurs différentes' if actual is None else f"{actual[0]}x{actual[1]}"
        return [f"{what} doit être {shape[0]}x{shape[1]} (reçu : {found})."]
    return None


def boundary_errors(boundary, interval, m, n, r):
    """Contrôles croisés d'une section boundary avec les dimensions du problème"""
    errors = {}
    if 'stack' in boundary:
        stack_errors = {}
        for position, item in enumerate(boundary['stack']):
            item_rows = boundary_rows(item, m, None)
            if item_rows is None:
                stack_errors[position] = {'params': {'r': ["Préciser r pour une condition de Cauchy empilée."]}}
                continue
            item_errors = boundary_errors(item, interval, m, n, item_rows)
            if item_errors:
                stack_errors[position] = item_errors
        if stack_errors:
            return {'stack': stack_errors}
        total = boundary_rows(boundary, m, r)
        if total != r:
            errors['non_field_errors'] = [f"Les conditions empilées totalisent {total} lignes, r = {r}."]
        return errors

    if 'alphas' in boundary:
        if len(boundary['alphas']) != n:
            errors['alphas'] = [f"{n} matrice(s) alpha attendue(s) (une par ordre de dérivée < n)."]
        else:
            alpha_errors = {}
            for k, alpha in enumerate(boundary['alphas']):
                problem = _check_shape(alpha, (r, m), f"alpha_{k}")
                if problem:
                    alpha_errors[k] = problem
            if alpha_errors:
                errors['alphas'] = alpha_errors
        if 'phi' in boundary:
            problem = _check_shape(boundary['phi'], (r, m), 'phi')
            if problem:
                errors['phi'] = problem
        return errors

    preset, params = boundary['preset'], boundary.get('params', {})
    if preset in SQUARE_PRESETS and r != m:
        errors['preset'] = [f"Le préréglage '{preset}' impose r = m (r = {r}, m = {m})."]
    elif preset == 'two_point':
        param_errors = {}
        for name in ('M_a', 'M_b'):
            problem = _check_shape(params[name], (r, m), name)
            if problem:
                param_errors[name] = problem
        if param_errors:
            errors['params'] = param_errors
    elif preset == 'multipoint':
        point_errors = {}
        for position, point in enumerate(params['points']):
            problems = {}
            if not interval['a'] <= point['t'] <= interval['b']:
                problems['t'] = [f"t = {point['t']} est hors de [{interval['a']}, {interval['b']}]."]
            shape_problem = _check_shape(point['M'], (r, m), 'M')
            if shape_problem:
                problems['M'] = shape_problem
            if problems:
                point_errors[position] = problems
        if point_errors:
            errors['params'] = {'points': point_errors}
    elif preset == 'integral':
        problem = _check_shape(params['kernel'], (r, m), 'kernel')
        if problem:
            errors['params'] = {'kernel': problem}
    elif preset == 'cauchy_padded' and not r > m:
        errors['preset'] = [f"cauchy_padded demande r > m (r = {r}, m = {m})."]
    elif preset == 'cauchy_truncated' and not r < m:
        errors['preset'] = [f"cauchy_truncated demande r < m (r = {r}, m = {m})."]
    return errors


class ProblemFileSerializer(serializers.Serializer):
    description = serializers.CharField(required=False, allow_blank=True)
    interval = IntervalSerializer()
    dimensions = DimensionsSerializer()
    coefficient = CoefficientSerializer()
    forcing = ForcingSerializer(required=False)
    boundary = BoundarySerializer()
    rhs = serializers.ListField(child=ComplexField(), allow_empty=False)

    def validate(self, data):
        m, n, r = (data['dimensions'][key] for key in ('m', 'n', 'r'))
        errors = {}
        matrix = data['coefficient'].get('matrix')
        if matrix is not None:
            problem = _check_shape(matrix, (m, m), 'A')
            if problem:
                errors['coefficient'] = {'matrix': problem}
        vector = data.get('forcing', {}).get('vector')
        if vector is not None and len(vector) != m:
            errors['forcing'] = {'vector': [f"f doit avoir m = {m} composantes (reçu : {len(vector)})."]}
        if len(data['rhs']) != r:
            errors['rhs'] = [f"c doit avoir r = {r} composantes (reçu : {len(data['rhs'])})."]
        problems = boundary_errors(data['boundary'], data['interval'], m, n, r)
        if problems:
            errors['boundary'] = problems
        if errors:
            raise serializers.ValidationError(errors)
        return data


def flatten_errors(detail, prefix=''):
    """Aplatis les erreurs DRF en lignes 'chemin.du.champ: message'"""
    lines = []
    if isinstance(detail, dict):
        for key, value in detail.items():
            if key == 'non_field_errors':
                path = prefix
            elif isinstance(key, int) or (isinstance(key, str) and key.isdigit()):
                path = f"{prefix}[{key}]"
            else:
                path = f"{prefix}.{key}" if prefix else str(key)
            lines.extend(flatten_errors(value, path))
    elif isinstance(detail, (list, tuple)):
        if all(isinstance(item, (dict, list)) for item in detail):
            for position, item in enumerate(detail):
                if item:
                    lines.extend(flatten_errors(item, f"{prefix}[{position}]"))
        else:
            for item in detail:
                lines.append(f"{prefix or 'fichier'}: {item}")
    else:
        lines.append(f"{prefix or 'fichier'}: {detail}")
    return lines


# Rapports

class FredholmReportSerializer(serializers.Serializer):
    m = serializers.IntegerField()
    r = serializers.IntegerField()
    n = serializers.IntegerField()
    p = ExponentField()
    index = serializers.IntegerField()
    rank = serializers.IntegerField()
    dim_kernel = serializers.IntegerField()
    dim_cokernel = serializers.IntegerField()
    well_posed = serializers.BooleanField()
    det_BY = ComplexField(as_pair=True, allow_null=True)
    condition_number = ExtendedFloatField()
    rank_tolerance = serializers.FloatField()
    singular_values = serializers.ListField(child=serializers.FloatField())
    marginal_rank = serializers.BooleanField()


def render_value(value):
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if value is None:
        return 'null'
    if isinstance(value, (list, tuple)):
        return '[' + ', '.join(render_value(item) for item in value) + ']'
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_key_values(data):
    """Lignes 'clé: valeur' lisibles et stables"""
    return [f"{key}: {render_value(value)}" for key, value in data.items()]
