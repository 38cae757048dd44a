"""Hiérarchie des erreurs du projet."""


class FredholmError(Exception):
    """Base de toutes les erreurs levées par core"""


class GridError(FredholmError, ValueError):
    pass


class DimensionMismatch(FredholmError, ValueError):
    pass


class MissingDerivativeLayers(FredholmError, ValueError):
    pass


class InvalidExponent(FredholmError, ValueError):
    pass


class UnsupportedBoundaryOperator(FredholmError, ValueError):
    pass


class ExprSyntaxError(FredholmError, ValueError):
    """Erreur de syntaxe d'une expression, avec sa position (octets) et le jeton attendu"""

    def __init__(self, message, position, expected=None):
        self.message = message
        self.position = position
        self.expected = expected
        detail = f"position {position} : {message}"
        if expected:
            detail += f" ({expected} attendu)"
        super().__init__(detail)


class DomainFault(FredholmError, ArithmeticError):
    """Évaluation impossible (log de 0, division par 0, ...) au point t"""

    def __init__(self, message, t):
        self.t = t
        super().__init__(f"{message} en t = {t!r}")


class MatricantBlowUp(FredholmError, ArithmeticError):

    def __init__(self, t):
        self.t = t
        super().__init__(f"Valeurs non finies pendant l'intégration de la matricante, atteint t = {t!r}")


class NearSingularError(FredholmError, ArithmeticError):

    def __init__(self, t, det):
        self.t = t
        self.det = det
        super().__init__(f"Matrice quasi singulière en t = {t!r} (|det| = {det:.3e})")


class NotWellPosed(FredholmError):
    """Le problème n'est pas bien posé ; porte le FredholmReport"""

    def __init__(self, report):
        self.report = report
        super().__init__(
            f"Problème non bien posé : r = {report.r}, m = {report.m}, rang [BY] = {report.rank}"
        )


class IllConditionedError(FredholmError, ArithmeticError):

    def __init__(self, condition_number):
        self.condition_number = condition_number
        super().__init__(f"[BY] mal conditionnée (conditionnement {condition_number:.3e})")


class ProblemFileError(FredholmError, ValueError):
    """Fichier de problème invalide ; messages sous la forme 'chemin.du.champ: message'"""

    def __init__(self, messages):
        if isinstance(messages, str):
            messages = [messages]
        self.messages = list(messages)
        super().__init__('\n'.join(self.messages))


class InvalidPerturbation(FredholmError, ValueError):
    pass
