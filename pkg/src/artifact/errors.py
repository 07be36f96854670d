"""Exception types shared by the package.

Every error carries a short machine-readable ``code`` so that the command
line front end can report failures without parsing messages.
"""


class ArtifactError(Exception):
    code = "error"

    def to_json(self):
        return {"error": self.code, "message": str(self)}


class InsufficientPrecision(ArtifactError):
    code = "insufficient_precision"


class HenselFails(ArtifactError):
    code = "hensel_fails"


class NotEisenstein(ArtifactError):
    code = "not_eisenstein"


class NonPolynomialSeries(ArtifactError):
    code = "non_polynomial_series"


class LevelTooLow(ArtifactError):
    code = "level_too_low"


class LevelRaiseRequired(ArtifactError):
    code = "level_raise_required"

    def __init__(self, needed):
        super().__init__(f"a ring of level {needed} is needed and no Lubin-Tate polynomial is attached")
        self.needed = needed

    def to_json(self):
        out = super().to_json()
        out["needed"] = self.needed
        return out


class NotIntegral(ArtifactError):
    """An unghosted Witt entry has negative valuation.

    This is data for the solvability criterion as much as an error: the
    index and valuation are the witness of non-integrality.
    """

    code = "not_integral"

    def __init__(self, index, valuation):
        super().__init__(f"entry {index} has valuation {valuation} < 0")
        self.index = index
        self.valuation = valuation

    def to_json(self):
        out = super().to_json()
        out["index"] = self.index
        out["valuation"] = str(self.valuation)
        return out


class IntegralityViolation(ArtifactError):
    code = "integrality_violation"


class PatternViolation(ArtifactError):
    code = "pattern_violation"


class DegreeNotPositive(ArtifactError):
    code = "degree_not_positive"


class PositiveSupport(ArtifactError):
    code = "positive_support"


class WindowTooShort(ArtifactError):
    code = "window_too_short"

    def __init__(self, message, needed=None):
        super().__init__(message)
        self.needed = needed

    def to_json(self):
        out = super().to_json()
        if self.needed is not None:
            out["needed"] = self.needed
        return out


class WindowExhausted(ArtifactError):
    code = "window_exhausted"


class NotOverconvergent(ArtifactError):
    code = "not_overconvergent"


class NotSolvable(ArtifactError):
    code = "not_solvable"


class NotLubinTate(ArtifactError):
    code = "not_lubin_tate"

    def __init__(self, which, index, detail=""):
        super().__init__(f"congruence '{which}' fails at coefficient {index} {detail}".strip())
        self.which = which
        self.index = index


class LinearStepSingular(ArtifactError):
    code = "linear_step_singular"


class ValidationError(ArtifactError):
    code = "validation_error"

    def __init__(self, field, reason):
        super().__init__(f"{field}: {reason}")
        self.field = field
        self.reason = reason

    def to_json(self):
        out = super().to_json()
        out["field"] = self.field
        return out


class ParseError(ArtifactError):
    code = "parse_error"
