"""Exception hierarchy.

Three families map onto the CLI exit codes: configuration problems (2),
numerical failures (3) and validation failures (4).
"""


class HardyDilError(Exception):
    exit_code = 1


class ConfigError(HardyDilError, ValueError):
    exit_code = 2


class NumericalError(HardyDilError, ArithmeticError):
    exit_code = 3


class ValidationError(HardyDilError, ValueError):
    exit_code = 4


class AntisymmetryViolation(ValidationError):
    def __init__(self, i, j, k, value):
        self.index = (i, j, k)
        super().__init__(
            f"structure constants not antisymmetric at (i,j,k)=({i},{j},{k}): "
            f"c[i][j][k] + c[j][i][k] = {value:.3e}"
        )


class JacobiViolation(ValidationError):
    def __init__(self, i, j, k, value):
        self.index = (i, j, k)
        super().__init__(
            f"Jacobi identity fails for basis triple ({i},{j},{k}): residual {value:.3e}"
        )


class NotNilpotent(ValidationError):
    def __init__(self, i, j, k, dim):
        self.index = (i, j, k)
        super().__init__(
            f"lower central series stalls at dimension {dim}; "
            f"bracket of basis elements ({i},{j}) keeps component {k}"
        )


class DimensionMismatch(ValidationError):
    pass


class NegativeSideLength(ValidationError):
    pass


class NotDiagonalizable(ValidationError):
    pass


class NonpositiveEigenvalue(ValidationError):
    pass


class NotDerivation(ValidationError):
    def __init__(self, i, j, residual):
        self.pair = (i, j)
        super().__init__(
            f"matrix is not a derivation: A[Y{i + 1},Y{j + 1}] != "
            f"[AY{i + 1},Y{j + 1}] + [Y{i + 1},AY{j + 1}] (residual {residual:.3e})"
        )


class NotAdmissible(ValidationError):
    pass


class NonpositiveScale(ValidationError):
    pass


class NotInvertible(ValidationError):
    pass


class GridCoverage(ValidationError):
    pass


class GridMismatch(ValidationError):
    pass


class SolverBracketFailure(NumericalError):
    pass


class NotNormalized(ValidationError):
    pass


class BallsOverlap(ValidationError):
    pass


class SupportNotCovered(ValidationError):
    pass


class MomentSolveSingular(NumericalError):
    pass


class DegenerateSingularGap(NumericalError):
    pass


class LadderEmpty(ConfigError):
    pass


class ConfigInfeasible(ConfigError):
    pass


class ConfigInvalid(ConfigError):
    def __init__(self, field, reason=""):
        self.field = field
        msg = f"invalid config field {field!r}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)


class PipelineStageFailure(HardyDilError):
    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 3)
        super().__init__(f"stage {stage!r} failed: {cause}")
