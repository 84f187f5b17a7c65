"""
Exception hierarchy for the forecasting engine.

Every error the engine raises derives from ForecastingError, so management
commands can translate the whole family into CommandError in one place.
"""


class ForecastingError(Exception):
    """Base class for all forecasting engine errors."""


# ----------------------------------------------------------------------------
# Ingestion
# ----------------------------------------------------------------------------


class MissingColumn(ForecastingError):
    """A declared column is absent from the CSV header."""

    def __init__(self, column, path=None):
        self.column = column
        self.path = path
        where = f" in {path}" if path else ""
        super().__init__(f"Missing column '{column}'{where}")


class MalformedDate(ForecastingError):
    """A date cell could not be parsed or falls outside the accepted range."""


class NegativeRainfall(ForecastingError):
    """A rainfall reading is below zero."""


class TooManyRejectedRows(ForecastingError):
    """More rows were rejected than the configured threshold allows."""

    def __init__(self, rejected, total, threshold):
        self.rejected = rejected
        self.total = total
        self.threshold = threshold
        super().__init__(
            f"{rejected} of {total} rows rejected, above the "
            f"{threshold:.0%} threshold; aborting"
        )


class GapInCoverage(ForecastingError):
    """A district lacks an entire month inside the covered range."""


class OutOfRange(ForecastingError):
    """A month or year lies outside the panel's axis."""


class PartialYear(ForecastingError):
    """A yearly computation was given a series that is not made of whole years."""


class InvalidPanel(ForecastingError):
    """Panel values are not finite or district names repeat."""


# ----------------------------------------------------------------------------
# Spatial graph
# ----------------------------------------------------------------------------


class NoStations(ForecastingError):
    """A district has no station with coordinates."""

    def __init__(self, district):
        self.district = district
        super().__init__(f"District '{district}' has no station with coordinates")


class KTooLarge(ForecastingError):
    """More neighbours were requested than the graph has."""


# ----------------------------------------------------------------------------
# Numerical building blocks
# ----------------------------------------------------------------------------


class WindowTooEarly(ForecastingError):
    """Descriptors were requested before any history exists."""


class NonFiniteInput(ForecastingError):
    """A design matrix or target contains NaN or infinity."""


class DimensionMismatch(ForecastingError):
    """An input vector does not have the length a model expects."""


class TooFewPoints(ForecastingError):
    """Not enough points for a regression slope."""


class TooFewSamples(ForecastingError):
    """Not enough rows to train a network."""


class NotConvergedWarning(UserWarning):
    """Coordinate descent hit its iteration cap; the last iterate is kept."""


# ----------------------------------------------------------------------------
# Forecasting
# ----------------------------------------------------------------------------


class HistoryTooShort(ForecastingError):
    """The observed history cannot seed the requested forecaster."""


class InsufficientHistory(ForecastingError):
    """An input vector needs lags that precede the start of the history."""


class MissingDistrictConfig(ForecastingError):
    """A model configuration has no entry for one of the panel's districts."""

    def __init__(self, district):
        self.district = district
        super().__init__(f"No configuration for district '{district}'")


class MissingYearlyFeature(ForecastingError):
    """No yearly feature vector exists for the year of a requested month."""


# ----------------------------------------------------------------------------
# Evaluation and search
# ----------------------------------------------------------------------------


class LengthMismatch(ForecastingError):
    """Actual and forecast series differ in length."""


class ZeroNormalizer(ForecastingError):
    """NRMSE was asked to divide by a zero standard deviation."""


class TooShort(ForecastingError):
    """The training span cannot hold the requested validation folds."""


class SpaceExhausted(ForecastingError):
    """More distinct configurations were requested than the space holds."""


class Misalignment(ForecastingError):
    """A forecast does not line up with the panel's holdout months."""


class DegenerateBaseline(ForecastingError):
    """An SPI baseline has zero standard deviation."""


class EmptySearchSpace(ForecastingError):
    """No value of a grid fits the panel being searched."""
