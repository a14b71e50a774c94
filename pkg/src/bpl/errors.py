"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A problem instance failed validation; the message names the bad field."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"config field '{field}': {message}")


class CapacityError(RuntimeError):
    """A request exceeds the dense-storage capacity cap."""


class CoincidentRapiditiesError(ValueError):
    """Two rapidities are too close; a b-function denominator would blow up."""

    def __init__(self, pair, separation):
        self.pair = pair
        self.separation = separation
        super().__init__(
            f"rapidities {pair[0]:.6g} and {pair[1]:.6g} are too close "
            f"(|sinh| separation {separation:.3g}); coefficients are singular"
        )


class DegeneracyError(RuntimeError):
    """Two probe points did not split a degenerate cluster; try other probes."""


class UnsupportedShapeError(ValueError):
    """The first-order reduction is only defined for lattice length >= 3."""
