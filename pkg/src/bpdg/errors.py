"""Exception types shared across the solver."""


class ConfigError(ValueError):
    """Invalid configuration input; message lists every offending key."""


class CompatibilityError(RuntimeError):
    """Periodic field solve rejected because net charge does not vanish."""

    def __init__(self, imbalance, reference):
        self.imbalance = imbalance
        self.reference = reference
        super().__init__(
            f"net charge imbalance {imbalance:.6e} exceeds tolerance "
            f"relative to background charge {reference:.6e}"
        )


class StepFailure(RuntimeError):
    """Time step could not be certified (degenerate CFL budget or negative average)."""
