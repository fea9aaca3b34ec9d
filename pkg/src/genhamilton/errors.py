class ConfigError(ValueError):
    """Aggregated scenario configuration problems.

    ``errors`` holds one human readable message per violation so a caller can
    report all of them at once instead of fixing typos one run at a time.
    """

    def __init__(self, errors, source=None):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        self.source = source
        prefix = f"{source}: " if source else ""
        super().__init__(prefix + "; ".join(self.errors))


class PropagationError(RuntimeError):
    """A time stepper produced or consumed non-finite / invalid values."""

    def __init__(self, message, step=None):
        self.step = step
        where = f" at step {step}" if step is not None else ""
        super().__init__(f"{message}{where}")
