"""Exception types shared across the package."""


class FloqentError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(FloqentError):
    """Invalid or inconsistent run configuration.

    Carries the offending section/key when known so CLI users can find
    the bad line quickly.
    """

    def __init__(self, message, section=None, key=None):
        loc = ""
        if section is not None:
            loc = f"[{section}]" + (f" key '{key}'" if key else "")
            message = f"{loc}: {message}"
        super().__init__(message)
        self.section = section
        self.key = key


class NonPhysicalState(FloqentError):
    """A matrix failed the density-matrix invariants beyond tolerance."""


class ResonantDenominator(FloqentError):
    """A perturbative denominator fell inside the resonance guard.

    The attached ``info`` (a ResonanceInfo) names the condition that
    tripped; callers are expected to switch to the resonant oracle.
    """

    def __init__(self, message, info=None):
        super().__init__(message)
        self.info = info


class OutOfTheory(ResonantDenominator):
    """Overlapping resonances: the single-resonance assumption of the
    resonant oracle is violated at this parameter point."""


class DegenerateFixedPoint(FloqentError):
    """The one-period propagator has a (near-)degenerate unit eigenvalue,
    so the periodic steady state is not unique (zero-dissipation input)."""


class StepSizeUnderflow(FloqentError):
    """The adaptive step controller stalled."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class NoEntanglementWindow(FloqentError):
    """The dip-width expression has no real root: concurrence never rises
    above zero near this resonance."""


class PerturbativeRegimeWarning(UserWarning):
    """Analytic results were requested outside the small-splitting regime
    (delta not small against the bias or the drive amplitude)."""
