"""Tolerance knobs used across constructions and checks."""

from dataclasses import dataclass


@dataclass(frozen=True)
class ToleranceConfig:
    """Default numeric tolerances.

    ortho_tol: max |U^T U - I| entry for a frame to count as orthonormal.
    inscribed_tol: max vertex residual |v^T A^{-1} v - 1| for inscription.
    equalizer_tol: relative diagonal-deviation target for equalizers.
    bound_slack: relative slack allowed above a closed-form bound before
        a value is flagged as a violation.
    """

    ortho_tol: float = 1e-10
    inscribed_tol: float = 1e-9
    equalizer_tol: float = 1e-10
    bound_slack: float = 1e-9


DEFAULT_TOLERANCES = ToleranceConfig()
