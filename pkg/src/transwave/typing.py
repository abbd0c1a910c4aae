from typing import Literal

import jax

CoefficientName = Literal["d1", "c1", "d2", "c2"]
"""Names of the piecewise-constant coefficients of the system."""

Regime = Literal["a2_equal_1", "a2_not_1"]
"""Stability regime selected by the wave speed a₂ of the second chain."""

Verb = Literal["validate", "spectrum", "resolvent", "simulate", "decay", "static-solve", "poincare", "regimes"]
"""Command-line verbs."""

DecayModel = Literal["exponential", "polynomial"]
"""Decay laws that can be fitted to an energy trace."""

EigenMode = Literal["dense", "iterative"]
"""Dense full spectrum or iterative shift-invert subset."""

SamplingMode = Literal["uniform", "geometric"]
"""How simulate picks the recorded instants."""

PropagationMode = Literal["scan", "modal"]
"""Step-by-step midpoint integration or exact modal evaluation of the midpoint iterates."""

Breakpoints4 = tuple[float, float, float, float]
"""Four ascending breakpoints."""

Interval = tuple[float, float]
"""Closed interval (left, right)."""

Array = jax.Array
"""Float64 (or complex128) JAX array."""
