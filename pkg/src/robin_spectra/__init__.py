"""Spectra of the Robin Laplacian with a negative boundary parameter and a
constant magnetic field, via effective boundary operators and direct solves."""

from .disc import DiscParams, disc_effective_lambda, solve_disc_full
from .effective import EffectiveSpec, FourierCutoff, solve_effective
from .eigensolve import EigenResult, EigensolveError, HermitianSystem
from .geometry import arc_length_reparametrize, preset, resolve_curve
from .model1d import HalfLineSpec, solve_H00, solve_HBT
from .tubular2d import TubularSpec, solve_tubular

__version__ = "0.1.0"

__all__ = [
    "DiscParams",
    "EffectiveSpec",
    "EigenResult",
    "EigensolveError",
    "FourierCutoff",
    "HalfLineSpec",
    "HermitianSystem",
    "TubularSpec",
    "arc_length_reparametrize",
    "disc_effective_lambda",
    "preset",
    "resolve_curve",
    "solve_H00",
    "solve_HBT",
    "solve_disc_full",
    "solve_effective",
    "solve_tubular",
]
