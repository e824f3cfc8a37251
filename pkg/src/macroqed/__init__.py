"""macroqed: medium-assisted electromagnetic Green tensors and the atomic
decay rates, dispersion forces and quantum-optical device transformations
built on top of them.

Submodules
----------
numerics    quadrature, Matsubara sums, spherical Bessel kit, permanents
materials   parametric/tabulated eps(omega), mu(omega) response models
atoms       polarizabilities, molecular heating channels, molecule table
greens      bulk / planar / spherical Green-tensor kernels, Born series
rates       decay, heating and spin-flip rates
dispersion  Casimir-Polder, van der Waals, Lifshitz and thermal forces
optics      lossless and absorbing beam splitters, Gaussian fibre channels
cavity      Jaynes-Cummings, Bloch equations, photon extraction, mode sums
"""

from . import (atoms, cavity, constants, dispersion, errors, greens,
               materials, numerics, optics, rates)

__all__ = [
    "atoms", "cavity", "constants", "dispersion", "errors", "greens",
    "materials", "numerics", "optics", "rates",
]

__version__ = "0.1.0"
