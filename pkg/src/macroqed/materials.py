"""Linear response models eps(omega), mu(omega).

All models evaluate on the real axis and on the positive imaginary axis
(omega = i*xi, xi >= 0); tabulated data only on the imaginary axis via
Kramers-Kronig quadrature.  Units are SI throughout.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .constants import C, EPS0, PI
from .errors import DomainError, NonConvergence, TabulationRange, ValidityWarning
from .numerics import QuadratureSpec, integrate_finite, integrate_semi_infinite

__all__ = [
    "Vacuum", "Drude", "DrudeLorentz", "PerfectConductor", "Tabulated",
    "MaterialModel", "TwoFluidConductor",
    "eval_eps", "eval_mu", "two_fluid_sigma", "index_sum_rule_residual",
    "load_tabulated_csv",
    "VACUUM", "PERFECT_CONDUCTOR",
]


def _check_frequency(omega):
    """Accept real omega or points on the positive imaginary axis."""
    w = complex(omega)
    if w.imag < 0:
        raise DomainError("frequency must lie in the closed upper half-plane")
    if w.imag > 0 and abs(w.real) > 1e-12 * abs(w):
        raise DomainError("only the real axis and the positive imaginary "
                          "axis are supported")
    return w


class Vacuum:
    """Unit response at every frequency."""

    def eval(self, omega):
        _check_frequency(omega)
        return 1.0 + 0.0j

    def plasma_frequency_sq(self):
        return 0.0

    def __repr__(self):
        return "Vacuum()"


@dataclass(frozen=True)
class Drude:
    """Metallic response 1 - wp^2 / (w (w + i gamma))."""

    omega_p: float
    gamma: float

    def eval(self, omega):
        w = _check_frequency(omega)
        if w == 0:
            raise DomainError("Drude response is singular at omega = 0")
        if w.imag > 0:  # omega = i xi -> 1 + wp^2/(xi (xi + gamma))
            xi = w.imag
            return complex(1.0 + self.omega_p**2 / (xi * (xi + self.gamma)))
        return 1.0 - self.omega_p**2 / (w * (w + 1j * self.gamma))

    def plasma_frequency_sq(self):
        return self.omega_p**2


@dataclass(frozen=True)
class DrudeLorentz:
    """Single-resonance response 1 + wp^2 / (wt^2 - w^2 - i gamma w)."""

    omega_p: float
    omega_t: float
    gamma: float

    def eval(self, omega):
        w = _check_frequency(omega)
        if w.imag > 0:
            xi = w.imag
            return complex(1.0 + self.omega_p**2
                           / (self.omega_t**2 + xi**2 + self.gamma * xi))
        return 1.0 + self.omega_p**2 / (self.omega_t**2 - w**2
                                        - 1j * self.gamma * w)

    def plasma_frequency_sq(self):
        return self.omega_p**2


class PerfectConductor:
    """Symbolic perfect-conductor limit.

    Downstream reflection coefficients treat this analytically
    (r_s = -1, r_p = +1); numeric evaluation is deliberately refused.
    """

    def eval(self, omega):
        raise DomainError("PerfectConductor has no numeric eps; it is "
                          "handled analytically by reflection coefficients")

    def plasma_frequency_sq(self):
        raise DomainError("PerfectConductor has no finite plasma frequency")

    def __repr__(self):
        return "PerfectConductor()"


@dataclass(frozen=True)
class Tabulated:
    """Imaginary-axis response from sampled Im eps(omega) data.

    eps(i xi) = 1 + (2/pi) * int d omega  omega Im eps(omega) / (omega^2 + xi^2)
    with trapezoid weights over the samples.
    """

    omega: tuple = field()
    im_eps: tuple = field()

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float)
        g = np.asarray(self.im_eps, dtype=float)
        if w.ndim != 1 or w.shape != g.shape or w.size < 2:
            raise DomainError("Tabulated needs matching 1-d omega/Im eps arrays")
        if np.any(np.diff(w) <= 0) or w[0] <= 0:
            raise DomainError("tabulated frequencies must be positive and increasing")
        object.__setattr__(self, "omega", tuple(w))
        object.__setattr__(self, "im_eps", tuple(g))

    def eval(self, omega):
        w = _check_frequency(omega)
        if w.imag == 0 and w != 0:
            raise DomainError("Tabulated data evaluates on the imaginary axis only")
        xi = w.imag
        wgrid = np.asarray(self.omega)
        if xi > wgrid[-1]:
            raise TabulationRange(
                f"xi={xi:.3e} beyond tabulated range (max {wgrid[-1]:.3e})")
        g = np.asarray(self.im_eps)
        integrand = wgrid * g / (wgrid**2 + xi**2)
        return complex(1.0 + (2.0 / PI) * np.trapz(integrand, wgrid))

    def plasma_frequency_sq(self):
        # f-sum rule: wp_eff^2 = (2/pi) int omega Im eps d omega
        wgrid = np.asarray(self.omega)
        return (2.0 / PI) * np.trapz(wgrid * np.asarray(self.im_eps), wgrid)


def load_tabulated_csv(path):
    """Read a two-column CSV (omega rad/s, Im eps); header line optional."""
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts = line.replace(";", ",").split(",")
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except ValueError:
                continue  # header
    if len(rows) < 2:
        raise DomainError(f"no usable data rows in {path}")
    w, g = zip(*rows)
    return Tabulated(w, g)


@dataclass(frozen=True)
class MaterialModel:
    """Pair of permittivity and permeability models."""

    epsilon: object = field(default_factory=Vacuum)
    mu: object = field(default_factory=Vacuum)

    def __post_init__(self):
        if not isinstance(self.mu, PerfectConductor):
            try:
                mu0 = eval_mu(self, 1j * 1e-3)
            except (DomainError, TabulationRange):
                return
            if mu0.real < 1.0 - 1e-12:
                warnings.warn(
                    "mu(0) < 1 (diamagnetic) lies outside the linear "
                    "response framework; proceeding anyway", ValidityWarning,
                    stacklevel=2)

    @property
    def is_perfect_conductor(self):
        return isinstance(self.epsilon, PerfectConductor)


def eval_eps(material, omega):
    """Permittivity of the material at omega (real or i*xi)."""
    return material.epsilon.eval(omega)


def eval_mu(material, omega):
    """Permeability of the material at omega (real or i*xi)."""
    return material.mu.eval(omega)


VACUUM = MaterialModel()
PERFECT_CONDUCTOR = MaterialModel(epsilon=PerfectConductor())


@dataclass(frozen=True)
class TwoFluidConductor:
    """Gorter-Casimir two-fluid superconductor parameters."""

    omega_p: float
    gamma: float
    t_c: float
    temperature: float

    def __post_init__(self):
        if self.temperature > self.t_c:
            raise DomainError("two-fluid model requires T <= T_c")
        if min(self.omega_p, self.gamma, self.t_c) <= 0 or self.temperature < 0:
            raise DomainError("two-fluid parameters must be positive")

    @property
    def normal_fraction(self):
        return (self.temperature / self.t_c) ** 4


def two_fluid_sigma(conductor, omega):
    """Two-fluid conductivity sigma(omega).

    sigma = eps0 wp^2 [ (T/Tc)^4 / gamma + (i/omega)(1 - (T/Tc)^4) ].
    """
    if omega <= 0:
        raise DomainError("omega must be > 0")
    fn = conductor.normal_fraction
    return EPS0 * conductor.omega_p**2 * (fn / conductor.gamma
                                          + 1j * (1.0 - fn) / omega)


def _refractive_index_real(material, omega):
    eps = eval_eps(material, omega)
    mu = eval_mu(material, omega)
    n = np.sqrt(eps * mu)
    if n.imag < 0:
        n = -n
    return n


def index_sum_rule_residual(material, omega_cut, rel_tol=1e-9):
    """Normalised residual of the refractive-index sum rule.

    Evaluates int_0^omega_cut (Re n(omega) - 1) d omega plus the analytic
    high-frequency tail -wp_eff^2/(2 omega_cut), normalised by
    int_0^omega_cut |Re n - 1| d omega.  Tends to zero as omega_cut grows.
    """
    if isinstance(material.epsilon, PerfectConductor):
        raise DomainError("sum rule needs a parametric model")
    if isinstance(material.epsilon, Vacuum) and isinstance(material.mu, Vacuum):
        return 0.0

    wp2 = material.epsilon.plasma_frequency_sq() + material.mu.plasma_frequency_sq()

    def eta_m1(w):
        return float(_refractive_index_real(material, w).real) - 1.0

    # substitute omega = s^2 to absorb the integrable 1/sqrt(omega)
    # edge of Drude-like models at omega -> 0
    def t_integrand(s):
        return eta_m1(s * s) * 2.0 * s

    def t_abs(s):
        return abs(eta_m1(s * s)) * 2.0 * s

    s_cut = np.sqrt(omega_cut)
    try:
        val, _ = integrate_finite(t_integrand, 0.0, s_cut,
                                  rel_tol=rel_tol, abs_tol=0.0,
                                  max_subdivisions=6000)
        norm, _ = integrate_finite(t_abs, 0.0, s_cut,
                                   rel_tol=1e-7, abs_tol=0.0,
                                   max_subdivisions=6000)
    except NonConvergence as exc:
        raise NonConvergence("sum-rule quadrature failed: " + str(exc),
                             best=exc.best) from exc
    tail = -wp2 / (2.0 * omega_cut)
    if norm == 0.0:
        return 0.0
    return (val + tail) / norm
