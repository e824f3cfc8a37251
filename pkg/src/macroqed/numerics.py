"""Quadrature, Matsubara summation, spherical Bessel kit and permanents.

Everything here is deterministic: fixed node sets, fixed subdivision and
summation order, no randomness.
"""

from dataclasses import dataclass
import math

import numpy as np

from .constants import HBAR, KB, PI
from .errors import DomainError, NonConvergence, OrderTooLarge, SizeLimit

__all__ = [
    "QuadratureSpec",
    "MatsubaraSpec",
    "integrate_semi_infinite",
    "integrate_finite",
    "matsubara_sum",
    "matsubara_frequency",
    "sph_functions",
    "permanent",
    "L_MAX",
    "PERMANENT_N_MAX",
]

L_MAX = 200           # largest supported spherical Bessel order
PERMANENT_N_MAX = 20  # largest supported permanent dimension


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and mapping for semi-infinite quadrature.

    mapping 'exp_decay' substitutes x = -x0*log(1-u), suited to
    exponentially decaying integrands; 'algebraic' substitutes
    x = x0*u/(1-u) for algebraic tails.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 0.0
    max_subdivisions: int = 2000
    mapping: str = "exp_decay"

    def __post_init__(self):
        if self.rel_tol <= 0:
            raise DomainError("rel_tol must be > 0")
        if self.abs_tol < 0:
            raise DomainError("abs_tol must be >= 0")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")
        if self.mapping not in ("exp_decay", "algebraic"):
            raise DomainError(f"unknown mapping {self.mapping!r}")


@dataclass(frozen=True)
class MatsubaraSpec:
    """Temperature and truncation control for Matsubara sums."""

    temperature: float
    max_terms: int = 100000
    tail_tol: float = 1e-12

    def __post_init__(self):
        if self.temperature <= 0:
            raise DomainError("temperature must be > 0")


# Gauss-Kronrod 7-15 nodes/weights on [-1, 1]
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_GK_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])  # 15 ordered nodes
_GK_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_G_WEIGHTS = np.zeros(15)
_G_WEIGHTS[1:-1:2] = np.concatenate([_WG[:-1], _WG[::-1]])


def _gk15(f, a, b):
    """Gauss-Kronrod 7-15 estimate of int_a^b f and its error."""
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = mid + half * _GK_NODES
    y = np.array([f(t) for t in x])
    ik = half * float(np.dot(_GK_WEIGHTS, y))
    ig = half * float(np.dot(_G_WEIGHTS, y))
    err = (200.0 * abs(ik - ig)) ** 1.5 if ik != ig else 0.0
    # standard QUADPACK-style error sharpening, clipped to the raw difference
    err = min(err, abs(ik - ig) * 200.0) if err else abs(ik - ig)
    return ik, max(err, abs(ik) * 1e-15)


def integrate_finite(f, a, b, rel_tol=1e-10, abs_tol=0.0, max_subdivisions=2000):
    """Adaptive Gauss-Kronrod integration of f over the finite [a, b].

    Returns (value, error_estimate); raises NonConvergence if the
    subdivision budget is exhausted before meeting the tolerance.
    """
    value, error = _gk15(f, a, b)
    intervals = [(error, a, b, value)]
    n_sub = 1
    while True:
        total = sum(v for _, _, _, v in intervals)
        total_err = sum(e for e, _, _, _ in intervals)
        if total_err <= max(abs_tol, rel_tol * abs(total)):
            return total, total_err
        if n_sub >= max_subdivisions:
            raise NonConvergence(
                f"quadrature not converged after {n_sub} subdivisions "
                f"(err={total_err:.3e}, value={total:.6e})",
                best=total, error=total_err)
        intervals.sort(key=lambda t: t[0])
        err, lo, hi, _ = intervals.pop()
        mid = 0.5 * (lo + hi)
        left = _gk15(f, lo, mid)
        right = _gk15(f, mid, hi)
        intervals.append((left[1], lo, mid, left[0]))
        intervals.append((right[1], mid, hi, right[0]))
        n_sub += 1


def integrate_semi_infinite(f, spec=None, scale=1.0):
    """Integrate f over [0, inf) after mapping to the unit interval.

    Parameters
    ----------
    f : callable
        Real integrand, decaying at infinity per the chosen mapping.
    spec : QuadratureSpec
        Tolerances and mapping; defaults to QuadratureSpec().
    scale : float
        Characteristic decay scale x0 of the integrand (e.g. c/(2 z_A)
        for surface integrals).

    Returns
    -------
    (value, error_estimate)
    """
    if spec is None:
        spec = QuadratureSpec()
    if scale <= 0:
        raise DomainError("scale must be > 0")
    x0 = scale

    if spec.mapping == "exp_decay":
        def g(u):
            x = -x0 * math.log1p(-u)
            return f(x) * x0 / (1.0 - u)
    else:
        def g(u):
            x = x0 * u / (1.0 - u)
            return f(x) * x0 / (1.0 - u) ** 2

    # stay clear of the u=1 endpoint; the mapped integrand vanishes there
    # for admissible f, and 1-u underflows at machine precision anyway.
    upper = 1.0 - 1e-16
    return integrate_finite(g, 0.0, upper, rel_tol=spec.rel_tol,
                            abs_tol=spec.abs_tol,
                            max_subdivisions=spec.max_subdivisions)


def matsubara_frequency(n, temperature):
    """n-th Matsubara frequency 2*pi*n*kB*T/hbar in rad/s."""
    return 2.0 * PI * n * KB * temperature / HBAR


def matsubara_sum(f, spec):
    """Half-weighted-zeroth-term Matsubara sum of f over xi_N.

    Returns sum_N (1 - delta_N0/2) f(xi_N), truncated once the estimated
    tail drops below tail_tol times the partial sum.
    """
    xi1 = matsubara_frequency(1, spec.temperature)
    total = 0.5 * f(0.0)
    prev = None
    for n in range(1, spec.max_terms + 1):
        term = f(n * xi1)
        total += term
        if term == 0.0 and (prev == 0.0 or prev is None):
            return total
        if prev is not None and abs(term) > 0:
            ratio = abs(term) / abs(prev) if prev else 1.0
            if ratio < 1.0:
                tail = abs(term) * ratio / (1.0 - ratio)
                if tail <= spec.tail_tol * max(abs(total), 1e-300):
                    return total
        prev = term
    raise NonConvergence(
        f"Matsubara sum not converged after {spec.max_terms} terms",
        best=total)


def _sph_jy0(z):
    j0 = np.sin(z) / z
    y0 = -np.cos(z) / z
    return j0, y0


def sph_functions(l, z):
    """Spherical Bessel j_l, Hankel h_l^(1) and Riccati derivatives.

    Returns (j_l(z), h_l^(1)(z), eta_l(z), xi_l(z)) with
    eta_l = (1/z) d[z j_l]/dz and xi_l = (1/z) d[z h_l^(1)]/dz.

    j_l uses downward recurrence with Miller normalisation; h_l^(1)
    uses the (stable) upward recurrence via y_l.
    """
    if z == 0:
        raise DomainError("sph_functions undefined at z = 0")
    if l < 0:
        raise DomainError("order l must be >= 0")
    if l > L_MAX:
        raise OrderTooLarge(f"l={l} exceeds supported maximum {L_MAX}")
    z = complex(z)

    j0, _ = _sph_jy0(z)
    # upward recurrence directly on h_l^(1): stable (|h_l| grows with l)
    # and free of the j + i y cancellation that ruins decaying Hankel
    # values for arguments high in the upper half-plane.
    h0 = -1j * np.exp(1j * z) / z
    h1 = -np.exp(1j * z) * (1.0 / z + 1j / z**2)
    hs = [h0, h1]
    for n in range(1, l + 1):
        hs.append((2 * n + 1) / z * hs[n] - hs[n - 1])

    # downward recurrence for j_l, Miller-normalised against j_0 or j_1
    nstart = l + max(24, int(1.5 * abs(z)) + 24)
    jp1 = 0.0 + 0.0j
    jn = 1e-30 + 0.0j
    js_rev = [jp1, jn]
    for n in range(nstart, 0, -1):
        jm1 = (2 * n + 1) / z * jn - jp1
        jp1 = jn
        jn = jm1
        js_rev.append(jn)
        if abs(jn) > 1e250:  # rescale to avoid overflow
            js_rev = [v / 1e250 for v in js_rev]
            jn /= 1e250
            jp1 /= 1e250
    js_unnorm = js_rev[::-1]  # index n -> unnormalised j_n, n = 0..nstart+1
    j1_exact = np.sin(z) / z**2 - np.cos(z) / z
    # normalise against whichever of j0, j1 is larger in magnitude
    if abs(j0) >= abs(j1_exact):
        norm = j0 / js_unnorm[0]
    else:
        norm = j1_exact / js_unnorm[1]
    jl = js_unnorm[l] * norm
    jlm1 = js_unnorm[l - 1] * norm if l >= 1 else None
    hl = hs[l]

    if l == 0:
        eta = np.cos(z) / z
        xi = np.exp(1j * z) / z
    else:
        eta = jlm1 - l * jl / z
        xi = hs[l - 1] - l * hl / z
    return jl, hl, eta, xi


def permanent(matrix):
    """Permanent of a square complex matrix by Ryser's formula.

    Gray-code subset enumeration, O(2^n n); n is limited to
    PERMANENT_N_MAX.
    """
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError("permanent requires a square matrix")
    n = m.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    if n > PERMANENT_N_MAX:
        raise SizeLimit(f"matrix size {n} exceeds limit {PERMANENT_N_MAX}")

    row_sums = np.zeros(n, dtype=complex)
    total = 0.0 + 0.0j
    gray = 0
    sign = 1 if n % 2 == 0 else -1
    for k in range(1, 2**n):
        bit = (k & -k).bit_length() - 1
        new_gray = k ^ (k >> 1)
        if new_gray & (1 << bit):
            row_sums += m[:, bit]
        else:
            row_sums -= m[:, bit]
        gray = new_gray
        parity = -1 if bin(gray).count("1") % 2 else 1
        total += parity * np.prod(row_sums)
    return sign * total
