"""Green-tensor kernels.

Bulk/free-space tensors, planar multilayer scattering traces via the Weyl
expansion (imaginary and real frequency axes), sphere Mie coefficients and
partial-wave traces, a first/second-order Born series for weak voxelised
bodies, and real-cavity local-field corrections.

Square-root branches: on the imaginary axis every k_z-type root is real
positive; on the real axis Im k_z >= 0 (outgoing/decaying waves).
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .constants import C, PI
from .errors import (BornConvergenceWarning, DomainError, NonConvergence,
                     OrderTooLarge, ValidityWarning)
from .materials import (MaterialModel, PerfectConductor, Vacuum, eval_eps,
                        eval_mu)
from .numerics import (QuadratureSpec, integrate_finite,
                       integrate_semi_infinite, sph_functions)

__all__ = [
    "Layer", "LayeredStack", "ReflectionPair", "SphereGeometry", "VoxelBody",
    "bulk_green", "fresnel", "multilayer_reflection",
    "planar_scatter_traces", "planar_trace_real", "planar_im_scatter_trace",
    "planar_im_scatter_components",
    "mie_coefficients", "mie_l_max", "sphere_scatter_trace",
    "born_scatter", "local_field_correct", "load_voxel_csv",
    "free_tensor", "free_curl_left", "free_curl_right", "free_curl_both",
    "mirror_tensor", "mirror_curl_left", "mirror_curl_right",
    "mirror_curl_both", "dual_stack",
]


# ---------------------------------------------------------------------------
# geometry containers

@dataclass(frozen=True)
class Layer:
    material: MaterialModel
    thickness: float = None  # None = semi-infinite

    def __post_init__(self):
        if self.thickness is not None and self.thickness <= 0:
            raise DomainError("layer thickness must be > 0")


@dataclass(frozen=True)
class LayeredStack:
    """Planar stack below a vacuum half space holding the field point.

    Layers are ordered from the vacuum interface inward; the last layer is
    semi-infinite (thickness None), all others have finite thickness.
    """

    layers: tuple

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise DomainError("stack needs at least one layer")
        if layers[-1].thickness is not None:
            raise DomainError("last layer must be semi-infinite")
        for lay in layers[:-1]:
            if lay.thickness is None:
                raise DomainError("only the last layer may be semi-infinite")
        object.__setattr__(self, "layers", layers)

    @classmethod
    def half_space(cls, material):
        return cls((Layer(material),))

    @classmethod
    def slab(cls, material, thickness, backing=None):
        back = Layer(backing if backing is not None else MaterialModel())
        return cls((Layer(material, thickness), back))

    @property
    def is_vacuum(self):
        return all(isinstance(l.material.epsilon, Vacuum)
                   and isinstance(l.material.mu, Vacuum)
                   for l in self.layers)


def dual_stack(stack):
    """Swap eps <-> mu in every layer (duality transformation)."""
    return LayeredStack(tuple(
        Layer(MaterialModel(epsilon=l.material.mu, mu=l.material.epsilon),
              l.thickness) for l in stack.layers))


@dataclass(frozen=True)
class ReflectionPair:
    r_s: complex
    r_p: complex


@dataclass(frozen=True)
class SphereGeometry:
    radius: float
    interior: MaterialModel
    exterior: MaterialModel = None

    def __post_init__(self):
        if self.radius <= 0:
            raise DomainError("sphere radius must be > 0")
        if self.exterior is None:
            object.__setattr__(self, "exterior", MaterialModel())


@dataclass(frozen=True)
class VoxelBody:
    """Cubic-voxel susceptibility map delta_eps on midpoints."""

    positions: np.ndarray   # (N, 3)
    delta_eps: np.ndarray   # (N,) complex, at the evaluation frequency
    cell_volume: float

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        de = np.asarray(self.delta_eps, dtype=complex).ravel()
        if pos.shape[0] != de.size or pos.shape[1] != 3:
            raise DomainError("positions must be (N,3) matching delta_eps")
        if self.cell_volume <= 0:
            raise DomainError("cell volume must be > 0")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "delta_eps", de)


def load_voxel_csv(path):
    """Voxel body from CSV rows (x, y, z, Re deps, Im deps).

    The first non-comment line must be a header 'cell,<size in m>'.
    """
    cell = None
    pos, de = [], []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if parts[0].strip().lower() == "cell":
                cell = float(parts[1])
                continue
            x, y, z, re_d, im_d = (float(p) for p in parts[:5])
            pos.append((x, y, z))
            de.append(re_d + 1j * im_d)
    if cell is None:
        raise DomainError("voxel CSV needs a 'cell,<size>' header line")
    return VoxelBody(np.array(pos), np.array(de), cell**3)


# ---------------------------------------------------------------------------
# bulk and free-space tensors

def _q_medium(material, omega):
    """Wave number q = sqrt(eps mu) omega / c with the upper-half-plane branch."""
    eps = eval_eps(material, omega)
    mu = eval_mu(material, omega)
    q = np.sqrt(eps * mu + 0j) * complex(omega) / C
    if q.imag < 0 or (q.imag == 0 and q.real < 0):
        q = -q
    return q, mu


def bulk_green(material, omega, rho_vec):
    """Homogeneous-medium Green tensor G(rho, omega), rho != 0.

    G = mu (q/4 pi) e^{i q rho} [f(x) I - g(x) rho^ rho^],
    f(x) = x + i x^2 - x^3,  g(x) = x + 3 i x^2 - 3 x^3,  x = 1/(q rho).
    Reduces to the free-space tensor for eps = mu = 1; the delta-function
    term at coincidence is excluded.
    """
    rho_vec = np.asarray(rho_vec, dtype=float)
    rho = np.linalg.norm(rho_vec)
    if rho == 0:
        raise DomainError("bulk_green is undefined at rho = 0")
    q, mu = _q_medium(material, omega)
    n_hat = rho_vec / rho
    x = 1.0 / (q * rho)
    f = x + 1j * x**2 - x**3
    g = x + 3j * x**2 - 3.0 * x**3
    pref = mu * q / (4.0 * PI) * np.exp(1j * q * rho)
    return pref * (f * np.eye(3) - g * np.outer(n_hat, n_hat))


def _eps_matrix(n_hat):
    """E_ij = epsilon_ijk n_k (antisymmetric cross-product kernel)."""
    nx, ny, nz = n_hat
    return np.array([[0.0, nz, -ny],
                     [-nz, 0.0, nx],
                     [ny, -nx, 0.0]])


def _free_scalars(rho, xi):
    """Scalar building blocks of the vacuum tensor on the imaginary axis."""
    u = xi * rho / C
    if u == 0:  # static limit handled via xi -> 0 of xi-free combinations
        raise DomainError("use a positive xi (static parts carry 1/xi poles)")
    e = np.exp(-u)
    pref = xi / (4.0 * PI * C)
    a = pref * e * (1.0 / u + 1.0 / u**2 + 1.0 / u**3)
    b = -pref * e * (1.0 / u + 3.0 / u**2 + 3.0 / u**3)
    w = (xi / C + 1.0 / rho) * e / (4.0 * PI * rho)
    return a, b, w


def free_tensor(rho_vec, xi):
    """Vacuum G^0(rho, i xi) as a real 3x3 array."""
    rho_vec = np.asarray(rho_vec, dtype=float)
    rho = np.linalg.norm(rho_vec)
    if rho == 0:
        raise DomainError("free_tensor undefined at rho = 0")
    a, b, _ = _free_scalars(rho, xi)
    n = rho_vec / rho
    return a * np.eye(3) + b * np.outer(n, n)


def free_curl_left(rho_vec, xi):
    """curl x G^0 on the imaginary axis."""
    rho_vec = np.asarray(rho_vec, dtype=float)
    rho = np.linalg.norm(rho_vec)
    _, _, w = _free_scalars(rho, xi)
    return w * _eps_matrix(rho_vec / rho)


def free_curl_right(rho_vec, xi):
    """G^0 x curl' on the imaginary axis.

    Sign convention fixed so that the two-point electric-magnetic trace
    reproduces the repulsive mixed dispersion kernel.
    """
    return -free_curl_left(rho_vec, xi)


def free_curl_both(rho_vec, xi):
    """curl x G^0 x curl' = (xi^2/c^2) G^0 on the imaginary axis."""
    return (xi / C) ** 2 * free_tensor(rho_vec, xi)


_MIRROR = np.diag([1.0, 1.0, -1.0])


def _image_sign(kind):
    if kind == "pec":
        return -1.0
    if kind == "pmc":
        return 1.0
    raise DomainError("mirror kind must be 'pec' or 'pmc'")


def mirror_tensor(r_a, r_b, xi, kind="pec"):
    """Scattering tensor of a perfect mirror at z = 0: image construction."""
    sigma = _image_sign(kind)
    rho_img = np.asarray(r_a, float) - _MIRROR @ np.asarray(r_b, float)
    return sigma * free_tensor(rho_img, xi) @ _MIRROR


def mirror_curl_left(r_a, r_b, xi, kind="pec"):
    sigma = _image_sign(kind)
    rho_img = np.asarray(r_a, float) - _MIRROR @ np.asarray(r_b, float)
    return sigma * free_curl_left(rho_img, xi) @ _MIRROR


def mirror_curl_right(r_a, r_b, xi, kind="pec"):
    sigma = _image_sign(kind)
    rho_img = np.asarray(r_a, float) - _MIRROR @ np.asarray(r_b, float)
    rho = np.linalg.norm(rho_img)
    _, _, w = _free_scalars(rho, xi)
    return sigma * w * _eps_matrix(rho_img / rho) @ _MIRROR


def mirror_curl_both(r_a, r_b, xi, kind="pec"):
    sigma = _image_sign(kind)
    rho_img = np.asarray(r_a, float) - _MIRROR @ np.asarray(r_b, float)
    return -sigma * (xi / C) ** 2 * free_tensor(rho_img, xi) @ _MIRROR


# ---------------------------------------------------------------------------
# planar stacks: Fresnel coefficients and Weyl traces

def _kz_imag(material, k_par, xi):
    """kappa_z = sqrt(eps mu xi^2/c^2 + k_par^2) (real positive)."""
    eps = eval_eps(material, 1j * xi) if xi > 0 else None
    if xi == 0:
        return k_par  # eps-independent only for vacuum; callers special-case
    mu = eval_mu(material, 1j * xi)
    val = np.sqrt(eps * mu * xi**2 / C**2 + k_par**2 + 0j)
    return val.real if abs(val.imag) < 1e-12 * abs(val) else val


def _kz_real(material, k_par, omega):
    """k_z with Im k_z >= 0 (and Re >= 0 on the propagating branch)."""
    eps = eval_eps(material, omega)
    mu = eval_mu(material, omega)
    val = np.sqrt(eps * mu * omega**2 / C**2 - k_par**2 + 0j)
    if val.imag < 0:
        val = -val
    return val


def fresnel(material_1, material_2, k_par, omega=None, xi=None):
    """Single-interface Fresnel coefficients, incidence from material_1.

    r_s = (mu2 k1z - mu1 k2z) / (mu2 k1z + mu1 k2z), r_p analogous with
    permittivities.  PerfectConductor as material_2 returns exactly
    (-1, +1).
    """
    if (omega is None) == (xi is None):
        raise DomainError("specify exactly one of omega, xi")
    if material_2.is_perfect_conductor:
        return ReflectionPair(-1.0 + 0.0j, 1.0 + 0.0j)
    if material_1.is_perfect_conductor:
        raise DomainError("incidence medium cannot be a perfect conductor")

    if xi is not None:
        freq = 1j * xi
        if xi == 0:
            # static limit: kappa_z -> k_par in every finite-eps medium,
            # handled by the direct limit of the coefficients
            eps1 = _static_eps(material_1)
            eps2 = _static_eps(material_2)
            mu1 = _static_mu(material_1)
            mu2 = _static_mu(material_2)
            rs = (mu2 - mu1) / (mu2 + mu1)
            rp = (eps2 - eps1) / (eps2 + eps1)
            return ReflectionPair(complex(rs), complex(rp))
        k1z = _kz_imag(material_1, k_par, xi)
        k2z = _kz_imag(material_2, k_par, xi)
    else:
        freq = omega
        k1z = _kz_real(material_1, k_par, omega)
        k2z = _kz_real(material_2, k_par, omega)
    mu1 = eval_mu(material_1, freq)
    mu2 = eval_mu(material_2, freq)
    eps1 = eval_eps(material_1, freq)
    eps2 = eval_eps(material_2, freq)
    rs = (mu2 * k1z - mu1 * k2z) / (mu2 * k1z + mu1 * k2z)
    rp = (eps2 * k1z - eps1 * k2z) / (eps2 * k1z + eps1 * k2z)
    return ReflectionPair(complex(rs), complex(rp))


def _static_eps(material):
    """eps(i xi -> 0+); infinite static response maps to a huge float."""
    try:
        return eval_eps(material, 1j * 1e-8).real
    except DomainError:
        return 1e30


def _static_mu(material):
    try:
        return eval_mu(material, 1j * 1e-8).real
    except DomainError:
        return 1e30


def multilayer_reflection(stack, k_par, omega=None, xi=None):
    """Recursive reflection of a layered stack seen from vacuum.

    r~ = (r_12 + r_23 e^{2 i k_2z d}) / (1 + r_12 r_23 e^{2 i k_2z d})
    applied innermost-out; a perfect conductor truncates the stack.
    """
    if (omega is None) == (xi is None):
        raise DomainError("specify exactly one of omega, xi")
    vacuum = MaterialModel()
    media = [vacuum]
    thicknesses = []
    for layer in stack.layers:
        media.append(layer.material)
        thicknesses.append(layer.thickness)
        if layer.material.is_perfect_conductor:
            break
    n_if = len(media) - 1

    def phase(mat, d):
        if xi is not None:
            if xi == 0:
                return 1.0
            return np.exp(-2.0 * _kz_imag(mat, k_par, xi) * d)
        return np.exp(2j * _kz_real(mat, k_par, omega) * d)

    rs = rp = None
    for j in range(n_if - 1, -1, -1):
        pair = fresnel(media[j], media[j + 1], k_par, omega=omega, xi=xi)
        if rs is None:
            rs, rp = pair.r_s, pair.r_p
        else:
            ph = phase(media[j + 1], thicknesses[j])
            rs = (pair.r_s + rs * ph) / (1.0 + pair.r_s * rs * ph)
            rp = (pair.r_p + rp * ph) / (1.0 + pair.r_p * rp * ph)
    return ReflectionPair(rs, rp)


_TRACE_QUAD = QuadratureSpec(rel_tol=1e-11, abs_tol=0.0, max_subdivisions=4000)


def planar_scatter_traces(stack, z_a, xi, gradient=False,
                          spec=_TRACE_QUAD):
    """Coincidence traces of the planar scattering tensor at i xi.

    Returns (T_e, T_m) with
      T_e = tr G^(S)(z_a, z_a, i xi)
          = (1/4 pi) int_{xi/c}^inf d kz e^{-2 kz z_a}
                [r_s - (2 kz^2 c^2/xi^2 - 1) r_p]
      T_m = tr [curl x G^(S) x curl'] = (xi^2/c^2) * (same with r_s <-> r_p)
    With gradient=True returns ((T_e, T_m), (dT_e/dz, dT_m/dz)).
    """
    if z_a <= 0:
        raise DomainError("z_a must be > 0")
    if xi < 0:
        raise DomainError("xi must be >= 0")
    if stack.is_vacuum:
        zero = (0.0, 0.0)
        return (zero, zero) if gradient else zero
    k0 = xi / C

    def kernels(t):
        # t = kz - xi/c >= 0
        kz = k0 + t
        k_par_sq = kz * kz - k0 * k0
        k_par = np.sqrt(max(k_par_sq, 0.0))
        pair = multilayer_reflection(stack, k_par, xi=xi)
        if xi == 0:
            fac = 0.0  # xi^2-weighted integrals vanish term-wise at xi = 0
        else:
            fac = 2.0 * kz * kz * C**2 / xi**2 - 1.0
        damp = np.exp(-2.0 * kz * z_a)
        ke = damp * (pair.r_s.real - fac * pair.r_p.real)
        km = damp * (pair.r_p.real - fac * pair.r_s.real)
        return ke, km

    scale = 1.0 / (2.0 * z_a)

    def f_e(t):
        return kernels(t)[0]

    def f_m(t):
        return kernels(t)[1]

    ve, _ = integrate_semi_infinite(f_e, spec, scale=scale)
    vm, _ = integrate_semi_infinite(f_m, spec, scale=scale)
    te = ve / (4.0 * PI)
    tm = (xi / C) ** 2 * vm / (4.0 * PI)
    if not gradient:
        return te, tm

    def g_e(t):
        return -2.0 * (k0 + t) * kernels(t)[0]

    def g_m(t):
        return -2.0 * (k0 + t) * kernels(t)[1]

    ge, _ = integrate_semi_infinite(g_e, spec, scale=scale)
    gm, _ = integrate_semi_infinite(g_m, spec, scale=scale)
    return (te, tm), (ge / (4.0 * PI), (xi / C) ** 2 * gm / (4.0 * PI))


def _planar_complex_components(stack, z_a, omega, magnetic=False,
                               gradient=False):
    """Complex Weyl components (G_xx, G_zz[, trace]) on the real axis.

    With magnetic=True returns the curl-curl components
    (M_xx, M_zz) = components of curl x G^(S) x curl'.
    For deriv > 0 the integrand carries (2 i k_z)^deriv (z-derivatives).
    """
    if z_a <= 0:
        raise DomainError("z_a must be > 0")
    if omega <= 0:
        raise DomainError("omega must be > 0")
    k1 = omega / C
    deriv = 1 if gradient else 0

    def components(k_par, kz):
        pair = multilayer_reflection(stack, k_par, omega=omega)
        rs, rp = pair.r_s, pair.r_p
        if magnetic:
            rs, rp = rp, rs
        xx = 0.5 * (rs - rp * kz * kz / k1**2)
        zz = rp * (k_par * k_par) / k1**2
        if magnetic:
            xx *= k1**2
            zz *= k1**2
        return xx, zz

    # propagating part: k_par = k1 sin(theta), measure i k1^2 sin(theta)
    def prop(theta):
        kz = k1 * np.cos(theta)
        k_par = k1 * np.sin(theta)
        xx, zz = components(k_par, kz)
        ph = 1j * k1 * np.sin(theta) * np.exp(2j * kz * z_a) * (2j * kz) ** deriv
        vec = ph * np.array([xx, zz])
        return vec

    # evanescent part: kappa = sqrt(k_par^2 - k1^2), measure e^{-2 kappa z}
    def evan(kappa):
        k_par = np.sqrt(kappa * kappa + k1 * k1)
        kz = 1j * kappa
        xx, zz = components(k_par, kz)
        ph = np.exp(-2.0 * kappa * z_a) * (2j * kz) ** deriv
        return ph * np.array([xx, zz])

    # absolute-tolerance floor: the free-space coincidence component
    # ~ k1 (times k1^2 for curl-curl, k1 per z-derivative) sets the scale
    floor = 1e-9 * k1 ** (1 + deriv + (2 if magnetic else 0))
    out = np.zeros(2, dtype=complex)
    for idx in range(2):
        re, _ = integrate_finite(lambda th: prop(th)[idx].real, 0.0, PI / 2,
                                 rel_tol=1e-9, abs_tol=floor,
                                 max_subdivisions=6000)
        im, _ = integrate_finite(lambda th: prop(th)[idx].imag, 0.0, PI / 2,
                                 rel_tol=1e-9, abs_tol=floor,
                                 max_subdivisions=6000)
        out[idx] = re + 1j * im
    spec = QuadratureSpec(rel_tol=1e-9, abs_tol=floor, max_subdivisions=6000)
    for idx in range(2):
        re, _ = integrate_semi_infinite(lambda kp: evan(kp)[idx].real, spec,
                                        scale=1.0 / (2.0 * z_a))
        im, _ = integrate_semi_infinite(lambda kp: evan(kp)[idx].imag, spec,
                                        scale=1.0 / (2.0 * z_a))
        out[idx] += re + 1j * im
    return out / (4.0 * PI)


def planar_trace_real(stack, z_a, omega, magnetic=False, gradient=False):
    """Complex coincidence trace tr G^(S) (or curl-curl trace) at real omega."""
    if stack.is_vacuum:
        return 0.0 + 0.0j
    xx, zz = _planar_complex_components(stack, z_a, omega,
                                        magnetic=magnetic, gradient=gradient)
    return 2.0 * xx + zz


def planar_im_scatter_trace(stack, z_a, omega):
    """(Im tr G^(S), Im tr curl-curl) at real omega, feeding rates."""
    if stack.is_vacuum:
        return 0.0, 0.0
    te = planar_trace_real(stack, z_a, omega, magnetic=False)
    tm = planar_trace_real(stack, z_a, omega, magnetic=True)
    return te.imag, tm.imag


def planar_im_scatter_components(stack, z_a, omega, magnetic=False):
    """(Im G_xx, Im G_zz) (or curl-curl components) at real omega."""
    if stack.is_vacuum:
        return 0.0, 0.0
    xx, zz = _planar_complex_components(stack, z_a, omega, magnetic=magnetic)
    return xx.imag, zz.imag


# ---------------------------------------------------------------------------
# spheres: Mie coefficients and partial-wave traces

def mie_l_max(z_abs, rel_tol=1e-12):
    """Truncation order for Mie sums at size parameter |z|."""
    return max(10, int(np.ceil(z_abs + 4.0 * z_abs ** (1.0 / 3.0) + 10.0)))


def _sphere_arguments(geometry, freq):
    """(k1, k2) exterior/interior wave numbers at complex frequency."""
    k1, mu1 = _q_medium(geometry.exterior, freq)
    k2, mu2 = _q_medium(geometry.interior, freq)
    return k1, k2, mu1, mu2


def mie_coefficients(geometry, l, omega=None, xi=None):
    """Exterior (11) and interior (22) sphere scattering coefficients.

    Returns (r_s_11, r_p_11, r_s_22, r_p_22) for multipole order l >= 1.
    Medium 1 is the exterior, medium 2 the sphere interior.
    """
    if l < 1:
        raise DomainError("multipole order l must be >= 1")
    if (omega is None) == (xi is None):
        raise DomainError("specify exactly one of omega, xi")
    freq = omega if omega is not None else 1j * xi
    k1, k2, mu1, mu2 = _sphere_arguments(geometry, freq)
    R = geometry.radius
    z1, z2 = k1 * R, k2 * R
    j1, h1, eta1, xi1 = sph_functions(l, z1)
    j2, h2, eta2, xi2 = sph_functions(l, z2)

    den_s = mu1 * k2 * eta2 * h1 - mu2 * k1 * xi1 * j2
    den_p = mu1 * k2 * xi1 * j2 - mu2 * k1 * eta2 * h1
    rs11 = -(mu1 * k2 * eta2 * j1 - mu2 * k1 * eta1 * j2) / den_s
    rp11 = -(mu1 * k2 * eta1 * j2 - mu2 * k1 * eta2 * j1) / den_p
    rs22 = -(mu1 * k2 * xi2 * h1 - mu2 * k1 * xi1 * h2) / den_s
    rp22 = -(mu1 * k2 * xi1 * h2 - mu2 * k1 * xi2 * h1) / den_p
    return rs11, rp11, rs22, rp22


def sphere_scatter_trace(geometry, r_a, freq_kind, freq, rel_tol=1e-12):
    """Partial-wave (s, p) trace sums of the exterior scattering tensor.

    Returns (S_s, S_p) such that
      tr G^(S)(r_a, r_a) = (i k /4 pi) [S_s + S_p],
      S_s = sum_l (2l+1) r_s^l h_l(k r)^2,
      S_p = sum_l (2l+1) r_p^l [ l(l+1) (h_l/(k r))^2 + xi_l(k r)^2 ].
    freq_kind is 'omega' or 'xi'.
    """
    if r_a <= geometry.radius:
        raise DomainError("field point must lie outside the sphere")
    if freq_kind == "xi":
        k1, _, _, _ = _sphere_arguments(geometry, 1j * freq)
    else:
        k1, _, _, _ = _sphere_arguments(geometry, freq)
    zr = k1 * r_a
    lmax = mie_l_max(abs(k1 * geometry.radius)) + mie_l_max(abs(zr)) // 2
    lmax = min(lmax, 190)
    ss = sp = 0.0 + 0.0j
    small = 0
    for l in range(1, lmax + 1):
        if freq_kind == "xi":
            rs, rp, _, _ = mie_coefficients(geometry, l, xi=freq)
        else:
            rs, rp, _, _ = mie_coefficients(geometry, l, omega=freq)
        jl, hl, eta, xil = sph_functions(l, zr)
        term_s = (2 * l + 1) * rs * hl * hl
        term_p = (2 * l + 1) * rp * (l * (l + 1) * (hl / zr) ** 2 + xil ** 2)
        ss += term_s
        sp += term_p
        ref = abs(ss) + abs(sp)
        if ref > 0 and (abs(term_s) + abs(term_p)) < rel_tol * ref:
            small += 1
            if small >= 3:
                break
        else:
            small = 0
    else:
        if abs(term_s) + abs(term_p) > 1e-6 * (abs(ss) + abs(sp)):
            raise NonConvergence("sphere partial-wave sum not converged",
                                 best=(ss, sp))
    return ss, sp


# ---------------------------------------------------------------------------
# Born series for weak arbitrary bodies

def _free_tensor_real(rho_vec, omega):
    """Vacuum G^0 at real omega (complex 3x3)."""
    rho_vec = np.asarray(rho_vec, dtype=float)
    rho = np.linalg.norm(rho_vec)
    if rho == 0:
        raise DomainError("free-space tensor undefined at rho = 0")
    q = omega / C
    n = rho_vec / rho
    x = 1.0 / (q * rho)
    f = x + 1j * x**2 - x**3
    g = x + 3j * x**2 - 3.0 * x**3
    return (q / (4.0 * PI)) * np.exp(1j * q * rho) * (
        f * np.eye(3) - g * np.outer(n, n))


def born_scatter(body, background, omega, r, r_prime, order=1):
    """Born-series scattering tensor of a weak voxelised body.

    G^(S)(r, r') ~ (w^2/c^2) sum_v G0(r, s_v) deps_v G0(s_v, r') dV
    plus the optional second-order double sum (diagonal pairs excluded).
    Midpoint rule over voxels; field points must lie outside the body.
    """
    if order not in (1, 2):
        raise DomainError("order must be 1 or 2")
    if not (isinstance(background.epsilon, Vacuum)
            and isinstance(background.mu, Vacuum)):
        raise DomainError("only a vacuum background is supported")
    r = np.asarray(r, dtype=float)
    rp = np.asarray(r_prime, dtype=float)
    k_sq = (omega / C) ** 2
    dv = body.cell_volume

    g_to = [_free_tensor_real(r - s, omega) for s in body.positions]
    g_from = [_free_tensor_real(s - rp, omega) for s in body.positions]

    first = np.zeros((3, 3), dtype=complex)
    for gv, gf, de in zip(g_to, g_from, body.delta_eps):
        first += de * (gv @ gf)
    first *= k_sq * dv

    if order == 1:
        return first

    second = np.zeros((3, 3), dtype=complex)
    npts = len(body.positions)
    for i in range(npts):
        for j in range(npts):
            if i == j:
                continue
            gmid = _free_tensor_real(body.positions[i] - body.positions[j],
                                     omega)
            second += (body.delta_eps[i] * body.delta_eps[j]
                       * (g_to[i] @ gmid @ g_from[j]))
    second *= k_sq ** 2 * dv ** 2
    if np.linalg.norm(second) > 0.2 * np.linalg.norm(first):
        warnings.warn("second Born order exceeds 20% of the first; the "
                      "series may be unreliable", BornConvergenceWarning,
                      stacklevel=2)
    return first + second


# ---------------------------------------------------------------------------
# local-field corrections (real-cavity model)

_LF_KINDS = ("single_electric", "single_magnetic", "two_point_ee",
             "two_point_em", "two_point_me", "two_point_mm")


def local_field_correct(raw, omega, eps, mu, r_cav, kind):
    """Real-cavity local-field correction of Green-tensor values.

    raw: uncorrected scattering tensor (3x3 array or scalar trace) for the
    single-point kinds, or uncorrected two-point tensor for the two-point
    kinds.  eps and mu are the host responses at the point -- a pair
    (value_1, value_2) for the two-point kinds.  Single-point kinds add
    the cavity terms in R_cav^-3, R_cav^-1 and the constant; two-point
    kinds are pure multiplicative factors.
    """
    if kind not in _LF_KINDS:
        raise DomainError(f"unknown correction kind {kind!r}")
    if kind.startswith("two_point"):
        eps1, eps2 = (eps, eps) if not isinstance(eps, (tuple, list)) else eps
        mu1, mu2 = (mu, mu) if not isinstance(mu, (tuple, list)) else mu
        fe1 = 3.0 * eps1 / (2.0 * eps1 + 1.0)
        fe2 = 3.0 * eps2 / (2.0 * eps2 + 1.0)
        fm1 = 3.0 / (2.0 * mu1 + 1.0)
        fm2 = 3.0 / (2.0 * mu2 + 1.0)
        factor = {"two_point_ee": fe1 * fe2,
                  "two_point_em": fe1 * fm2,
                  "two_point_me": fm1 * fe2,
                  "two_point_mm": fm1 * fm2}[kind]
        return factor * np.asarray(raw, dtype=complex)

    eps = complex(eps)
    mu = complex(mu)
    n = np.sqrt(eps * mu)
    size = abs(n) * r_cav * abs(omega) / C
    if size > 0.1:
        warnings.warn(f"cavity size parameter {size:.3f} > 0.1; the "
                      "local-field expansion degrades", ValidityWarning,
                      stacklevel=2)
    raw = np.asarray(raw, dtype=complex)
    scalar = raw.shape != (3, 3)

    if kind == "single_electric":
        pref = omega / (6.0 * PI * C)
        cavity = pref * (
            3.0 * (eps - 1.0) / (2.0 * eps + 1.0) * (C / (omega * r_cav))**3
            + 9.0 * (eps**2 * (5.0 * mu - 1.0) - 3.0 * eps - 1.0)
            / (5.0 * (2.0 * eps + 1.0)**2) * (C / (omega * r_cav))
            + 1j * (9.0 * eps * n**3 / (2.0 * eps + 1.0)**2 - 1.0))
        factor = (3.0 * eps / (2.0 * eps + 1.0))**2
    else:  # single_magnetic
        pref = -omega**3 / (2.0 * PI * C**2)
        cavity = pref * (
            (mu - 1.0) / (2.0 * mu + 1.0) * (C / (omega * r_cav))**3
            + 0.6 * (mu**2 * (5.0 * eps - 1.0) - 3.0 * mu - 1.0)
            / (2.0 * mu + 1.0)**2 * (C / (omega * r_cav))
            + 1j * (3.0 * mu * n**3 / (2.0 * mu + 1.0)**2 - 1.0 / 3.0))
        factor = (3.0 / (2.0 * mu + 1.0))**2
    if scalar:
        # scalar input is interpreted as the trace; the isotropic cavity
        # addition contributes three times its per-component value
        return 3.0 * cavity + factor * complex(raw)
    return cavity * np.eye(3) + factor * raw
