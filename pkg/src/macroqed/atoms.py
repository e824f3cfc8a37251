"""Atomic and molecular source data.

Polarizability / magnetizability spectra built from transition lists,
thermal photon numbers, and the bundled diatomic-molecule table with its
rotational and vibrational heating channels.
"""

import csv
import io
import math
import re
from dataclasses import dataclass
from importlib import resources

from .constants import HBAR, KB, PI, U_AMU
from .errors import DomainError

__all__ = [
    "Polarizability", "Magnetizability", "MoleculeRecord", "ThermalContext",
    "alpha_iso", "beta_iso", "thermal_n",
    "rotational_channel", "vibrational_channel",
    "load_molecules", "molecule", "molecule_names", "molecules_to_csv",
    "ATOMIC_MASS_U",
]

# most-abundant-isotope masses (u) for the species in the bundled table
ATOMIC_MASS_U = {
    "H": 1.00782503207, "Li": 7.016003437, "F": 18.99840316,
    "Na": 22.98976928, "K": 38.96370649, "Ca": 39.96259086,
    "Rb": 84.91178974, "Cs": 132.90545196, "Ba": 137.90524700,
    "Yb": 173.93886755,
}


@dataclass(frozen=True)
class Polarizability:
    """Electric transition list (omega_k0 rad/s, |d_0k|^2 C^2 m^2).

    Only the isotropic trace enters the dispersion formulas; anisotropic
    tensors reduce to it for the atoms treated here.
    """

    transitions: tuple
    isotropic: bool = True

    def __post_init__(self):
        trans = tuple((float(w), float(d2)) for w, d2 in self.transitions)
        for w, d2 in trans:
            if w <= 0:
                raise DomainError("transition frequencies must be > 0")
            if d2 < 0:
                raise DomainError("|d|^2 must be >= 0")
        object.__setattr__(self, "transitions", trans)

    @property
    def d_squared_total(self):
        """<d^2> = sum_k |d_0k|^2."""
        return sum(d2 for _, d2 in self.transitions)

    def static(self):
        return alpha_iso(self, 0.0)


@dataclass(frozen=True)
class Magnetizability:
    """Magnetic transition list (omega_k0 rad/s, |m_0k|^2 J^2/T^2)."""

    transitions: tuple
    isotropic: bool = True

    def __post_init__(self):
        trans = tuple((float(w), float(m2)) for w, m2 in self.transitions)
        for w, m2 in trans:
            if w <= 0:
                raise DomainError("transition frequencies must be > 0")
            if m2 < 0:
                raise DomainError("|m|^2 must be >= 0")
        object.__setattr__(self, "transitions", trans)

    @property
    def m_squared_total(self):
        return sum(m2 for _, m2 in self.transitions)

    def static(self):
        return beta_iso(self, 0.0)


def alpha_iso(pol, xi):
    """Isotropic polarizability on the imaginary axis.

    alpha(i xi) = (2 / 3 hbar) sum_k omega_k0 |d_0k|^2 / (omega_k0^2 + xi^2)
    """
    if xi < 0:
        raise DomainError("xi must be >= 0")
    return (2.0 / (3.0 * HBAR)) * sum(
        w * d2 / (w * w + xi * xi) for w, d2 in pol.transitions)


def beta_iso(mag, xi):
    """Isotropic magnetizability on the imaginary axis (dual of alpha_iso)."""
    if xi < 0:
        raise DomainError("xi must be >= 0")
    return (2.0 / (3.0 * HBAR)) * sum(
        w * m2 / (w * w + xi * xi) for w, m2 in mag.transitions)


@dataclass(frozen=True)
class ThermalContext:
    """Environment temperature in kelvin."""

    temperature: float

    def __post_init__(self):
        if self.temperature < 0:
            raise DomainError("temperature must be >= 0")


def thermal_n(ctx, omega):
    """Mean thermal photon number 1/(exp(hbar omega / kB T) - 1)."""
    if omega <= 0:
        raise DomainError("omega must be > 0")
    if ctx.temperature == 0:
        return 0.0
    x = HBAR * omega / (KB * ctx.temperature)
    if x > 700:
        return 0.0
    return 1.0 / math.expm1(x)


@dataclass(frozen=True)
class MoleculeRecord:
    """Diatomic-molecule constants (SI) with the raw table strings kept
    for byte-identical round trips."""

    name: str
    b_e: float        # rotational constant, Hz
    omega_e: float    # vibrational constant, Hz
    mu_e: float       # dipole moment, C m
    mu_e_prime: float  # dipole derivative, C
    reduced_mass: float  # kg
    tau_r: float      # tabulated rotational lifetime at 293 K, s
    tau_v: float      # tabulated vibrational lifetime at 293 K, s
    raw: tuple = None

    def __post_init__(self):
        for v in (self.b_e, self.omega_e, self.mu_e, self.mu_e_prime,
                  self.reduced_mass):
            if v <= 0:
                raise DomainError("molecule constants must be positive")


def rotational_channel(rec):
    """N = 0 -> 1 rotational heating channel.

    Returns (omega, sum_k |d_0k|^2) with omega = 4 pi B_e (level gap
    2 h B_e) and the dipole trace mu_e^2.
    """
    return 4.0 * PI * rec.b_e, rec.mu_e**2


def vibrational_channel(rec):
    """v = 0 -> 1 vibrational heating channel.

    omega = 2 pi omega_e; dipole trace hbar mu_e'^2 / (4 pi m omega_e)
    (omega_e entering as a frequency in Hz).
    """
    omega = 2.0 * PI * rec.omega_e
    d2 = HBAR * rec.mu_e_prime**2 / (4.0 * PI * rec.reduced_mass * rec.omega_e)
    return omega, d2


def reduced_mass_u(name):
    """Reduced mass in u from the two element symbols in the name."""
    elements = re.findall(r"[A-Z][a-z]?", name)
    if len(elements) != 2:
        raise DomainError(f"cannot parse diatomic name {name!r}")
    try:
        m1, m2 = (ATOMIC_MASS_U[e] for e in elements)
    except KeyError as exc:
        raise DomainError(f"no atomic mass for element {exc}") from exc
    return m1 * m2 / (m1 + m2)


_CSV_FIELDS = ("name", "Be_GHz", "we_THz", "mue_1e-30Cm", "muep_1e-21C",
               "taur_s", "tauv_s", "mred_u")


def _record_from_row(row):
    return MoleculeRecord(
        name=row["name"],
        b_e=float(row["Be_GHz"]) * 1e9,
        omega_e=float(row["we_THz"]) * 1e12,
        mu_e=float(row["mue_1e-30Cm"]) * 1e-30,
        mu_e_prime=float(row["muep_1e-21C"]) * 1e-21,
        reduced_mass=float(row["mred_u"]) * U_AMU,
        tau_r=float(row["taur_s"]),
        tau_v=float(row["tauv_s"]),
        raw=tuple(row[k] for k in _CSV_FIELDS),
    )


def load_molecules(path=None):
    """Load the molecule database (bundled CSV by default).

    Returns an ordered dict name -> MoleculeRecord.
    """
    if path is None:
        text = resources.files("macroqed.data").joinpath(
            "molecules.csv").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    reader = csv.DictReader(io.StringIO(text))
    records = {}
    for row in reader:
        rec = _record_from_row(row)
        records[rec.name] = rec
    return records


def molecules_to_csv(records):
    """Serialize records back to CSV text (inverse of load_molecules)."""
    lines = [",".join(_CSV_FIELDS)]
    for rec in records.values():
        lines.append(",".join(rec.raw))
    return "\n".join(lines) + "\n"


_DB_CACHE = None


def molecule(name):
    """Fetch one bundled MoleculeRecord by name (e.g. 'LiH')."""
    global _DB_CACHE
    if _DB_CACHE is None:
        _DB_CACHE = load_molecules()
    try:
        return _DB_CACHE[name]
    except KeyError:
        raise DomainError(f"unknown molecule {name!r}; see molecule_names()")


def molecule_names():
    global _DB_CACHE
    if _DB_CACHE is None:
        _DB_CACHE = load_molecules()
    return list(_DB_CACHE)
