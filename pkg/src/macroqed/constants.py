"""Physical constants (SI, CODATA 2018)."""

import math

HBAR = 1.054571817e-34      # J s
C = 299792458.0             # m/s
EPS0 = 8.8541878128e-12     # F/m
MU0 = 1.25663706212e-6      # N/A^2
KB = 1.380649e-23           # J/K
MU_B = 9.2740100783e-24     # J/T  (Bohr magneton)
G_S = 2.00231930436         # electron g-factor
E_CHARGE = 1.602176634e-19  # C
A_BOHR = 5.29177210903e-11  # m
U_AMU = 1.66053906660e-27   # kg

DEBYE = 3.33564095e-30      # C m

PI = math.pi
