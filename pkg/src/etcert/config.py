"""Central numerical tolerances.

All thresholds used for validity checks and certification decisions live
here so they can be audited (and overridden in one place if a different
precision regime is ever needed).
"""

# Hermiticity: max entrywise |M - M^dag| accepted for "Hermitian" inputs.
TOL_HERM = 1e-12

# PSD floor: eigenvalues above -TOL_PSD count as non-negative.  Also the
# threshold separating NPT from PPT when classifying marginals.
TOL_PSD = 1e-9

# Eigendecomposition reconstruction: ||M - V diag(w) V^dag||_F relative to
# ||M||_F must stay below this.
TOL_EIG_RECON = 1e-10

# Certification margin: an optimal value must clear solver accuracy by this
# much before a verdict is issued (values in (-EPS_CERT, 0) are "not
# certified" rather than trusted).
EPS_CERT = 1e-5
