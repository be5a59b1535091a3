"""Published four-decimal values of (gamma0, sigma2) at phi = 0.5.

Used to flag computed profiles that drift from the tabulated values.
"""

from __future__ import annotations

from .innovations import Innovation

PHI = 0.5

LYAPUNOV_TABLE = {
    (Innovation.GAUSSIAN, 3.1): (-0.0297, 1.2326),
    (Innovation.GAUSSIAN, 3.3058): (0.0000, 1.2328),
    (Innovation.GAUSSIAN, 3.5): (0.0265, 1.2326),
    (Innovation.T5STD, 4.1): (-0.0289, 1.3355),
    (Innovation.T5STD, 4.3697): (0.0000, 1.3368),
    (Innovation.T5STD, 4.5): (0.0133, 1.3374),
    (Innovation.LAPLACE, 5.0): (-0.0143, 1.4357),
    (Innovation.LAPLACE, 5.1726): (0.0000, 1.4396),
    (Innovation.LAPLACE, 5.4): (0.0182, 1.4443),
}

BOUNDARY_ALPHA = {
    Innovation.GAUSSIAN: 3.3058,
    Innovation.T5STD: 4.3697,
    Innovation.LAPLACE: 5.1726,
}

FLAG_TOL = 5e-4


def compare(profile) -> list[str]:
    """Messages for every tabulated quantity deviating by more than ``FLAG_TOL``."""
    if abs(profile.phi - PHI) > 1e-12:
        return []
    key = (Innovation.parse(profile.innovation), round(profile.alpha, 4))
    if key not in LYAPUNOV_TABLE:
        return []
    g_ref, s_ref = LYAPUNOV_TABLE[key]
    out = []
    if abs(profile.gamma0 - g_ref) > FLAG_TOL:
        out.append(f"gamma0 {profile.gamma0:.6f} differs from tabulated {g_ref:.4f}")
    if abs(profile.sigma2 - s_ref) > FLAG_TOL:
        out.append(f"sigma2 {profile.sigma2:.6f} differs from tabulated {s_ref:.4f}")
    return out
