"""Numerical Stokes matrices of dF/dz = (U + Phi/z) F by analytic continuation.

The system has one irregular singular point at infinity (rank one, exponential
factors e^{u_k z}) and a Fuchsian point at the origin.  With u purely
imaginary and increasing in imaginary part, the two Stokes sectors are the
half-planes Re z > 0 and Re z < 0, and the canonical frames are

    F+(z) ~ H(z) e^{Uz} z^{dPhi}   on -pi   < arg z < pi   (plus frame),
    F-(z) ~ H(z) e^{Uz} z^{dPhi}   on -2 pi < arg z < 0    (minus frame),

with dPhi the diagonal part of Phi and H(z) = Id + H_1/z + ... the formal
gauge.  The Stokes matrices are read off by continuing one frame into the
other frame's base point and comparing:

    S+ = e^{-i pi dPhi} F-(-R)^{-1} F+cont(-R),
    S- = F+(R)^{-1} F-cont(R) e^{+i pi dPhi},

where F+ is continued clockwise from +R through the lower half-plane to -R
(log(-R) = log R - i pi on its sheet), and F- is continued clockwise from -R
through arg z in (-2 pi, -pi) -- geometrically the upper half-plane -- to +R
(log(+R) = log R - 2 pi i on its sheet).  Both continuations follow a
dumbbell-shaped polygonal contour: inward along the real axis to a small
radius rho, around a semicircular polygon, and outward again, so the path
never approaches the Fuchsian point.

Frames at |z| = R are produced by evaluating the (divergent, optimally
truncated) formal series at 2R and refining by integrating the actual system
down the ray from 2R to R.  Triangularity and the diagonal law of the
resulting matrices are *checked*, never projected: a residual above tolerance
raises :class:`AccuracyError`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .core_linalg import as_matrix
from .errors import AccuracyError, DomainError
from .ode_engine import integrate_contour

__all__ = [
    "IrregularSystem",
    "StokesNumericResult",
    "formal_series_coefficients",
    "canonical_frame",
    "continue_frame",
    "stokes_matrices",
    "monodromy_mismatch",
    "rescaled_phi",
    "default_radius",
]

_RESONANCE_TOL = 1e-8


@dataclass(frozen=True)
class IrregularSystem:
    """The data (u, Phi) of dF/dz = (diag(u) + Phi/z) F, validated on creation.

    Conventions enforced: u is purely imaginary with strictly increasing
    imaginary parts (this pins the sectors to the left and right half-planes);
    neither the diagonal entries of Phi nor its eigenvalues may differ by a
    nonzero integer (resonance would make the frame normalisation ambiguous).
    """

    u: np.ndarray
    phi: np.ndarray

    def __post_init__(self) -> None:
        u = np.asarray(self.u, dtype=complex)
        if u.ndim != 1 or u.shape[0] < 2:
            raise DomainError("u must be a vector of at least two points")
        phi = as_matrix(self.phi, u.shape[0])
        scale = float(np.max(np.abs(u)))
        if scale == 0.0:
            raise DomainError("u must not vanish identically")
        if float(np.max(np.abs(u.real))) > 1e-12 * scale:
            raise DomainError(
                "u must be purely imaginary (sector convention); rotate the "
                "system or transport Phi accordingly"
            )
        ims = u.imag
        if not np.all(np.diff(ims) > 0):
            raise DomainError("Im(u) must be strictly increasing")
        diag = np.diag(phi)
        for i in range(len(u)):
            for j in range(i + 1, len(u)):
                d = diag[i] - diag[j]
                nd = round(d.real)
                if nd != 0 and abs(d - nd) < _RESONANCE_TOL:
                    raise DomainError(
                        f"resonant diagonal: phi_{i}{i} - phi_{j}{j} = {d} is "
                        "within 1e-8 of a nonzero integer"
                    )
        evs = np.linalg.eigvals(phi)
        for i in range(len(evs)):
            for j in range(i + 1, len(evs)):
                d = evs[i] - evs[j]
                nd = round(d.real)
                if nd != 0 and abs(d - nd) < _RESONANCE_TOL:
                    raise DomainError(
                        f"resonant spectrum: eigenvalue difference {d} is "
                        "within 1e-8 of a nonzero integer"
                    )
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "phi", phi)

    @property
    def n(self) -> int:
        return self.u.shape[0]


def default_radius(system: IrregularSystem) -> float:
    """Extraction radius: far enough out that Phi/z is a small perturbation.

    Scales inversely with the minimal u-spacing (which sets the growth of the
    formal series coefficients).
    """
    u = system.u
    n = system.n
    spacing = min(abs(u[i] - u[j]) for i in range(n) for j in range(i + 1, n))
    base = max(60.0, 12.0 * float(np.linalg.norm(system.phi, 2)))
    return base / min(spacing, 1.0)


def formal_series_coefficients(system: IrregularSystem, order: int) -> list[np.ndarray]:
    """Coefficients H_1..H_order of the formal gauge H(z) = Id + sum H_m z^{-m}.

    Recursion: off-diagonal of H_{m+1} solves [U, H_{m+1}] = -m H_m - Phi H_m
    + H_m dPhi; the diagonal of H_m is -(1/m) sum_{k!=i} Phi_ik (H_m)_ki.
    """
    if order < 1:
        raise DomainError("series order must be at least 1")
    u, phi = system.u, system.phi
    n = system.n
    dphi = np.diag(np.diag(phi))
    udiff = u[:, None] - u[None, :]
    off = ~np.eye(n, dtype=bool)
    hs: list[np.ndarray] = []
    h_prev = np.eye(n, dtype=complex)
    for m in range(1, order + 1):
        g = -(m - 1) * h_prev - phi @ h_prev + h_prev @ dphi
        h = np.zeros((n, n), dtype=complex)
        h[off] = g[off] / udiff[off]
        for i in range(n):
            acc = 0.0 + 0.0j
            for k in range(n):
                if k != i:
                    acc += phi[i, k] * h[k, i]
            h[i, i] = -acc / m
        hs.append(h)
        h_prev = h
    return hs


def _system_rhs(system: IrregularSystem):
    u_mat = np.diag(system.u)
    phi = system.phi
    n = system.n

    def rhs(z, state):
        f = state.reshape(n, n)
        return ((u_mat + phi / z) @ f).ravel()

    return rhs


def canonical_frame(system: IrregularSystem, z: complex, log_z: complex, *,
                    order: int = 9, series_factor: float = 2.0,
                    rtol: float = 1e-12, atol: float = 1e-14,
                    hs: list[np.ndarray] | None = None) -> np.ndarray:
    """Canonical frame F(z) on the sheet fixed by ``log_z``.

    Evaluates the optimally-truncated formal series at z * series_factor on
    the same ray (where it is more accurate) and transports the value back to
    z by integrating the system itself.
    """
    z = complex(z)
    if abs(cmath.exp(log_z) - z) > 1e-9 * abs(z):
        raise DomainError("log_z is not a logarithm of z")
    if series_factor < 1.0:
        raise DomainError("series_factor must be >= 1")
    if hs is None:
        hs = formal_series_coefficients(system, order)
    z2 = z * series_factor
    log_z2 = log_z + math.log(series_factor)
    n = system.n
    h = np.eye(n, dtype=complex)
    zm = 1.0 + 0.0j
    for hm in hs:
        zm /= z2
        h = h + hm * zm
    exp_u = np.exp(system.u * z2)
    exp_d = np.exp(np.diag(system.phi) * log_z2)
    f2 = h * exp_u[None, :] * exp_d[None, :]  # H @ diag(e^{uz}) @ diag(z^{dphi})
    if series_factor == 1.0:
        return f2
    res = integrate_contour(_system_rhs(system), [z2, z], f2.ravel(),
                            rtol=rtol, atol=atol)
    return res.y_end.reshape(n, n)


def continue_frame(system: IrregularSystem, f0: np.ndarray, contour, *,
                   rtol: float = 1e-12, atol: float = 1e-14) -> np.ndarray:
    """Analytically continue a frame value along a polygonal contour."""
    n = system.n
    res = integrate_contour(_system_rhs(system), contour,
                            np.asarray(f0, dtype=complex).ravel(),
                            rtol=rtol, atol=atol)
    return res.y_end.reshape(n, n)


@dataclass
class StokesNumericResult:
    s_plus: np.ndarray
    s_minus: np.ndarray
    radius: float
    order: int
    triangularity_residual: float
    diag_residual: float
    series_tail_estimate: float


def _arc(rho: float, theta0: float, theta1: float, n_arc: int) -> list[complex]:
    return [rho * cmath.exp(1j * th)
            for th in np.linspace(theta0, theta1, n_arc + 1)]


def stokes_matrices(system: IrregularSystem, *, radius: float | None = None,
                    order: int = 9, rho: float = 1.5, n_arc: int = 64,
                    rtol: float = 1e-12, atol: float = 1e-14,
                    check_tol: float = 1e-5) -> StokesNumericResult:
    """Compute (S+, S-) numerically via dumbbell continuation.

    Raises :class:`AccuracyError` when the triangular structure or the
    diagonal law e^{-i pi phi_kk} fails beyond ``check_tol`` (relative).
    """
    r = default_radius(system) if radius is None else float(radius)
    if not rho < r / 4:
        raise DomainError(f"inner radius {rho} too large for extraction radius {r}")
    hs = formal_series_coefficients(system, order)
    tail = float(np.max(np.abs(hs[-1]))) * (2.0 * r) ** (-order)

    ln_r = math.log(r)
    f_plus_r = canonical_frame(system, r, ln_r, order=order, rtol=rtol,
                               atol=atol, hs=hs)
    f_minus_mr = canonical_frame(system, -r, ln_r - 1j * math.pi, order=order,
                                 rtol=rtol, atol=atol, hs=hs)

    # F+ continued clockwise through the lower half-plane: arg 0 -> -pi
    lower = [r] + _arc(rho, 0.0, -math.pi, n_arc) + [-r]
    fp_cont = continue_frame(system, f_plus_r, lower, rtol=rtol, atol=atol)
    # F- continued clockwise on its sheet: arg -pi -> -2 pi (upper half-plane)
    upper = [-r] + _arc(rho, -math.pi, -2.0 * math.pi, n_arc) + [r]
    fm_cont = continue_frame(system, f_minus_mr, upper, rtol=rtol, atol=atol)

    diag = np.diag(system.phi)
    e_minus = np.exp(-1j * math.pi * diag)
    s_plus = (e_minus[:, None]) * np.linalg.solve(f_minus_mr, fp_cont)
    s_minus = np.linalg.solve(f_plus_r, fm_cont) * (1.0 / e_minus)[None, :]

    scale = max(1.0, float(np.max(np.abs(s_plus))), float(np.max(np.abs(s_minus))))
    n = system.n
    low_mask = np.tril(np.ones((n, n), dtype=bool), -1)
    up_mask = np.triu(np.ones((n, n), dtype=bool), 1)
    tri = max(float(np.max(np.abs(s_plus[low_mask]))),
              float(np.max(np.abs(s_minus[up_mask])))) / scale
    diag_res = max(
        float(np.max(np.abs(np.diag(s_plus) - e_minus))),
        float(np.max(np.abs(np.diag(s_minus) - e_minus))),
    ) / max(1.0, float(np.max(np.abs(e_minus))))
    if tri > check_tol:
        raise AccuracyError(
            f"Stokes triangularity residual {tri:.3e} exceeds {check_tol:.1e}",
            residual=tri,
        )
    if diag_res > check_tol:
        raise AccuracyError(
            f"Stokes diagonal-law residual {diag_res:.3e} exceeds {check_tol:.1e}",
            residual=diag_res,
        )
    return StokesNumericResult(
        s_plus=s_plus,
        s_minus=s_minus,
        radius=r,
        order=order,
        triangularity_residual=tri,
        diag_residual=diag_res,
        series_tail_estimate=tail,
    )


def monodromy_mismatch(system: IrregularSystem, s_plus: np.ndarray,
                       s_minus: np.ndarray) -> float:
    """Mismatch between eig(S- S+) and exp(-2 pi i eig(Phi)) (best matching)."""
    m = np.asarray(s_minus, dtype=complex) @ np.asarray(s_plus, dtype=complex)
    got = np.linalg.eigvals(m)
    want = np.exp(-2j * math.pi * np.linalg.eigvals(system.phi))
    best = math.inf
    for perm in permutations(range(len(got))):
        cand = max(abs(got[p] - want[i]) for i, p in enumerate(perm))
        best = min(best, cand)
    return float(best)


def rescaled_phi(phi, t: complex, sheet: int = 0) -> np.ndarray:
    """Transported residue t^{-dPhi} Phi t^{dPhi} matching the rescaling u -> t u.

    The Stokes matrices satisfy S(t u, Phi) = t^{dPhi} S(u, Phi) t^{-dPhi};
    transporting Phi this way therefore leaves them invariant.
    """
    m = as_matrix(phi)
    log_t = cmath.log(complex(t)) + 2j * cmath.pi * sheet
    d = np.diag(m)
    e = np.exp(log_t * d)
    return (1.0 / e)[:, None] * m * e[None, :]
