"""Isomonodromic deformation flow of the residue matrix Phi(u).

The linear system dF/dz = (U + Phi/z) F with U = diag(u) deforms
isomonodromically when Phi obeys, for each coordinate u_k,

    dPhi/du_k = [B_k, Phi],        B_k = [D_k, [E_k, Phi]],

where E_k is the diagonal unit at position k and (D_k)_bb = 1/(u_b - u_k)
for b != k (zero at k).  Entrywise, with c_m = 1/(u_k - u_m) and c_k = 0:

    d(phi_kk)/du_k          = 0
    d(phi_ij)/du_k (i,j!=k) = (c_i - c_j) phi_ik phi_kj
    d(phi_ik)/du_k (i!=k)   = phi_kk c_i phi_ik - (Phi C Phi)_ik
    d(phi_kj)/du_k (j!=k)   = (Phi C Phi)_kj - phi_kk c_j phi_kj

with C = diag(c).  Both forms are implemented independently and the test
suite drives their equality at machine tolerance; the flow itself uses the
equivalent directional form dPhi/dt = [W o Phi, Phi] along a straight
segment u(t) = u0 + t v, where (W)_ij = (v_i - v_j)/(u_i - u_j) and o is the
entrywise product (diagonal zero).

The flow preserves the diagonal of Phi and its spectrum; drift in either is
the integration-quality metric.  ``shrinking_check`` pushes one coordinate
u_k to infinity along its ray and tracks the real eigenvalue-difference band
of the upper 2x2 block, which contracts onto |Re sigma| of the boundary
value.  ``phi_from_omega`` is the bridge from a Painleve VI trajectory
residue matrix Omega(x) to Phi(u) at the matching u-configuration.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .core_linalg import as_matrix, eigen2
from .errors import DomainError
from .ode_engine import integrate

__all__ = [
    "b_field",
    "b_field_commutator",
    "jmms_rhs",
    "jmms_rhs_commutator",
    "flow",
    "flow_path",
    "ShrinkReport",
    "shrinking_check",
    "u_cross_ratio",
    "phi_from_omega",
    "diag_drift",
    "spectral_drift",
]


def _coerce(u, phi) -> tuple[np.ndarray, np.ndarray]:
    uu = np.asarray(u, dtype=complex)
    if uu.ndim != 1:
        raise DomainError("u must be a one-dimensional vector")
    m = as_matrix(phi, uu.shape[0])
    return uu, m


def _check_k(n: int, k: int) -> None:
    if not 0 <= k < n:
        raise DomainError(f"coordinate index {k} outside [0, {n})")


def b_field(u, phi, k: int) -> np.ndarray:
    """The deformation generator B_k: row k carries c_j phi_kj, column k carries c_i phi_ik."""
    uu, m = _coerce(u, phi)
    n = uu.shape[0]
    _check_k(n, k)
    b = np.zeros((n, n), dtype=complex)
    for i in range(n):
        if i == k:
            continue
        ci = 1.0 / (uu[k] - uu[i])
        b[k, i] = ci * m[k, i]
        b[i, k] = ci * m[i, k]
    return b


def b_field_commutator(u, phi, k: int) -> np.ndarray:
    """B_k as the nested commutator [D_k, [E_k, Phi]]."""
    uu, m = _coerce(u, phi)
    n = uu.shape[0]
    _check_k(n, k)
    d = np.zeros((n, n), dtype=complex)
    for b in range(n):
        if b != k:
            d[b, b] = 1.0 / (uu[b] - uu[k])
    e = np.zeros((n, n), dtype=complex)
    e[k, k] = 1.0
    inner = e @ m - m @ e
    return d @ inner - inner @ d


def jmms_rhs_commutator(u, phi, k: int) -> np.ndarray:
    """dPhi/du_k in the commutator form [B_k, Phi]."""
    uu, m = _coerce(u, phi)
    b = b_field(uu, m, k)
    return b @ m - m @ b


def jmms_rhs(u, phi, k: int) -> np.ndarray:
    """dPhi/du_k written out entrywise (independent of the commutator route)."""
    uu, m = _coerce(u, phi)
    n = uu.shape[0]
    _check_k(n, k)
    c = np.zeros(n, dtype=complex)
    for i in range(n):
        if i != k:
            c[i] = 1.0 / (uu[k] - uu[i])
    pcp = m @ np.diag(c) @ m
    out = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            if i == k and j == k:
                continue
            if i == k:
                out[k, j] = pcp[k, j] - m[k, k] * c[j] * m[k, j]
            elif j == k:
                out[i, k] = m[k, k] * c[i] * m[i, k] - pcp[i, k]
            else:
                out[i, j] = (c[i] - c[j]) * m[i, k] * m[k, j]
    return out


# --------------------------------------------------------------------------
# flow along straight segments in u-space


def _segment_collision_check(u0: np.ndarray, u1: np.ndarray, tol: float) -> None:
    """Reject segments along which two u-coordinates (nearly) collide.

    The threshold is relative to the magnitudes of the pair itself (their
    difference suffers catastrophic cancellation once it is small against
    them), not to the largest coordinate overall, so a far-out coordinate
    does not poison the check for the pairs that stay put.
    """
    n = u0.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            pair_scale = max(1.0, abs(u0[i]), abs(u0[j]), abs(u1[i]), abs(u1[j]))
            d0 = u0[i] - u0[j]
            dv = (u1[i] - u1[j]) - d0
            if abs(dv) < 1e-300:
                dist = abs(d0)
            else:
                t = -((d0 * dv.conjugate()).real) / (abs(dv) ** 2)
                t = min(max(t, 0.0), 1.0)
                dist = abs(d0 + t * dv)
            if dist < tol * pair_scale:
                raise DomainError(
                    f"u-coordinates {i} and {j} collide along the segment "
                    f"(minimal separation {dist:.3e})"
                )


def flow(u_start, u_end, phi_start, *, rtol: float = 1e-12, atol: float = 1e-14,
         max_steps: int = 500_000, collision_tol: float = 1e-9) -> np.ndarray:
    """Transport Phi along the straight segment from u_start to u_end.

    Uses the directional form dPhi/dt = [W o Phi, Phi] with
    W_ij = (v_i - v_j)/(u_i(t) - u_j(t)).
    """
    u0, m0 = _coerce(u_start, phi_start)
    u1 = np.asarray(u_end, dtype=complex)
    if u1.shape != u0.shape:
        raise DomainError("u_end must have the same length as u_start")
    _segment_collision_check(u0, u1, collision_tol)
    n = u0.shape[0]
    v = u1 - u0
    if np.max(np.abs(v)) == 0.0:
        return m0.copy()
    vdiff = v[:, None] - v[None, :]

    def rhs(t, state):
        m = state.reshape(n, n)
        udiff = (u0[:, None] - u0[None, :]) + t * vdiff
        w = np.zeros((n, n), dtype=complex)
        off = ~np.eye(n, dtype=bool)
        w[off] = vdiff[off] / udiff[off]
        bw = w * m
        return (bw @ m - m @ bw).ravel()

    sol = integrate(rhs, 0.0, 1.0, m0.ravel(), rtol=rtol, atol=atol,
                    max_steps=max_steps)
    return sol.y_end.reshape(n, n)


def flow_path(points, phi_start, *, rtol: float = 1e-12, atol: float = 1e-14,
              max_steps: int = 500_000, collision_tol: float = 1e-9,
              record: bool = False):
    """Transport Phi along the polygonal u-space path through ``points``.

    Returns the final Phi, or the list of Phi at every path point when
    ``record`` is set (starting with the initial matrix).
    """
    pts = [np.asarray(p, dtype=complex) for p in points]
    if len(pts) < 2:
        raise DomainError("a flow path needs at least two u-configurations")
    phi = as_matrix(phi_start, pts[0].shape[0]).copy()
    recorded = [phi.copy()] if record else None
    for a, b in zip(pts[:-1], pts[1:]):
        phi = flow(a, b, phi, rtol=rtol, atol=atol, max_steps=max_steps,
                   collision_tol=collision_tol)
        if recorded is not None:
            recorded.append(phi.copy())
    return recorded if record else phi


# --------------------------------------------------------------------------
# diagnostics and the Painleve bridge


def diag_drift(phi_a, phi_b) -> float:
    """Max absolute change of the diagonal (conserved by the flow)."""
    a = np.asarray(phi_a, dtype=complex)
    b = np.asarray(phi_b, dtype=complex)
    return float(np.max(np.abs(np.diag(a) - np.diag(b))))


def spectral_drift(phi_a, phi_b) -> float:
    """Max absolute change of the ordered spectrum (conserved by the flow)."""
    va = sorted(np.linalg.eigvals(np.asarray(phi_a, dtype=complex)),
                key=lambda z: (-z.real, -z.imag))
    vb = sorted(np.linalg.eigvals(np.asarray(phi_b, dtype=complex)),
                key=lambda z: (-z.real, -z.imag))
    return float(max(abs(x - y) for x, y in zip(va, vb)))


@dataclass
class ShrinkReport:
    """Band contraction along a ray that carries one u-coordinate outward."""

    factors: list[float]
    bands: list[float]
    u_final: np.ndarray
    phi_final: np.ndarray


def _band(phi: np.ndarray) -> float:
    """Largest |Re(lambda_i - lambda_j)| over the upper-left (n-1) block."""
    block = np.asarray(phi, dtype=complex)[:-1, :-1]
    if block.shape == (2, 2):
        return abs(eigen2(block).sigma.real)
    lam = np.linalg.eigvals(block)
    return float(max(abs((a - b).real) for a in lam for b in lam))


def shrinking_check(u0, phi0, ray: complex | None = None, *,
                    reach: float = 1e8, n_checkpoints: int = 15,
                    coord: int = -1, rtol: float = 1e-12, atol: float = 1e-14,
                    max_steps: int = 2_000_000) -> ShrinkReport:
    """Flow one u-coordinate out along a ray and record the block band.

    The band -- the largest |Re(lambda_i - lambda_j)| over the upper-left
    (n-1) x (n-1) block -- contracts onto the invariant |Re sigma| of the
    boundary value as the separation grows; checkpoints are spaced so that
    |u_k| visits log-uniform multiples of its start value up to ``reach``.
    ``ray`` is the complex direction of travel of coordinate ``coord``
    (default: radially outward); it must not decrease |u_k|.

    The integration runs in the co-moving gauge Psi = c^dPhi Phi c^-dPhi
    with c = |u_k|/|u_k(0)| and dPhi the (conserved) diagonal: the raw Phi
    entries grow like algebraic powers of the separation, which makes the
    commutator right side cancel catastrophically at large reach, while Psi
    stays bounded.  The band and the diagonal are gauge-invariant, and the
    final Phi is reconstructed by undoing the (diagonal) gauge.
    """
    uu, m = _coerce(u0, phi0)
    n = uu.shape[0]
    k = coord % n
    if abs(uu[k]) < 1e-12:
        raise DomainError("ray coordinate must be nonzero to scale it outward")
    if reach <= 1.0:
        raise DomainError("reach must exceed 1")
    direction = uu[k] if ray is None else complex(ray)
    if abs(direction) == 0.0:
        raise DomainError("ray direction must be nonzero")
    if (uu[k].conjugate() * direction).real < -1e-12 * abs(uu[k]) * abs(direction):
        raise DomainError("ray must not decrease |u_k| at the start point")

    r0 = abs(uu[k])
    cross = (uu[k].conjugate() * direction).real

    def s_at(factor: float) -> float:
        # positive root of |u_k + s*direction| = factor * |u_k|
        a = abs(direction) ** 2
        b = 2.0 * cross
        c = r0 ** 2 * (1.0 - factor ** 2)
        disc = b * b - 4.0 * a * c
        return (-b + math.sqrt(max(disc, 0.0))) / (2.0 * a)

    factors = list(np.logspace(0.0, np.log10(reach), n_checkpoints))
    stops = [s_at(f) for f in factors]
    delta = np.diag(m).copy()

    def u_of(s: float) -> np.ndarray:
        u = uu.copy()
        u[k] = uu[k] + s * direction
        return u

    def rhs(s, state):
        psi = state.reshape(n, n)
        uk = uu[k] + s * direction
        rate = (uk.conjugate() * direction).real / abs(uk) ** 2
        b = b_field(u_of(s), psi, k)
        comm = b @ psi - psi @ b
        gauge = (delta[:, None] - delta[None, :]) * psi
        return (rate * gauge + direction * comm).ravel()

    psi = m.copy()
    bands = [_band(psi)]
    for s_a, s_b in zip(stops[:-1], stops[1:]):
        _segment_collision_check(u_of(s_a), u_of(s_b), 1e-9)
        sol = integrate(rhs, s_a, s_b, psi.ravel(), rtol=rtol, atol=atol,
                        max_steps=max_steps)
        psi = sol.y_end.reshape(n, n)
        bands.append(_band(psi))
    # undo the gauge: Phi_ij = Psi_ij * c^(delta_j - delta_i)
    log_c = math.log(abs(uu[k] + stops[-1] * direction) / r0)
    phi_final = psi * np.exp(log_c * (delta[None, :] - delta[:, None]))
    return ShrinkReport(factors=factors, bands=bands, u_final=u_of(stops[-1]),
                        phi_final=phi_final)


def u_cross_ratio(u) -> tuple[complex, complex]:
    """(x, scale) with x = (u2-u1)/(u3-u1) and scale = u3-u1 for a 3-point u."""
    uu = np.asarray(u, dtype=complex)
    if uu.shape != (3,):
        raise DomainError("u must have exactly three coordinates")
    scale = uu[2] - uu[0]
    if scale == 0:
        raise DomainError("u3 = u1: degenerate configuration")
    return (uu[1] - uu[0]) / scale, scale


def phi_from_omega(omega, thetas, scale: complex, sheet: int = 0) -> np.ndarray:
    """Bridge Omega(x) -> Phi(u) = scale^{-dPhi} Omega scale^{dPhi}.

    dPhi = diag(-theta_1..3).  ``sheet`` shifts the logarithm of ``scale`` by
    2 pi i * sheet to select a non-principal branch when the normalisation of
    the irregular system requires it.
    """
    om = as_matrix(omega, 3)
    log_s = cmath.log(complex(scale)) + 2j * cmath.pi * sheet
    t = np.array([complex(th) for th in thetas[:3]], dtype=complex)
    # (scale^{-dPhi})_ii = exp(log_s * theta_i)
    e = np.exp(log_s * t)
    return (e[:, None] * om) / e[None, :]
