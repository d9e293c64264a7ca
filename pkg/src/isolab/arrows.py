"""Closed-form maps between the four coordinate systems of the correspondence.

Data flows through four descriptions of the same monodromy object:

* ``PviAsymptoticData`` -- the asymptotic data (theta, sigma, J) of a
  Painleve VI transcendent at x = 0, with y(x) ~ J x^(1-sigma);
* ``BoundaryValue`` -- the regularised boundary value Phi0 of the
  isomonodromic flow, a 3x3 matrix with diagonal (-theta1, -theta2, -theta3);
* ``StokesPair`` -- the Stokes matrices (S+, S-) of the rank-one irregular
  system dF/dz = (U + Phi/z) F attached to the flow;
* ``MonodromyData`` -- trace coordinates p_ij, p_k of the monodromy
  representation, which satisfy the Fricke-type cubic relation.

The maps:

* ``arrow_q``:       (theta, sigma, J)    -> Phi0          (explicit entries)
* ``arrow_q_sigma0``: logarithmic variant at sigma = 0
* ``arrow_q_inverse``: Phi0 -> (theta, sigma, J)
* ``arrow_g``:       Phi0 -> (S+, S-)     (Gamma-product formulas)
* ``arrow_g_direct``: (theta, sigma, J) with gauge (k1, k2) -> (S+, S-)
* ``arrow_p``:       (S+, S-) -> trace coordinates
* ``arrow_f``:       trace coordinates -> (sigma, J)  (the asymptotic
                      reconstruction formula, inverse to the composition)

``arrow_f(arrow_p(arrow_g(arrow_q(d))))`` is the identity on (sigma, J);
the acceptance suite drives that identity over a deterministic sample sweep.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from math import pi

import numpy as np

from .core_linalg import (
    as_matrix,
    eigen2,
    eigen3,
    matrix_from_json,
    matrix_to_json,
    minor,
)
from .errors import DisambiguationError, DomainError, GammaPoleError
from .special_fn import gamma_c, gamma_hat

__all__ = [
    "PviAsymptoticData",
    "BoundaryValue",
    "StokesPair",
    "MonodromyData",
    "genericity_margin",
    "validate_generic",
    "arrow_q",
    "arrow_q_sigma0",
    "arrow_q_inverse",
    "arrow_g",
    "arrow_g_direct",
    "arrow_p",
    "arrow_f",
    "stokes_diag",
    "stokes_upper_entry",
    "stokes_lower_entry",
    "p23_p13_closed_form",
    "trace_identity_residual",
    "cubic_residual",
    "wrap_pair",
    "pvi_data_to_json",
    "pvi_data_from_json",
    "monodromy_to_json",
    "monodromy_from_json",
    "stokes_pair_to_json",
    "stokes_pair_from_json",
]

#: Hard-error distance for Gamma poles / integer genericity checks.
GENERICITY_TOL = 1e-9


@dataclass(frozen=True)
class PviAsymptoticData:
    """Asymptotic data (theta1, theta2, theta3, theta_inf; sigma; J).

    ``sigma`` is normalised to the strip 0 <= Re(sigma) < 1; ``J`` is the
    coefficient of the leading power x^(1-sigma).  (In the logarithmic
    regime sigma = 0 the field ``J`` carries the shift parameter of the
    log-squared seed instead; see ``arrow_q_sigma0``.)
    """

    theta1: complex
    theta2: complex
    theta3: complex
    theta_inf: complex
    sigma: complex
    J: complex

    @property
    def thetas(self) -> tuple[complex, complex, complex, complex]:
        return (self.theta1, self.theta2, self.theta3, self.theta_inf)


@dataclass(frozen=True)
class BoundaryValue:
    """Boundary value Phi0 of the flow together with its diagonal gauge (k1, k2).

    The gauge records which representative of the diagonal-conjugation orbit
    the matrix is: ``phi0`` equals the k1 = k2 = 1 representative conjugated
    by diag(k1, k2, 1).
    """

    phi0: np.ndarray
    k1: complex = 1.0
    k2: complex = 1.0


@dataclass(frozen=True)
class StokesPair:
    """Stokes matrices: ``s_plus`` upper triangular, ``s_minus`` lower triangular."""

    s_plus: np.ndarray
    s_minus: np.ndarray


@dataclass(frozen=True)
class MonodromyData:
    """Trace coordinates: p_ij = tr(M_i M_j), p_k = tr(M_k) = 2 cos(pi theta_k)."""

    p12: complex
    p13: complex
    p23: complex
    p1: complex
    p2: complex
    p3: complex
    p_inf: complex


# --------------------------------------------------------------------------
# genericity


def _dist_int(z: complex) -> float:
    return abs(z - round(z.real))


def _dist_even(z: complex) -> float:
    return abs(z - 2 * round(z.real / 2))


def genericity_margin(d: PviAsymptoticData) -> float:
    """Smallest distance to any excluded locus of the generic parameter domain.

    The loci: sigma on the strip boundary (Re sigma in {0, 1}) or sigma = 0;
    J = 0; any theta an integer; any of the eight combinations
    theta1 +/- theta2 +/- sigma, theta_inf +/- theta3 +/- sigma an even
    integer; theta_inf = 0 or theta_inf = +/-(theta1+theta2+theta3).
    """
    t1, t2, t3, ti = d.theta1, d.theta2, d.theta3, d.theta_inf
    s = d.sigma
    margins = [
        s.real,
        1.0 - s.real,
        abs(s),
        abs(d.J),
        _dist_int(t1),
        _dist_int(t2),
        _dist_int(t3),
        _dist_int(ti),
        abs(ti),
        abs(ti - (t1 + t2 + t3)),
        abs(ti + (t1 + t2 + t3)),
    ]
    for e1 in (1, -1):
        for e2 in (1, -1):
            margins.append(_dist_even(t1 + e1 * t2 + e2 * s))
            margins.append(_dist_even(ti + e1 * t3 + e2 * s))
    return float(min(margins))


def validate_generic(d: PviAsymptoticData, tol: float = GENERICITY_TOL) -> list[str]:
    """List of genericity conditions violated within ``tol`` (empty when generic)."""
    t1, t2, t3, ti = d.theta1, d.theta2, d.theta3, d.theta_inf
    s = d.sigma
    bad: list[str] = []
    if s.real < tol:
        bad.append(f"Re(sigma) = {s.real} is not in (0, 1)")
    if s.real > 1.0 - tol:
        bad.append(f"Re(sigma) = {s.real} is not below 1")
    if abs(s) < tol:
        bad.append("sigma = 0 (use the logarithmic variant)")
    if abs(d.J) < tol:
        bad.append("J = 0")
    for name, t in (("theta1", t1), ("theta2", t2), ("theta3", t3), ("theta_inf", ti)):
        if _dist_int(t) < tol:
            bad.append(f"{name} = {t} is an integer")
    if abs(ti) < tol:
        bad.append("theta_inf = 0")
    if abs(ti - (t1 + t2 + t3)) < tol or abs(ti + (t1 + t2 + t3)) < tol:
        bad.append("theta_inf = +/-(theta1 + theta2 + theta3)")
    for e1 in (1, -1):
        for e2 in (1, -1):
            x = t1 + e1 * t2 + e2 * s
            if _dist_even(x) < tol:
                bad.append(f"theta1 {'+' if e1 > 0 else '-'} theta2 "
                           f"{'+' if e2 > 0 else '-'} sigma = {x} is an even integer")
            x = ti + e1 * t3 + e2 * s
            if _dist_even(x) < tol:
                bad.append(f"theta_inf {'+' if e1 > 0 else '-'} theta3 "
                           f"{'+' if e2 > 0 else '-'} sigma = {x} is an even integer")
    return bad


def _require_generic(d: PviAsymptoticData, tol: float = GENERICITY_TOL) -> None:
    bad = validate_generic(d, tol)
    if bad:
        raise DomainError("parameters are non-generic: " + "; ".join(bad))


# --------------------------------------------------------------------------
# arrow_q and relatives


def arrow_q(d: PviAsymptoticData) -> BoundaryValue:
    """Boundary value Phi0 from the asymptotic data (generic sigma != 0 branch).

    The diagonal is (-theta1, -theta2, -theta3); the upper 2x2 block encodes
    sigma through its eigenvalue difference; the third row and column carry
    the J-dependence.  Gauge normalisation: k1 = k2 = 1.
    """
    _require_generic(d)
    t1, t2, t3, ti = d.theta1, d.theta2, d.theta3, d.theta_inf
    s, J = d.sigma, d.J
    s2 = s * s
    e12 = (t1 - t2 - s) / 2
    e21 = (-t1 + t2 - s) / 2
    e13 = (-t3 - ti + s) / 2 - (t1 - t2 - s) * (t1 + t2 - s) * (t3 + ti + s) / (8 * s2 * J)
    e23 = (-t3 - ti + s) / 2 - (t1 - t2 + s) * (t1 + t2 - s) * (t3 + ti + s) / (8 * s2 * J)
    e31 = (J / 2) * (t3 - ti + s) - (-t1 + t2 - s) * (t1 + t2 + s) * (t3 - ti - s) / (8 * s2)
    e32 = (J / 2) * (-t3 + ti - s) - (t1 - t2 - s) * (t1 + t2 + s) * (t3 - ti - s) / (8 * s2)
    phi0 = np.array(
        [[-t1, e12, e13],
         [e21, -t2, e23],
         [e31, e32, -t3]],
        dtype=complex,
    )
    return BoundaryValue(phi0, 1.0, 1.0)


def arrow_q_sigma0(
    thetas: tuple[complex, complex, complex, complex], j_tilde: complex
) -> BoundaryValue:
    """Boundary value in the logarithmic regime sigma = 0.

    ``j_tilde`` is the shift parameter of the log-squared seed
    y ~ x [ (theta2^2-theta1^2)/4 (log x + 2 j_tilde/(theta1^2-theta2^2))^2
            + theta1^2/(theta1^2-theta2^2) ].
    Requires theta1 != +/- theta2.
    """
    t1, t2, t3, ti = (complex(t) for t in thetas)
    dsq = t1 * t1 - t2 * t2
    if abs(t1 - t2) < GENERICITY_TOL or abs(t1 + t2) < GENERICITY_TOL:
        raise DomainError("arrow_q_sigma0 requires theta1 != +/- theta2")
    jt = complex(j_tilde)
    phi0 = np.array(
        [
            [-t1, (t1 - t2) / 2, 1 + (t3 + ti) * (jt - t1) / dsq],
            [(-t1 + t2) / 2, -t2, 1 + (t3 + ti) * (jt + t2) / dsq],
            [
                (t3 - ti) / 4 * (jt + t1) - dsq / 4,
                (t3 - ti) / 4 * (t2 - jt) + dsq / 4,
                -t3,
            ],
        ],
        dtype=complex,
    )
    return BoundaryValue(phi0, 1.0, 1.0)


def _phi_matrix(b: BoundaryValue | np.ndarray) -> np.ndarray:
    if isinstance(b, BoundaryValue):
        return as_matrix(b.phi0, 3)
    return as_matrix(b, 3)


def _invariant_functionals(m: np.ndarray) -> np.ndarray:
    """Diagonal-gauge invariants separating the theta_inf sign candidates."""
    return np.array(
        [
            m[0, 1] * m[1, 0],
            m[0, 2] * m[2, 0],
            m[1, 2] * m[2, 1],
            m[0, 1] * m[1, 2] * m[2, 0],
        ],
        dtype=complex,
    )


def arrow_q_inverse(b: BoundaryValue | np.ndarray, tol: float = 1e-8) -> PviAsymptoticData:
    """Asymptotic data from a boundary-value matrix.

    theta_i = -phi_ii; sigma is the ordered eigenvalue difference of the
    upper 2x2 block; theta_inf is recovered up to sign from the sum of the
    off-diagonal pair products, and J follows from the linear relation with
    the remaining cubic invariant.  The sign ambiguity is intrinsic -- the
    two candidates (theta_inf, J) and (-theta_inf, J * rho) reproduce the
    same diagonal-gauge orbit -- so the principal-root representative with
    Re theta_inf >= 0 is returned.  Candidates are still validated by
    rebuilding the matrix and matching its gauge invariants against the
    input; a corrupt matrix that matches neither sign raises
    ``DisambiguationError``.

    The output is independent of the diagonal gauge of the input.
    """
    m = _phi_matrix(b)
    t1, t2, t3 = -m[0, 0], -m[1, 1], -m[2, 2]
    pair = eigen2(m[:2, :2])
    if pair.degenerate:
        raise DomainError(
            "arrow_q_inverse: upper 2x2 block has sigma ~ 0; the power-law "
            "asymptotic data is not defined (logarithmic regime)"
        )
    s = pair.sigma
    ti_sq = (
        4 * (m[0, 1] * m[1, 0] + m[1, 2] * m[2, 1] + m[2, 0] * m[0, 2])
        + t1 * t1 + t2 * t2 + t3 * t3
        - 2 * (t1 * t2 + t2 * t3 + t1 * t3)
    )
    ti_root = cmath.sqrt(ti_sq)
    if abs(ti_root) < GENERICITY_TOL:
        raise DomainError("arrow_q_inverse: theta_inf = 0 is outside the generic domain")
    rhs = (
        (m[0, 2] * m[2, 0] - m[2, 1] * m[1, 2])
        + (m[1, 1] - m[0, 0]) * (2 * m[2, 2] - m[0, 0] - m[1, 1]) / 4
        + (2 / s) * (m[0, 2] * m[2, 1] * m[1, 0] - m[1, 2] * m[2, 0] * m[0, 1])
        + (t1 * t1 - t2 * t2) * (t3 * t3 - ti_sq) / (4 * s * s)
    )
    target = _invariant_functionals(m)
    scale = max(1.0, float(np.max(np.abs(target))))
    matches: list[tuple[complex, complex]] = []
    for ti in (ti_root, -ti_root):
        den = (ti + t3 - s) * (ti - t3 - s)
        if abs(den) < GENERICITY_TOL:
            continue
        J = rhs / den
        candidate = PviAsymptoticData(t1, t2, t3, ti, s, J)
        if validate_generic(candidate):
            continue
        rebuilt = arrow_q(candidate).phi0
        err = float(np.max(np.abs(_invariant_functionals(rebuilt) - target)))
        if err < tol * scale:
            matches.append((ti, J))
    if not matches:
        raise DisambiguationError(
            "arrow_q_inverse: neither sign of theta_inf reproduces the input invariants"
        )
    # The data-to-gauge-class map is two-to-one: (theta_inf, J) and
    # (-theta_inf, J * rho) with rho = ((theta_inf-sigma)^2 - theta3^2) /
    # ((theta_inf+sigma)^2 - theta3^2) produce the same orbit, so generically
    # both signs match and we return the principal-root representative
    # (Re theta_inf >= 0, with Im theta_inf >= 0 on the boundary).
    ti, J = matches[0]
    return PviAsymptoticData(t1, t2, t3, ti, s, J)


# --------------------------------------------------------------------------
# arrow_g: Gamma-product closed form for the Stokes matrices


def _gamma(z: complex, what: str) -> complex:
    try:
        return gamma_c(z, pole_tol=GENERICITY_TOL)
    except GammaPoleError as exc:
        raise GammaPoleError(
            f"{what}: Gamma argument {z} within {GENERICITY_TOL} of pole "
            f"{exc.nearest_pole}",
            nearest_pole=exc.nearest_pole,
        ) from exc


def _block_spectra(phi: np.ndarray) -> list[list[complex]]:
    """Ordered eigenvalue lists of the leading k x k blocks, k = 1..n."""
    n = phi.shape[0]
    out: list[list[complex]] = []
    for k in range(1, n + 1):
        if k == 1:
            out.append([complex(phi[0, 0])])
        elif k == 2:
            p = eigen2(phi[:2, :2])
            out.append([p.lambda1, p.lambda2])
        elif k == 3:
            out.append(list(eigen3(phi[:3, :3]).values))
        else:
            vals = np.linalg.eigvals(phi[:k, :k])
            out.append(sorted((complex(v) for v in vals), key=lambda z: (-z.real, -z.imag)))
    return out


def stokes_diag(phi0) -> np.ndarray:
    """Shared diagonal of S+ and S-: exp(-i pi phi_kk)."""
    m = as_matrix(phi0)
    return np.exp(-1j * pi * np.diag(m))


def stokes_upper_entry(phi0, k: int, spectra: list[list[complex]] | None = None) -> complex:
    """(S+)_{k,k+1} for 1 <= k <= n-1 (1-based indices), any matrix size.

    One Gamma-product term per eigenvalue of the leading k x k block; the
    minor selects rows 1..k and columns 1..k-1,k+1 of lambda*Id - Phi0.
    """
    m = as_matrix(phi0)
    n = m.shape[0]
    if not 1 <= k <= n - 1:
        raise DomainError(f"stokes_upper_entry: k={k} outside [1, {n - 1}]")
    sp = spectra if spectra is not None else _block_spectra(m)
    lam_k = sp[k - 1]
    lam_up = sp[k]
    lam_dn = sp[k - 2] if k >= 2 else []
    rows = tuple(range(k))
    cols = tuple(range(k - 1)) + (k,)
    pref = 2j * pi * cmath.exp(-1j * pi * m[k - 1, k - 1])
    total = 0.0 + 0.0j
    eye = np.eye(n, dtype=complex)
    for i, li in enumerate(lam_k):
        num = 1.0 + 0.0j
        for l, ll in enumerate(lam_k):
            if l != i:
                num *= _gamma(1 + li - ll, "stokes_upper_entry")
                num *= _gamma(li - ll, "stokes_upper_entry")
        den = 1.0 + 0.0j
        for ll in lam_up:
            den *= _gamma(1 + li - ll, "stokes_upper_entry")
        for ll in lam_dn:
            den *= _gamma(1 + li - ll, "stokes_upper_entry")
        mnr = minor(li * eye - m, rows, cols)
        total += num / den * mnr
    return pref * total


def stokes_lower_entry(phi0, k: int, spectra: list[list[complex]] | None = None) -> complex:
    """(S-)_{k+1,k} for 1 <= k <= n-1 (1-based indices), any matrix size.

    Mirror of :func:`stokes_upper_entry` with reversed eigenvalue differences
    and the transposed minor (rows 1..k-1,k+1; columns 1..k).
    """
    m = as_matrix(phi0)
    n = m.shape[0]
    if not 1 <= k <= n - 1:
        raise DomainError(f"stokes_lower_entry: k={k} outside [1, {n - 1}]")
    sp = spectra if spectra is not None else _block_spectra(m)
    lam_k = sp[k - 1]
    lam_up = sp[k]
    lam_dn = sp[k - 2] if k >= 2 else []
    rows = tuple(range(k - 1)) + (k,)
    cols = tuple(range(k))
    pref = -2j * pi * cmath.exp(-1j * pi * m[k, k])
    total = 0.0 + 0.0j
    eye = np.eye(n, dtype=complex)
    for i, li in enumerate(lam_k):
        num = 1.0 + 0.0j
        for l, ll in enumerate(lam_k):
            if l != i:
                num *= _gamma(1 + ll - li, "stokes_lower_entry")
                num *= _gamma(ll - li, "stokes_lower_entry")
        den = 1.0 + 0.0j
        for ll in lam_up:
            den *= _gamma(1 + ll - li, "stokes_lower_entry")
        for ll in lam_dn:
            den *= _gamma(1 + ll - li, "stokes_lower_entry")
        mnr = minor(m - li * eye, rows, cols)
        total += num / den * mnr
    return pref * total


def _corner_entries(m: np.ndarray, sp: list[list[complex]]) -> tuple[complex, complex]:
    """The (1,3) entry of S+ and the (3,1) entry of S- for n = 3."""
    lam11 = sp[0][0]
    l1, l2 = sp[1]
    ms = sp[2]
    phi33 = m[2, 2]
    scale = max(1.0, abs(l1), abs(l2))

    s_plus_13 = 0.0 + 0.0j
    s_minus_31 = 0.0 + 0.0j
    for li, lo in ((l1, l2), (l2, l1)):
        if abs(lam11 - li) < 1e-12 * scale:
            raise DomainError(
                "arrow_g: phi_11 coincides with an eigenvalue of the upper 2x2 "
                "block (the off-diagonal product phi_12 phi_21 vanishes)"
            )
        gnum = _gamma(1 + li - lo, "arrow_g corner") * _gamma(li - lo, "arrow_g corner")
        gden = _gamma(1 + lam11 - lo, "arrow_g corner")
        for mm in ms:
            gden *= _gamma(1 + li - mm, "arrow_g corner")
        mnr = minor(m - li * np.eye(3, dtype=complex), (0, 1), (0, 2))
        s_plus_13 += (
            -2j * pi * cmath.exp(-1j * pi * li)
            * gnum / gden
            * m[0, 1] * mnr / (lam11 - li)
        )

        gnum_m = _gamma(1 + lo - li, "arrow_g corner") * _gamma(lo - li, "arrow_g corner")
        gden_m = _gamma(1 + lo - lam11, "arrow_g corner")
        for mm in ms:
            gden_m *= _gamma(1 + mm - li, "arrow_g corner")
        mnr_m = minor(m - li * np.eye(3, dtype=complex), (0, 2), (0, 1))
        s_minus_31 += (
            2j * pi * cmath.exp(1j * pi * (lam11 - li - phi33))
            * gnum_m / gden_m
            * m[1, 0] * mnr_m / (lam11 - li)
        )
    return s_plus_13, s_minus_31


def arrow_g(b: BoundaryValue | np.ndarray) -> StokesPair:
    """Stokes matrices of the irregular system attached to the boundary value.

    The entries are the Gamma-product expressions in the eigenvalues of the
    leading blocks of Phi0.  Requires |Re(lambda1 - lambda2)| < 1 for the
    upper 2x2 block and non-resonant Gamma arguments throughout.
    """
    m = _phi_matrix(b)
    sp = _block_spectra(m)
    if abs((sp[1][0] - sp[1][1]).real) >= 1.0:
        raise DomainError(
            "arrow_g: Re of the upper-block eigenvalue difference must lie in (-1, 1), "
            f"got {(sp[1][0] - sp[1][1]).real}"
        )
    diag = stokes_diag(m)
    s_plus = np.diag(diag)
    s_minus = np.diag(diag)
    s_plus[0, 1] = stokes_upper_entry(m, 1, sp)
    s_plus[1, 2] = stokes_upper_entry(m, 2, sp)
    s_minus[1, 0] = stokes_lower_entry(m, 1, sp)
    s_minus[2, 1] = stokes_lower_entry(m, 2, sp)
    c13, c31 = _corner_entries(m, sp)
    s_plus[0, 2] = c13
    s_minus[2, 0] = c31
    return StokesPair(s_plus, s_minus)


def _lower_inverse(s_minus: np.ndarray) -> np.ndarray:
    """Exact inverse of a 3x3 lower-triangular matrix."""
    d1, d2, d3 = s_minus[0, 0], s_minus[1, 1], s_minus[2, 2]
    a, b, c = s_minus[1, 0], s_minus[2, 0], s_minus[2, 1]
    if d1 == 0 or d2 == 0 or d3 == 0:
        raise DomainError("singular lower-triangular matrix")
    w = np.zeros((3, 3), dtype=complex)
    w[0, 0] = 1 / d1
    w[1, 1] = 1 / d2
    w[2, 2] = 1 / d3
    w[1, 0] = -a / (d1 * d2)
    w[2, 1] = -c / (d2 * d3)
    w[2, 0] = (a * c - b * d2) / (d1 * d2 * d3)
    return w


def arrow_g_direct(d: PviAsymptoticData, k1: complex = 1.0, k2: complex = 1.0) -> StokesPair:
    """Stokes matrices directly from the asymptotic data, in gauge (k1, k2).

    The (1,2), (2,3) entries of S+ and the (2,1), (3,2) entries of S-^{-1}
    use the explicit Gamma-product expressions in (theta, sigma, J); the two
    corner entries are implementation-defined and obtained by conjugating
    the ``arrow_g(arrow_q(d))`` corners by diag(k1, k2, 1).
    """
    _require_generic(d)
    t1, t2, t3, ti = d.theta1, d.theta2, d.theta3, d.theta_inf
    s, J = d.sigma, d.J
    k1 = complex(k1)
    k2 = complex(k2)
    if k1 == 0 or k2 == 0:
        raise DomainError("arrow_g_direct: gauge constants must be nonzero")
    g = lambda z: _gamma(z, "arrow_g_direct")  # noqa: E731 - local shorthand

    e_p = [cmath.exp(1j * pi * t) for t in (t1, t2, t3)]
    e_m = [cmath.exp(-1j * pi * t) for t in (t1, t2, t3)]

    sp12 = -(k1 / k2) * 2j * pi * e_p[0] * (t1 - t2 - s) / (
        2 * g(1 + (t2 - t1 + s) / 2) * g(1 + (t2 - t1 - s) / 2)
    )
    w21 = -(k2 / k1) * 2j * pi * e_m[0] * (t1 - t2 + s) / (
        2 * g(1 - (t2 - t1 + s) / 2) * g(1 - (t2 - t1 - s) / 2)
    )

    g1m = g(1 - s) ** 2
    g1p = g(s) ** 2
    sp23_1 = g1m * (t3 + ti - s) / (
        2 * g(1 - (t1 + t2 + s) / 2) * g(1 + (t1 - t2 - s) / 2)
        * g(1 + (t3 + ti - s) / 2) * g(1 + (t3 - ti - s) / 2)
    )
    sp23_2 = g1p * (t1 - t2 + s) * (t1 + t2 - s) * (t3 + ti + s) / (
        8 * J
        * g(1 - (t1 + t2 - s) / 2) * g(1 + (t1 - t2 + s) / 2)
        * g(1 + (t3 + ti + s) / 2) * g(1 + (t3 - ti + s) / 2)
    )
    sp23 = k2 * 2j * pi * e_p[1] * (sp23_1 + sp23_2)

    w32_1 = g1p * (t2 - t1 + s) * (t1 + t2 + s) * (t3 - ti - s) / (
        8
        * g(1 + (t1 + t2 + s) / 2) * g(1 - (t1 - t2 - s) / 2)
        * g(1 - (t3 + ti - s) / 2) * g(1 - (t3 - ti - s) / 2)
    )
    w32_2 = J * g1m * (-t3 + ti - s) / (
        2
        * g(1 + (t1 + t2 - s) / 2) * g(1 - (t1 - t2 + s) / 2)
        * g(1 - (t3 + ti + s) / 2) * g(1 - (t3 - ti + s) / 2)
    )
    w32 = (1 / k2) * 2j * pi * e_m[1] * (w32_1 + w32_2)

    # corner entries via the composed map, transported to the (k1, k2) gauge
    ref = arrow_g(arrow_q(d))
    sp13 = k1 * ref.s_plus[0, 2]
    w_ref = _lower_inverse(ref.s_minus)
    w31 = (1 / k1) * w_ref[2, 0]

    s_plus = np.diag(np.array(e_p, dtype=complex))
    s_plus[0, 1] = sp12
    s_plus[1, 2] = sp23
    s_plus[0, 2] = sp13
    w = np.diag(np.array(e_m, dtype=complex))
    w[1, 0] = w21
    w[2, 1] = w32
    w[2, 0] = w31
    # S- is the inverse of the assembled W = S-^{-1} (also lower triangular)
    s_minus = _lower_inverse(w)
    return StokesPair(s_plus, s_minus)


# --------------------------------------------------------------------------
# arrow_p: Stokes -> trace coordinates


def _check_stokes_shape(s: StokesPair, tol: float) -> None:
    sp = as_matrix(s.s_plus, 3)
    sm = as_matrix(s.s_minus, 3)
    scale = max(1.0, float(np.max(np.abs(sp))), float(np.max(np.abs(sm))))
    lower = max(abs(sp[1, 0]), abs(sp[2, 0]), abs(sp[2, 1]))
    upper = max(abs(sm[0, 1]), abs(sm[0, 2]), abs(sm[1, 2]))
    if max(lower, upper) > tol * scale:
        raise DomainError(
            f"arrow_p: Stokes pair is not triangular (residual {max(lower, upper):.3e})"
        )


def arrow_p(
    s: StokesPair,
    thetas: tuple[complex, complex, complex, complex],
    shape_tol: float = 1e-6,
) -> MonodromyData:
    """Trace coordinates from a Stokes pair.

    p_ij = 2 cos(pi (theta_i - theta_j)) - (S+)_ij (S-^{-1})_ji for i < j,
    p_k = 2 cos(pi theta_k), p_inf = 2 cos(pi theta_inf).  The diagonal law
    (S+-)_kk = exp(i pi theta_k) is validated against ``thetas``.
    """
    _check_stokes_shape(s, shape_tol)
    t1, t2, t3, ti = (complex(t) for t in thetas)
    sp = as_matrix(s.s_plus, 3)
    sm = as_matrix(s.s_minus, 3)
    for k, t in enumerate((t1, t2, t3)):
        want = cmath.exp(1j * pi * t)
        for name, mat in (("S+", sp), ("S-", sm)):
            if abs(mat[k, k] - want) > shape_tol * max(1.0, abs(want)):
                raise DomainError(
                    f"arrow_p: diagonal law violated at {name}[{k},{k}] = {mat[k, k]}, "
                    f"expected exp(i pi theta_{k + 1}) = {want}"
                )
    w = _lower_inverse(sm)
    p12 = 2 * cmath.cos(pi * (t1 - t2)) - sp[0, 1] * w[1, 0]
    p13 = 2 * cmath.cos(pi * (t1 - t3)) - sp[0, 2] * w[2, 0]
    p23 = 2 * cmath.cos(pi * (t2 - t3)) - sp[1, 2] * w[2, 1]
    return MonodromyData(
        p12=p12,
        p13=p13,
        p23=p23,
        p1=2 * cmath.cos(pi * t1),
        p2=2 * cmath.cos(pi * t2),
        p3=2 * cmath.cos(pi * t3),
        p_inf=2 * cmath.cos(pi * ti),
    )


# --------------------------------------------------------------------------
# arrow_f: trace coordinates -> (sigma, J)


def _c_factor(
    thetas: tuple[complex, complex, complex, complex], s: complex
) -> complex:
    """The Gamma-ratio factor of the asymptotic reconstruction formula."""
    t1, t2, t3, ti = thetas
    gh = lambda x: gamma_hat(x, pole_tol=GENERICITY_TOL)  # noqa: E731
    num = (
        _gamma(1 - s, "c_factor") ** 2
        * gh(t1 + t2 + s) * gh(-t1 + t2 + s) * gh(ti + t3 + s) * gh(-ti + t3 + s)
    )
    den = (
        _gamma(1 + s, "c_factor") ** 2
        * gh(t1 + t2 - s) * gh(-t1 + t2 - s) * gh(ti + t3 - s) * gh(-ti + t3 - s)
    )
    return num / den


def _l_factor(
    thetas: tuple[complex, complex, complex, complex], s: complex
) -> complex:
    t1, t2, t3, ti = thetas
    num = 4 * s * s * (ti + t3 - s) * _c_factor(thetas, s)
    den = (t1 + t2 + s) * (-t1 + t2 + s) * (ti + t3 + s)
    if abs(den) < GENERICITY_TOL:
        raise DomainError("leading-coefficient factor: denominator vanishes")
    return num / den


def _d_factor(
    thetas: tuple[complex, complex, complex, complex], s: complex
) -> complex:
    t1, t2, t3, ti = thetas
    return (
        4
        * cmath.sin(pi * (t1 + t2 - s) / 2)
        * cmath.sin(pi * (t1 - t2 + s) / 2)
        * cmath.sin(pi * (ti + t3 - s) / 2)
        * cmath.sin(pi * (ti - t3 + s) / 2)
    )


def _ab_terms(
    thetas: tuple[complex, complex, complex, complex],
    s: complex,
    p23: complex,
    p13: complex,
) -> tuple[complex, complex]:
    t1, t2, t3, ti = thetas
    c1, c2, c3, ci = (cmath.cos(pi * t) for t in (t1, t2, t3, ti))
    sin_s = cmath.sin(pi * s)
    a = cmath.exp(1j * pi * s) * (
        1j * sin_s * (p23 / 2) - c2 * ci - c1 * c3
    )
    b = 1j * sin_s * (p13 / 2) + c2 * c3 + ci * c1
    return a, b


def _check_f_conditions(
    thetas: tuple[complex, complex, complex, complex], s: complex
) -> None:
    t1, t2, t3, ti = thetas
    bad: list[str] = []
    for name, t in (("theta1", t1), ("theta2", t2), ("theta3", t3), ("theta_inf", ti)):
        if _dist_int(t) < GENERICITY_TOL:
            bad.append(f"{name} is an integer")
    if abs(s) < GENERICITY_TOL:
        bad.append("sigma = 0")
    if not -GENERICITY_TOL < s.real < 1.0 - GENERICITY_TOL:
        bad.append(f"Re(sigma) = {s.real} outside [0, 1)")
    for e1 in (1, -1):
        for e2 in (1, -1):
            if _dist_even(t1 + e1 * t2 + e2 * s) < GENERICITY_TOL:
                bad.append("theta1 +/- theta2 +/- sigma hits an even integer")
            if _dist_even(ti + e1 * t3 + e2 * s) < GENERICITY_TOL:
                bad.append("theta_inf +/- theta3 +/- sigma hits an even integer")
    if bad:
        raise DomainError("arrow_f: " + "; ".join(sorted(set(bad))))


def arrow_f(
    m: MonodromyData, thetas: tuple[complex, complex, complex, complex]
) -> tuple[complex, complex]:
    """(sigma, J) from trace coordinates.

    sigma is read off p12 = 2 cos(pi sigma) on the strip 0 <= Re sigma < 1
    (on the boundary Re sigma = 0 the sign is fixed by Im sigma >= 0); J
    follows from the closed-form expression through the auxiliary a, b, c, d
    combinations of the traces.
    """
    thetas = tuple(complex(t) for t in thetas)
    s = cmath.acos(complex(m.p12) / 2) / pi
    if s.real == 0 and s.imag < 0:
        s = -s
    _check_f_conditions(thetas, s)
    t1, t2, t3, ti = thetas
    a, b = _ab_terms(thetas, s, m.p23, m.p13)
    d = _d_factor(thetas, s)
    c = _c_factor(thetas, s)
    if abs(d) < GENERICITY_TOL:
        raise DomainError("arrow_f: sine-product denominator vanishes")
    s_hat = c * (a + b) / d
    if abs(s_hat) < GENERICITY_TOL:
        raise DomainError("arrow_f: degenerate trace data (s_hat = 0)")
    J = (t1 + t2 + s) * (-t1 + t2 + s) * (ti + t3 + s) / (
        4 * s * s * (ti + t3 - s) * s_hat
    )
    return s, J


# --------------------------------------------------------------------------
# consistency helpers (closed-form traces, cubic, leading-coefficient identity)


def p23_p13_closed_form(d: PviAsymptoticData) -> tuple[complex, complex]:
    """The traces p23 and p13 directly from the asymptotic data.

    Independent closed form used to cross-check arrow_p(arrow_g(arrow_q(d))).
    """
    _require_generic(d)
    t1, t2, t3, ti = d.thetas
    s, J = d.sigma, d.J
    c1, c2, c3, ci = (cmath.cos(pi * t) for t in (t1, t2, t3, ti))
    cs = cmath.cos(pi * s)
    s2 = cmath.sin(pi * s) ** 2
    if abs(s2) < GENERICITY_TOL:
        raise DomainError("closed-form traces: sin(pi sigma) = 0")
    el = _l_factor(d.thetas, s)
    sp = (
        cmath.sin(pi * (t1 + t2 + s) / 2)
        * cmath.sin(pi * (t1 - t2 - s) / 2)
        * cmath.sin(pi * (t3 + ti + s) / 2)
        * cmath.sin(pi * (t3 - ti + s) / 2)
    )
    sm = (
        cmath.sin(pi * (t1 + t2 - s) / 2)
        * cmath.sin(pi * (t1 - t2 + s) / 2)
        * cmath.sin(pi * (t3 + ti - s) / 2)
        * cmath.sin(pi * (t3 - ti - s) / 2)
    )
    lj = el * J
    p23 = (
        (2 / s2) * (c1 * ci + c2 * c3 - c1 * c3 * cs - c2 * ci * cs)
        + (4 / s2) * sp * lj
        + (4 / s2) * sm / lj
    )
    p13 = (
        (2 / s2) * (c1 * c3 + c2 * ci - c2 * c3 * cs - c1 * ci * cs)
        - (4 / s2) * cmath.exp(1j * pi * s) * sp * lj
        - (4 / s2) * cmath.exp(-1j * pi * s) * sm / lj
    )
    return p23, p13


def trace_identity_residual(d: PviAsymptoticData) -> complex:
    """Residual of the identity a + b = d / (L J) tying traces to the leading coefficient."""
    p23, p13 = p23_p13_closed_form(d)
    a, b = _ab_terms(d.thetas, d.sigma, p23, p13)
    dd = _d_factor(d.thetas, d.sigma)
    el = _l_factor(d.thetas, d.sigma)
    return a + b - dd / (el * d.J)


def cubic_residual(m: MonodromyData) -> complex:
    """Value of the Fricke-type cubic that every admissible trace tuple satisfies."""
    p12, p13, p23 = m.p12, m.p13, m.p23
    p1, p2, p3, pi_ = m.p1, m.p2, m.p3, m.p_inf
    return (
        p13 * p23 * p12
        + p12 * p12 + p23 * p23 + p13 * p13
        - (p1 * p3 + p2 * pi_) * p13
        - (p3 * p2 + p1 * pi_) * p23
        - (p2 * p1 + p3 * pi_) * p12
        + p1 * p1 + p2 * p2 + p3 * p3 + pi_ * pi_
        + p1 * p2 * p3 * pi_
        - 4
    )


def wrap_pair(
    s: StokesPair, thetas: tuple[complex, complex, complex, complex]
) -> tuple[np.ndarray, np.ndarray]:
    """The wrapped pair (S1, S2) = (e^{i pi dPhi} S+, S- e^{i pi dPhi}).

    ``dPhi`` is diag(-theta1, -theta2, -theta3).  Convention note: the
    once-wrapped matrices absorb the formal monodromy on the left for S+
    and on the right for S-; this is the normalisation under which
    S2 S1 is the total counterclockwise monodromy around the origin.
    """
    t1, t2, t3 = (complex(t) for t in thetas[:3])
    e = np.exp(1j * pi * np.array([-t1, -t2, -t3], dtype=complex))
    s1 = np.diag(e) @ as_matrix(s.s_plus, 3)
    s2 = as_matrix(s.s_minus, 3) @ np.diag(e)
    return s1, s2


# --------------------------------------------------------------------------
# JSON codecs


def _c2j(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _j2c(v) -> complex:
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise DomainError(f"expected [re, im] pair, got {v!r}")
    return complex(float(v[0]), float(v[1]))


def pvi_data_to_json(d: PviAsymptoticData) -> dict:
    return {
        "theta": [_c2j(t) for t in d.thetas],
        "sigma": _c2j(d.sigma),
        "J": _c2j(d.J),
    }


def pvi_data_from_json(obj: dict) -> PviAsymptoticData:
    try:
        theta = obj["theta"]
        sigma = obj["sigma"]
        jj = obj["J"]
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed asymptotic-data payload ({exc})") from exc
    if len(theta) != 4:
        raise DomainError("theta must list exactly four [re, im] pairs")
    t = [_j2c(v) for v in theta]
    return PviAsymptoticData(t[0], t[1], t[2], t[3], _j2c(sigma), _j2c(jj))


def monodromy_to_json(m: MonodromyData) -> dict:
    return {
        "p12": _c2j(m.p12),
        "p13": _c2j(m.p13),
        "p23": _c2j(m.p23),
        "p1": _c2j(m.p1),
        "p2": _c2j(m.p2),
        "p3": _c2j(m.p3),
        "p_inf": _c2j(m.p_inf),
    }


def monodromy_from_json(obj: dict) -> MonodromyData:
    try:
        return MonodromyData(**{k: _j2c(obj[k]) for k in
                                ("p12", "p13", "p23", "p1", "p2", "p3", "p_inf")})
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed monodromy payload ({exc})") from exc


def stokes_pair_to_json(s: StokesPair) -> dict:
    return {
        "s_plus": matrix_to_json(s.s_plus),
        "s_minus": matrix_to_json(s.s_minus),
    }


def stokes_pair_from_json(obj: dict) -> StokesPair:
    try:
        return StokesPair(
            s_plus=matrix_from_json(obj["s_plus"]),
            s_minus=matrix_from_json(obj["s_minus"]),
        )
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed Stokes payload ({exc})") from exc
