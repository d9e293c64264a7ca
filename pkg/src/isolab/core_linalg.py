"""Small dense complex linear algebra used by every other module.

Everything here operates on plain ``numpy`` arrays of ``complex128``.
Matrices are tiny (n <= 4 in practice), so clarity and deterministic
behaviour win over vectorisation tricks.

The module also owns the JSON wire format for complex matrices:
``{"n": n, "re": [[...]], "im": [[...]]}`` with row-major nested lists.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpectrumError, DomainError

__all__ = [
    "SpectrumPair",
    "Eigen3",
    "as_matrix",
    "delta_k",
    "eigen2",
    "eigen3",
    "minor",
    "diag_conjugate",
    "matrix_power_scalar",
    "matrix_to_json",
    "matrix_from_json",
]

#: Relative tolerance below which eigenvalue pairs are flagged degenerate.
DEGENERACY_RTOL = 1e-8


def as_matrix(a, n: int | None = None) -> np.ndarray:
    """Coerce ``a`` to a square complex128 array, validating shape and finiteness."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {m.shape}")
    if n is not None and m.shape[0] != n:
        raise DomainError(f"expected a {n}x{n} matrix, got {m.shape[0]}x{m.shape[0]}")
    if not np.all(np.isfinite(m.view(float))):
        raise DomainError("matrix contains non-finite entries")
    return m


@dataclass(frozen=True)
class SpectrumPair:
    """Ordered eigenvalue pair of a 2x2 block.

    Ordering convention: ``Re(lambda1 - lambda2) >= 0``; on a tie the pair is
    ordered so ``Im(lambda1 - lambda2) >= 0``.  The difference ``sigma`` of an
    ordered pair therefore always satisfies ``Re(sigma) >= 0``.
    """

    lambda1: complex
    lambda2: complex
    degenerate: bool

    @property
    def sigma(self) -> complex:
        return self.lambda1 - self.lambda2


@dataclass(frozen=True)
class Eigen3:
    """Eigenvalue triple sorted by descending real part, then descending imaginary part."""

    values: tuple[complex, complex, complex]
    degenerate: bool


def delta_k(a, k: int) -> np.ndarray:
    """Truncation that keeps the leading k x k block and the full diagonal.

    Entry (i, j) survives iff (i < k and j < k) or i == j; all other entries
    are zeroed.  ``k = 0`` keeps just the diagonal, ``k = n`` is the identity
    operation.
    """
    m = as_matrix(a)
    n = m.shape[0]
    if not 0 <= k <= n:
        raise DomainError(f"delta_k: k={k} outside [0, {n}]")
    out = np.diag(np.diag(m))
    out[:k, :k] = m[:k, :k]
    return out


def _order_pair(la: complex, lb: complex) -> tuple[complex, complex]:
    d = la - lb
    if d.real > 0 or (d.real == 0 and d.imag >= 0):
        return la, lb
    return lb, la


def eigen2(a) -> SpectrumPair:
    """Eigenvalues of a 2x2 complex matrix by the stable quadratic formula.

    The larger-magnitude root is computed from the quadratic formula with the
    sign chosen to avoid cancellation; the other root comes from the product
    ``det = lambda1 * lambda2`` when the first root is nonzero.
    """
    m = as_matrix(a, 2)
    tr = complex(m[0, 0] + m[1, 1])
    det = complex(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    disc = tr * tr - 4.0 * det
    r = np.sqrt(complex(disc))
    # pick the sign that maximises |tr +/- r| (classic cancellation guard)
    s = r if abs(tr + r) >= abs(tr - r) else -r
    big = (tr + s) / 2.0
    small = det / big if big != 0 else (tr - s) / 2.0
    l1, l2 = _order_pair(big, small)
    scale = max(1.0, abs(l1), abs(l2))
    return SpectrumPair(l1, l2, degenerate=abs(l1 - l2) < DEGENERACY_RTOL * scale)


def eigen3(a, degeneracy_rtol: float = DEGENERACY_RTOL) -> Eigen3:
    """Eigenvalues of a 3x3 complex matrix via its companion matrix.

    The characteristic cubic is assembled from trace power sums (Newton's
    identities) and handed to ``np.roots``, i.e. a balanced companion-matrix
    QR solve.  Roots are sorted by descending real part, ties by descending
    imaginary part; near-coincident roots only set the ``degenerate`` flag,
    they never raise.

    Caveat on the flag: root-finding splits an exactly repeated root by
    ~sqrt(machine eps) * scale (the gap enters the coefficients squared), so
    with the default tolerance of 1e-8 an exact double eigenvalue sits right
    at the detection floor and may be reported non-degenerate.  Callers that
    must catch exact degeneracies should pass ``degeneracy_rtol`` around
    1e-6.  The 2x2 route (:func:`eigen2`) does not share this floor: its
    discriminant vanishes exactly for a repeated root.
    """
    m = as_matrix(a, 3)
    t1 = complex(np.trace(m))
    t2 = complex(np.trace(m @ m))
    e1 = t1
    e2 = (t1 * t1 - t2) / 2.0
    e3 = complex(np.linalg.det(m))
    roots = np.roots([1.0, -e1, e2, -e3])
    vals = sorted((complex(r) for r in roots), key=lambda z: (-z.real, -z.imag))
    scale = max(1.0, *(abs(v) for v in vals))
    gap = min(
        abs(vals[0] - vals[1]), abs(vals[0] - vals[2]), abs(vals[1] - vals[2])
    )
    return Eigen3(tuple(vals), degenerate=gap < degeneracy_rtol * scale)


def minor(a, rows: tuple[int, ...] | list[int], cols: tuple[int, ...] | list[int]) -> complex:
    """Determinant of the submatrix selected by 0-based ``rows`` x ``cols``.

    Both index lists must be strictly increasing and of equal length.
    An empty selection has determinant 1 (the usual convention).
    """
    m = as_matrix(a)
    r = list(rows)
    c = list(cols)
    if len(r) != len(c):
        raise DomainError(f"minor: row/column selections differ in length ({len(r)} vs {len(c)})")
    for name, idx in (("rows", r), ("cols", c)):
        if any(not 0 <= i < m.shape[0] for i in idx):
            raise DomainError(f"minor: {name} {idx} out of range for n={m.shape[0]}")
        if any(idx[i] >= idx[i + 1] for i in range(len(idx) - 1)):
            raise DomainError(f"minor: {name} {idx} not strictly increasing")
    if not r:
        return 1.0 + 0.0j
    sub = m[np.ix_(r, c)]
    if len(r) == 1:
        return complex(sub[0, 0])
    if len(r) == 2:
        return complex(sub[0, 0] * sub[1, 1] - sub[0, 1] * sub[1, 0])
    return complex(np.linalg.det(sub))


def diag_conjugate(a, k_diag, invert: bool = False) -> np.ndarray:
    """K A K^{-1} (or K^{-1} A K when ``invert``) for diagonal K given by its diagonal."""
    m = as_matrix(a)
    k = np.asarray(k_diag, dtype=complex)
    if k.ndim != 1 or k.shape[0] != m.shape[0]:
        raise DomainError("diag_conjugate: diagonal length does not match matrix size")
    if np.any(k == 0) or not np.all(np.isfinite(k.view(float))):
        raise DomainError("diag_conjugate: diagonal entries must be finite and nonzero")
    if invert:
        return m * np.outer(1.0 / k, k)
    return m * np.outer(k, 1.0 / k)


def _is_delta2_shaped(m: np.ndarray, tol: float) -> bool:
    n = m.shape[0]
    mask = np.zeros((n, n), dtype=bool)
    mask[:2, :2] = True
    np.fill_diagonal(mask, True)
    off = m[~mask]
    scale = max(1.0, float(np.max(np.abs(m))))
    return off.size == 0 or float(np.max(np.abs(off))) <= tol * scale


def matrix_power_scalar(a, s: complex, log_s: complex | None = None) -> np.ndarray:
    """s**A for A of block-diagonal shape "2x2 block plus scalar diagonal".

    ``A`` must vanish outside the leading 2x2 block and the diagonal (the
    shape produced by ``delta_k(.., 2)``).  The scalar power uses the
    principal logarithm of ``s`` unless an explicit ``log_s`` value is given,
    which callers use to select a non-principal sheet.

    The 2x2 block is exponentiated through its eigendecomposition; if the
    block is (numerically) diagonal the powers are taken entrywise, which in
    particular allows coincident diagonal entries.  A non-diagonal block with
    a degenerate spectrum is rejected: it may be non-diagonalisable.
    """
    m = as_matrix(a)
    n = m.shape[0]
    if n < 2:
        raise DomainError("matrix_power_scalar: matrix must be at least 2x2")
    if not _is_delta2_shaped(m, 1e-13):
        raise DomainError("matrix_power_scalar: matrix is not of 2x2-block-plus-diagonal shape")
    s = complex(s)
    if s == 0:
        raise DomainError("matrix_power_scalar: base must be nonzero")
    if log_s is None:
        if s.real < 0 and s.imag == 0:
            raise DomainError(
                "matrix_power_scalar: base on the negative real axis needs an explicit log_s"
            )
        log_s = complex(np.log(s))
    out = np.zeros((n, n), dtype=complex)
    for i in range(2, n):
        out[i, i] = np.exp(log_s * m[i, i])

    block = m[:2, :2]
    offmag = max(abs(block[0, 1]), abs(block[1, 0]))
    scale = max(1.0, float(np.max(np.abs(block))))
    if offmag <= 1e-14 * scale:
        out[0, 0] = np.exp(log_s * block[0, 0])
        out[1, 1] = np.exp(log_s * block[1, 1])
        return out
    pair = eigen2(block)
    if pair.degenerate:
        raise DegenerateSpectrumError(
            "matrix_power_scalar: 2x2 block has (near-)coincident eigenvalues "
            f"{pair.lambda1} ~ {pair.lambda2}; the power is not defined through "
            "an eigendecomposition"
        )
    l1, l2 = pair.lambda1, pair.lambda2
    # eigenvector matrix columns for l1, l2; rows chosen to avoid the zero row
    b, c = block[0, 1], block[1, 0]
    if abs(b) >= abs(c):
        v = np.array([[b, b], [l1 - block[0, 0], l2 - block[0, 0]]], dtype=complex)
    else:
        v = np.array([[l1 - block[1, 1], l2 - block[1, 1]], [c, c]], dtype=complex)
    d = np.array([np.exp(log_s * l1), np.exp(log_s * l2)], dtype=complex)
    out[:2, :2] = v @ np.diag(d) @ np.linalg.inv(v)
    return out


def matrix_to_json(a) -> dict:
    """Encode a complex matrix as the shared JSON structure (row-major re/im)."""
    m = as_matrix(a)
    return {
        "n": int(m.shape[0]),
        "re": [[float(x.real) for x in row] for row in m],
        "im": [[float(x.imag) for x in row] for row in m],
    }


def matrix_from_json(d: dict) -> np.ndarray:
    """Decode the shared JSON matrix structure, validating shape consistency."""
    try:
        n = int(d["n"])
        re = d["re"]
        im = d["im"]
    except (KeyError, TypeError) as exc:
        raise DomainError(f"matrix_from_json: malformed payload ({exc})") from exc
    if len(re) != n or len(im) != n or any(len(r) != n for r in re) or any(len(r) != n for r in im):
        raise DomainError("matrix_from_json: re/im shapes inconsistent with n")
    return np.array(re, dtype=float) + 1j * np.array(im, dtype=float)
