"""Adaptive Dormand-Prince 5(4) integration for complex-analytic systems.

The engine integrates y' = f(t, y) with a real parameter t and a complex
state vector y, using the classic embedded 5(4) pair with FSAL, PI step-size
control, and the standard quartic dense-output interpolant.  A thin wrapper
lifts it to piecewise-linear contours in the complex plane: each straight
segment is parameterised by arclength and integrated with a fresh start at
every corner, so the right-hand side is only ever evaluated on the contour
itself (which is what keeps branch tracking honest when continuing solutions
of linear systems around singular points).

Failure modes are explicit: a step size collapsing below 1e-13 of the
segment length raises :class:`SingularityError` (the trajectory is running
into a pole), and exceeding the step budget raises :class:`BudgetError`.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, DomainError, SingularityError

__all__ = ["OdeSolution", "ContourResult", "integrate", "integrate_contour"]

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = (
    9017 / 3168,
    -355 / 33,
    46732 / 5247,
    49 / 176,
    -5103 / 18656,
)
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)
# dense-output weights for the quartic interpolant
_D1, _D3, _D4, _D5, _D6, _D7 = (
    -12715105075 / 11282082432,
    87487479700 / 32700410799,
    -10690763975 / 1880347072,
    701980252875 / 199316789632,
    -1453857185 / 822651844,
    69997945 / 29380423,
)

_SAFETY = 0.9
_FACMIN = 0.2
_FACMAX = 5.0
_EXPO_ERR = 0.7 / 5.0
_EXPO_OLD = 0.4 / 5.0
_HMIN_FRACTION = 1e-13


def _error_norm(err: np.ndarray, y0: np.ndarray, y1: np.ndarray,
                rtol: float, atol: float) -> float:
    """RMS norm of the embedded error, real and imaginary parts weighted separately."""
    e = np.concatenate([err.real, err.imag])
    s0 = np.concatenate([np.abs(y0.real), np.abs(y0.imag)])
    s1 = np.concatenate([np.abs(y1.real), np.abs(y1.imag)])
    sk = atol + rtol * np.maximum(s0, s1)
    return float(np.sqrt(np.mean(np.square(e / sk))))


class _DenseSegments:
    """Accepted-step interpolants: evaluate the solution anywhere in the span."""

    def __init__(self) -> None:
        self.ts: list[float] = []  # left endpoints of accepted steps
        self.hs: list[float] = []
        self.rcont: list[tuple[np.ndarray, ...]] = []

    def push(self, t_old: float, h: float, rc: tuple[np.ndarray, ...]) -> None:
        self.ts.append(t_old)
        self.hs.append(h)
        self.rcont.append(rc)

    def __call__(self, t: float) -> np.ndarray:
        if not self.ts:
            raise DomainError("dense output requested from an empty solution")
        lo = self.ts[0]
        hi = self.ts[-1] + self.hs[-1]
        a, b = (lo, hi) if lo <= hi else (hi, lo)
        pad = 1e-10 * (abs(self.hs[0]) + abs(self.hs[-1]))
        if not a - pad <= t <= b + pad:
            raise DomainError(f"dense output query t={t} outside integrated span [{a}, {b}]")
        if self.hs[0] > 0:
            idx = bisect_right(self.ts, t) - 1
        else:
            idx = len(self.ts) - bisect_right(list(reversed(self.ts)), t)
        idx = min(max(idx, 0), len(self.ts) - 1)
        t0, h = self.ts[idx], self.hs[idx]
        r1, r2, r3, r4, r5 = self.rcont[idx]
        th = (t - t0) / h
        th1 = 1.0 - th
        return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)))


@dataclass
class OdeSolution:
    """Result of a single-span integration."""

    t0: float
    t1: float
    y_end: np.ndarray
    nfev: int
    naccept: int
    nreject: int
    dense: _DenseSegments | None = None

    def __call__(self, t: float) -> np.ndarray:
        if self.dense is None:
            raise DomainError("solution was computed without dense output")
        return self.dense(t)


def _initial_step(f, t0: float, y0: np.ndarray, f0: np.ndarray, direction: float,
                  span: float, rtol: float, atol: float) -> tuple[float, int]:
    sk = atol + rtol * np.maximum(np.abs(y0.real), np.abs(y0.imag))
    d0 = float(np.sqrt(np.mean(np.square(np.abs(y0) / sk))))
    d1 = float(np.sqrt(np.mean(np.square(np.abs(f0) / sk))))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = y0 + h0 * direction * f0
    f1 = f(t0 + h0 * direction, y1)
    d2 = float(np.sqrt(np.mean(np.square(np.abs(f1 - f0) / sk)))) / h0
    dmax = max(d1, d2)
    h1 = (0.01 / dmax) ** 0.2 if dmax > 1e-15 else max(1e-6, h0 * 1e-3)
    return min(100 * h0, h1, span), 1


def integrate(
    f,
    t0: float,
    t1: float,
    y0,
    *,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    max_steps: int = 500_000,
    dense: bool = False,
    fixed_step: float | None = None,
) -> OdeSolution:
    """Integrate y' = f(t, y) from t0 to t1 (t real, y complex vector).

    ``fixed_step`` disables adaptivity (used for convergence-order checks);
    otherwise the step is PI-controlled against ``rtol``/``atol``.
    """
    y = np.asarray(y0, dtype=complex).copy()
    if y.ndim != 1:
        raise DomainError("state must be a one-dimensional complex vector")
    span = abs(t1 - t0)
    if span == 0:
        return OdeSolution(t0, t1, y, 0, 0, 0, _DenseSegments() if dense else None)
    direction = 1.0 if t1 > t0 else -1.0
    hmin = _HMIN_FRACTION * span

    k1 = f(t0, y)
    k1 = np.asarray(k1, dtype=complex)
    nfev = 1
    if fixed_step is not None:
        if fixed_step <= 0:
            raise DomainError("fixed_step must be positive")
        h = float(fixed_step)
    else:
        h, extra = _initial_step(f, t0, y, k1, direction, span, rtol, atol)
        nfev += extra

    t = t0
    naccept = nreject = 0
    errold = 1e-4
    facmax = _FACMAX
    segments = _DenseSegments() if dense else None

    while (t1 - t) * direction > 0:
        if naccept + nreject >= max_steps:
            raise BudgetError(
                f"step budget {max_steps} exhausted at t={t} "
                f"({naccept} accepted, {nreject} rejected)"
            )
        if h < hmin:
            raise SingularityError(
                f"step size collapsed to {h:.3e} (span {span:.3e})", location=t
            )
        if h > abs(t1 - t):
            h = abs(t1 - t)
        hd = h * direction

        k2 = f(t + _C2 * hd, y + hd * (_A21 * k1))
        k3 = f(t + _C3 * hd, y + hd * (_A31 * k1 + _A32 * k2))
        k4 = f(t + _C4 * hd, y + hd * (_A41 * k1 + _A42 * k2 + _A43 * k3))
        k5 = f(t + _C5 * hd, y + hd * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4))
        k6 = f(
            t + hd,
            y + hd * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5),
        )
        y_new = y + hd * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
        k7 = f(t + hd, y_new)
        nfev += 6
        err_vec = hd * (
            _E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7
        )
        err = _error_norm(err_vec, y, y_new, rtol, atol)

        if fixed_step is not None or err <= 1.0:
            if segments is not None:
                ydiff = y_new - y
                bspl = hd * k1 - ydiff
                rc = (
                    y.copy(),
                    ydiff,
                    bspl,
                    ydiff - hd * k7 - bspl,
                    hd
                    * (
                        _D1 * k1
                        + _D3 * k3
                        + _D4 * k4
                        + _D5 * k5
                        + _D6 * k6
                        + _D7 * k7
                    ),
                )
                segments.push(t, hd, rc)
            t = t1 if abs(t1 - (t + hd)) < 1e-14 * span else t + hd
            y = y_new
            k1 = k7  # FSAL
            naccept += 1
            if fixed_step is None:
                err = max(err, 1e-30)
                fac = _SAFETY * err ** (-_EXPO_ERR) * errold ** (_EXPO_OLD)
                h *= min(facmax, max(_FACMIN, fac))
                errold = max(err, 1e-4)
                facmax = _FACMAX
        else:
            nreject += 1
            fac = _SAFETY * err ** (-_EXPO_ERR)
            h *= min(1.0, max(_FACMIN, fac))
            facmax = 1.0

    return OdeSolution(t0, t1, y, nfev, naccept, nreject, segments)


@dataclass
class ContourResult:
    """Result of a piecewise-linear contour integration."""

    vertices: list[complex]
    y_end: np.ndarray
    y_at_vertices: list[np.ndarray]
    nfev: int
    naccept: int
    nreject: int


def integrate_contour(
    f,
    vertices,
    y0,
    *,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    max_steps: int = 2_000_000,
    record: bool = False,
) -> ContourResult:
    """Integrate dy/dz = f(z, y) along the polygonal path through ``vertices``.

    Each straight segment is parameterised by arclength and integrated by
    :func:`integrate`, restarting at every corner.  With ``record=True`` the
    state at every vertex is kept (vertices double as forced checkpoints).
    """
    pts = [complex(z) for z in vertices]
    if len(pts) < 2:
        raise DomainError("a contour needs at least two vertices")
    y = np.asarray(y0, dtype=complex).copy()
    recorded: list[np.ndarray] = [y.copy()] if record else []
    nfev = naccept = nreject = 0
    budget_left = max_steps
    for za, zb in zip(pts[:-1], pts[1:]):
        length = abs(zb - za)
        if length == 0:
            if record:
                recorded.append(y.copy())
            continue
        direction = (zb - za) / length

        def seg_rhs(t, state, _za=za, _dir=direction):
            return _dir * np.asarray(f(_za + _dir * t, state), dtype=complex)

        sol = integrate(
            seg_rhs, 0.0, length, y, rtol=rtol, atol=atol, max_steps=budget_left
        )
        y = sol.y_end
        nfev += sol.nfev
        naccept += sol.naccept
        nreject += sol.nreject
        budget_left -= sol.naccept + sol.nreject
        if budget_left <= 0:
            raise BudgetError(f"contour step budget {max_steps} exhausted at vertex {zb}")
        if record:
            recorded.append(y.copy())
    return ContourResult(pts, y, recorded, nfev, naccept, nreject)
