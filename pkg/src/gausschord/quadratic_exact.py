"""Exact evolution for quadratic Hamiltonians ``H(x) = x.Hm.x``.

The classical flow is ``R_t = exp(2 J Hm t)`` and the chord function obeys

    chi_t(xi) = chi_0(exp(-gamma t) R_{-t} xi)
                * exp(-1/(2 hbar) int_0^t exp(2 gamma (s - t)) xi_s.C.xi_s ds)

with ``xi_s = R_{s-t} xi`` and ``C = l_re l_re^T + l_im l_im^T``.  For a
Gaussian initial component this is again Gaussian with parameters given in
closed form by :func:`exact_coeffs`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import J, LindbladCoupling, sym
from .propagator import GaussianChordState, StateDerivative, inverse_2x2

NILPOTENT_TOL = 1e-14


@dataclass(frozen=True)
class RotationFlow:
    Hmat: np.ndarray
    gamma: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "Hmat", sym(np.asarray(self.Hmat, dtype=float)))
        object.__setattr__(self, "gamma", float(self.gamma))

    @property
    def generator(self) -> np.ndarray:
        return 2.0 * J @ self.Hmat

    def R(self, t) -> np.ndarray:
        return rot_matrix(self, t)


def _series_cs(delta, t):
    # cos-like and sinc-like sums for exp(G t) = c I + s G with G^2 = -delta I
    c, s = 0.0, 0.0
    term_c, term_s = 1.0, t
    k = 0
    while True:
        c += term_c
        s += term_s
        if abs(term_c) <= 1e-17 * abs(c) and abs(term_s) <= 1e-17 * max(abs(s), 1e-300):
            break
        term_c *= -delta * t * t / ((2 * k + 1) * (2 * k + 2))
        term_s *= -delta * t * t / ((2 * k + 2) * (2 * k + 3))
        k += 1
        if k > 60:
            break
    return c, s


def rot_matrix(flow: RotationFlow, t) -> np.ndarray:
    """``exp(2 J Hm t)`` in closed form.

    The generator ``G`` is traceless, so ``G**2 = -det(G) I`` and
    ``exp(G t) = c(t) I + s(t) G`` with trigonometric (det > 0) or
    hyperbolic (det < 0) coefficients.  Near the nilpotent case the
    coefficients come from their power series.
    """
    G = flow.generator
    delta = float(np.linalg.det(G))
    t = float(t)
    if abs(delta) < NILPOTENT_TOL or abs(delta) * t * t < 1e-4:
        c, s = _series_cs(delta, t)
    elif delta > 0:
        w = np.sqrt(delta)
        c, s = np.cos(w * t), np.sin(w * t) / w
    else:
        k = np.sqrt(-delta)
        c, s = np.cosh(k * t), np.sinh(k * t) / k
    return c * np.eye(2) + s * G


def damping_integral(flow: RotationFlow, D, t, npoints=64) -> np.ndarray:
    """``int_0^t exp(2 gamma (s - t)) R_{t-s} D R_{t-s}^T ds`` by Gauss-Legendre."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if npoints < 2:
        raise ValueError("npoints must be >= 2")
    D = np.asarray(D, dtype=float)
    if t == 0 or not np.any(D):
        return np.zeros((2, 2))
    nodes, weights = np.polynomial.legendre.leggauss(npoints)
    # substitute r = t - s so the integrand is exp(-2 gamma r) R_r D R_r^T
    r = 0.5 * t * (nodes + 1.0)
    acc = np.zeros((2, 2))
    for ri, wi in zip(r, weights):
        R = rot_matrix(flow, ri)
        acc += wi * np.exp(-2.0 * flow.gamma * ri) * (R @ D @ R.T)
    return sym(0.5 * t * acc)


def flow_for(Hmat, coupling: LindbladCoupling) -> RotationFlow:
    return RotationFlow(Hmat, coupling.gamma)


def exact_coeffs(initial: GaussianChordState, flow: RotationFlow,
                 coupling: LindbladCoupling, t, npoints=64) -> GaussianChordState:
    """Closed-form Gaussian parameters at time ``t`` (evolution from 0)."""
    if t == 0:
        return initial
    a, b, X, Y, M, N = (initial.a, initial.b, initial.X, initial.Y,
                        initial.M, initial.N)
    G = np.exp(-flow.gamma * t) * rot_matrix(flow, t)
    Nt = sym(G @ N @ G.T)
    Mt = sym(G @ M @ G.T + damping_integral(flow, coupling.D, t, npoints))
    MY = G @ M @ Y
    Yt = inverse_2x2(Mt, t=t) @ MY if np.any(MY) else np.zeros(2)
    Xt = G @ (X + N @ Y) - Nt @ Yt
    at = a + X @ Y + 0.5 * Y @ N @ Y - Xt @ Yt - 0.5 * Yt @ Nt @ Yt
    bt = b + 0.5 * Y @ M @ Y - 0.5 * Yt @ Mt @ Yt
    return GaussianChordState(at, bt, Xt, Yt, Mt, Nt, initial.K)


def quadratic_rhs(state: GaussianChordState, Hmat, coupling: LindbladCoupling):
    """Parameter ODEs specialised to quadratic H, written out explicitly.

    Independent of :func:`gausschord.propagator.rhs`; used to cross-check it
    and to verify that :func:`exact_coeffs` solves the system.
    """
    Hm = sym(np.asarray(Hmat, dtype=float))
    g = coupling.gamma
    D = coupling.D
    X, Y, M, N = state.X, state.Y, state.M, state.N
    DY = D @ Y
    w = inverse_2x2(M) @ DY if np.any(DY) else np.zeros(2)
    JH = 2.0 * J @ Hm
    HJ = 2.0 * Hm @ J
    Xdot = JH @ X - g * X + N @ w
    Ydot = HJ @ Y + g * Y - w
    Ndot = JH @ N - N @ HJ - 2.0 * g * N
    Mdot = JH @ M - M @ HJ - 2.0 * g * M + D
    adot = X @ w
    bdot = 0.5 * Y @ DY
    return StateDerivative(float(adot), float(bdot), Xdot, Ydot, sym(Mdot), sym(Ndot))


def exact_chord_eval(initial_eval, flow: RotationFlow, coupling: LindbladCoupling,
                     t, xi, npoints=64):
    """Evaluate ``chi_t`` at chord ``xi = (xi_p, xi_q)`` from any initial ``chi_0``.

    ``initial_eval`` maps an array of chords ``(..., 2)`` (in xi coordinates)
    to complex values.  Vectorized over leading axes of ``xi``.
    """
    xi = np.asarray(xi, dtype=float)
    if t == 0:
        return initial_eval(xi)
    back = np.exp(-flow.gamma * t) * rot_matrix(flow, -t)
    xi0 = np.einsum("ij,...j->...i", back, xi)
    # y = J xi turns the xi-space damping form into y.Delta_t.y
    Delta = damping_integral(flow, coupling.D, t, npoints)
    y = np.einsum("ij,...j->...i", J, xi)
    damp = np.einsum("...i,ij,...j->...", y, Delta, y)
    return initial_eval(xi0) * np.exp(-damp / (2.0 * coupling.hbar))


def state_eval_xi(state: GaussianChordState, hbar):
    """Adapter: a Gaussian component as a function of ``xi`` coordinates."""
    def f(xi):
        y = np.einsum("ij,...j->...i", J, np.asarray(xi))
        return state.evaluate(y, hbar)
    return f
