"""Consistent Gaussian evolution of chord-function components.

A component is

    chi(y) = K exp( i a / hbar - i (y - Y).X / hbar - b / hbar
                    - (y - Y).(M - i N).(y - Y) / (2 hbar) )

and its parameters obey a closed ODE system driven by the derivative blocks
of the double Hamiltonian at ``(X, Y, t)``.  The system is hbar-independent;
hbar only enters when a component is evaluated.
"""

from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .core import J, LindbladCoupling, NonFiniteError, SingularMError, sym
from .hamiltonian import (HamiltonianModel, double_hamiltonian,
                          double_hamiltonian_value)

COND_MAX = 1e12

CSV_COLUMNS = ["t", "a", "b", "X_p", "X_q", "Y_p", "Y_q",
               "M_pp", "M_pq", "M_qq", "N_pp", "N_pq", "N_qq", "residual_max"]


@dataclass(frozen=True)
class GaussianChordState:
    a: float
    b: float
    X: np.ndarray
    Y: np.ndarray
    M: np.ndarray
    N: np.ndarray
    K: complex = 1.0

    def __post_init__(self):
        for name in ("X", "Y"):
            v = np.asarray(getattr(self, name), dtype=float).reshape(2)
            object.__setattr__(self, name, v)
        for name in ("M", "N"):
            v = np.asarray(getattr(self, name), dtype=float).reshape(2, 2)
            object.__setattr__(self, name, v)
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "K", complex(self.K))

    def replace(self, **changes) -> "GaussianChordState":
        return dataclasses.replace(self, **changes)

    def to_vector(self) -> np.ndarray:
        M, N = self.M, self.N
        return np.array([self.a, self.b, *self.X, *self.Y,
                         M[0, 0], M[0, 1], M[1, 1], N[0, 0], N[0, 1], N[1, 1]])

    @classmethod
    def from_vector(cls, v, K=1.0) -> "GaussianChordState":
        return cls(v[0], v[1], v[2:4], v[4:6],
                   [[v[6], v[7]], [v[7], v[8]]],
                   [[v[9], v[10]], [v[10], v[11]]], K)

    def exponent(self, y, hbar):
        """Complex log of ``chi / K`` at chord points ``y`` (shape ``(..., 2)``)."""
        u = np.asarray(y) - self.Y
        quad = np.einsum("...i,ij,...j->...", u, self.M - 1j * self.N, u)
        return (1j * self.a - 1j * (u @ self.X) - self.b - 0.5 * quad) / hbar

    def evaluate(self, y, hbar):
        return self.K * np.exp(self.exponent(y, hbar))

    def trace_value(self, hbar) -> complex:
        """``chi(0)``."""
        return complex(self.evaluate(np.zeros(2), hbar))

    def conjugate_partner(self) -> "GaussianChordState":
        """Component equal to ``conj(chi(-y))``."""
        return GaussianChordState(-self.a, self.b, self.X, -self.Y, self.M,
                                  -self.N, np.conj(self.K))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.to_vector())) and np.isfinite(self.K))


@dataclass(frozen=True)
class StateDerivative:
    a: float
    b: float
    X: np.ndarray
    Y: np.ndarray
    M: np.ndarray
    N: np.ndarray

    def to_vector(self) -> np.ndarray:
        M, N = self.M, self.N
        return np.array([self.a, self.b, *self.X, *self.Y,
                         M[0, 0], M[0, 1], M[1, 1], N[0, 0], N[0, 1], N[1, 1]])


@dataclass(frozen=True)
class StepControl:
    dt: float = 1e-3
    record_every: int = 1
    #: estimate the local error by step doubling at every recorded step
    error_monitor: bool = False
    #: probe offset (in units of sqrt(hbar)) for the residual diagnostic; None disables it
    residual_probe_scale: float | None = 1.0
    cond_max: float = COND_MAX

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


@dataclass
class Trajectory:
    times: np.ndarray
    states: list
    residuals: np.ndarray
    steps: int = 0
    max_error_estimate: float = 0.0
    component: int | None = None
    hbar: float = 1.0

    def __len__(self):
        return len(self.states)

    @property
    def final(self) -> GaussianChordState:
        return self.states[-1]

    @property
    def max_residual(self) -> float:
        r = self.residuals[np.isfinite(self.residuals)]
        return float(r.max()) if r.size else 0.0

    def field(self, name) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.states])

    def trace_values(self) -> np.ndarray:
        return np.array([s.trace_value(self.hbar) for s in self.states])

    def rows(self):
        for t, s, r in zip(self.times, self.states, self.residuals):
            yield [t, *s.to_vector(), r]

    def to_csv(self, path):
        write_csv(path, CSV_COLUMNS, self.rows())


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


# -- right-hand side --------------------------------------------------------

def inverse_2x2(M, cond_max=COND_MAX, t=None):
    """Closed-form inverse of a symmetric 2x2 matrix with a condition guard."""
    w = np.linalg.eigvalsh(M)
    big = abs(w).max()
    small = abs(w).min()
    if small == 0.0 or big / small > cond_max:
        cond = np.inf if small == 0.0 else big / small
        raise SingularMError(f"M is singular (condition number {cond:.3g})",
                             t=t, cond=cond)
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    return np.array([[M[1, 1], -M[0, 1]], [-M[1, 0], M[0, 0]]]) / det


def _minv_d_y(state, coupling, cond_max, t):
    DY = coupling.D @ state.Y
    if not np.any(DY):
        # unitary limit and centred components never need M^-1
        return np.zeros(2)
    return inverse_2x2(state.M, cond_max, t) @ DY


def rhs(state: GaussianChordState, model: HamiltonianModel,
        coupling: LindbladCoupling, t=0.0, cond_max=COND_MAX) -> StateDerivative:
    X, Y, M, N = state.X, state.Y, state.M, state.N
    D = coupling.D
    hh = double_hamiltonian(model, coupling, X, Y, t)
    w = _minv_d_y(state, coupling, cond_max, t)
    Hxx, Hxy, Hyx, Hyy = hh.d_xx, hh.d_xy, hh.d_yx, hh.d_yy
    Ydot = -hh.d_x - w
    Xdot = hh.d_y + N @ w
    Ndot = -N @ Hxx @ N + M @ Hxx @ M + Hyx @ N + N @ Hxy - Hyy
    Mdot = -M @ Hxx @ N - N @ Hxx @ M + Hyx @ M + M @ Hxy + D
    adot = -Ydot @ X - hh.value
    bdot = 0.5 * Y @ D @ Y
    return StateDerivative(float(adot), float(bdot), Xdot, Ydot, sym(Mdot), sym(Ndot))


# -- chord tips -------------------------------------------------------------

@dataclass(frozen=True)
class ChordTips:
    Xplus: np.ndarray
    Xminus: np.ndarray


def chord_tips(state: GaussianChordState) -> ChordTips:
    half = 0.5 * J @ state.Y
    return ChordTips(state.X - half, state.X + half)


def tips_rhs(state, model, coupling, t=0.0, cond_max=COND_MAX):
    """Velocities of the two chord tips, written directly in terms of ``H``."""
    tips = chord_tips(state)
    xp, xm = tips.Xplus, tips.Xminus
    g = coupling.gamma
    sep = J @ (xp - xm)  # equals Y
    if np.any(coupling.D @ sep):
        w = inverse_2x2(state.M, cond_max, t) @ coupling.D @ sep
    else:
        w = np.zeros(2)
    dplus = J @ model.grad(xp, t) - g * xm + (state.N + 0.5 * J) @ w
    dminus = J @ model.grad(xm, t) - g * xp + (state.N - 0.5 * J) @ w
    return dplus, dminus


# -- Hamilton-Jacobi residual -----------------------------------------------

def hj_residual(state, model, coupling, t, probe_points, deriv=None):
    """Residual of the leading-order Hamilton-Jacobi equation at chord probes.

    With ``S = A + i B`` the Gaussian phase and ``dS/dt`` taken from the
    parameter ODEs, returns ``dS/dt + HH(-dS/dy, y, t) - (i/2) y.D.y``.
    Zero for quadratic H, and ``O(|y - Y|**3)`` in general.
    """
    if deriv is None:
        deriv = rhs(state, model, coupling, t)
    y = np.atleast_2d(np.asarray(probe_points, dtype=float))
    u = y - state.Y
    Z = state.N + 1j * state.M
    Zdot = deriv.N + 1j * deriv.M
    Zu = u @ Z.T
    dS_dt = (deriv.a + 1j * deriv.b + deriv.Y @ state.X
             - u @ deriv.X - Zu @ deriv.Y
             + 0.5 * np.einsum("ni,ij,nj->n", u, Zdot, u))
    x_arg = state.X - Zu
    hh = double_hamiltonian_value(model, coupling, x_arg, y, t)
    return dS_dt + hh - 0.5j * coupling.damping_form(y)


def _residual_probes(state, hbar, scale):
    d = scale * math.sqrt(hbar)
    offs = np.array([[d, 0.0], [-d, 0.0], [0.0, d], [0.0, -d]])
    return state.Y + offs


# -- integration ------------------------------------------------------------

def _vec_rhs(v, K, model, coupling, t, cond_max):
    return rhs(GaussianChordState.from_vector(v, K), model, coupling, t,
               cond_max).to_vector()


@np.errstate(over="ignore", invalid="ignore")
def _rk4(v, K, model, coupling, t, h, cond_max):
    # overflow surfaces as a NonFiniteError in evolve, not as a warning
    k1 = _vec_rhs(v, K, model, coupling, t, cond_max)
    k2 = _vec_rhs(v + 0.5 * h * k1, K, model, coupling, t + 0.5 * h, cond_max)
    k3 = _vec_rhs(v + 0.5 * h * k2, K, model, coupling, t + 0.5 * h, cond_max)
    k4 = _vec_rhs(v + h * k3, K, model, coupling, t + h, cond_max)
    return v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _sample_residual(state, model, coupling, t, control):
    if control.residual_probe_scale is None:
        return 0.0
    return probe_residual(state, model, coupling, t, control.residual_probe_scale)


def probe_residual(state, model, coupling, t=0.0, scale=1.0) -> float:
    """Largest residual at the four probes ``Y +- scale sqrt(hbar) e_i``."""
    probes = _residual_probes(state, coupling.hbar, scale)
    try:
        r = hj_residual(state, model, coupling, t, probes)
    except (TypeError, ValueError):
        # user evaluators that reject complex arguments
        return float("nan")
    return float(np.abs(r).max())


def evolve(state: GaussianChordState, model: HamiltonianModel,
           coupling: LindbladCoupling, t0=0.0, t1=1.0,
           control: StepControl | None = None, component=None) -> Trajectory:
    """Fixed-step RK4 integration from ``t0`` to ``t1``.

    The step is shrunk slightly so that an integer number of steps lands on
    ``t1`` exactly.  M and N are re-symmetrized after every step.
    """
    control = control or StepControl()
    if t1 < t0:
        raise ValueError("t1 must not precede t0")
    nsteps = int(math.ceil((t1 - t0) / control.dt - 1e-9)) if t1 > t0 else 0
    h = (t1 - t0) / nsteps if nsteps else 0.0
    K = state.K
    v = state.to_vector()
    t = t0
    times, states, residuals = [t0], [state], []
    max_err = 0.0
    try:
        residuals.append(_sample_residual(state, model, coupling, t0, control))
        for i in range(1, nsteps + 1):
            record = i % control.record_every == 0 or i == nsteps
            if control.error_monitor and record:
                half = _rk4(v, K, model, coupling, t, 0.5 * h, control.cond_max)
                fine = _rk4(half, K, model, coupling, t + 0.5 * h, 0.5 * h,
                            control.cond_max)
                coarse = _rk4(v, K, model, coupling, t, h, control.cond_max)
                max_err = max(max_err, float(np.abs(fine - coarse).max()) / 15.0)
                v = fine
            else:
                v = _rk4(v, K, model, coupling, t, h, control.cond_max)
            t = t0 + i * h
            if not np.all(np.isfinite(v)):
                raise NonFiniteError(f"state left the finite range at t={t:.6g}",
                                     t=t, component=component)
            # re-symmetrization is structural in the packed vector
            if record:
                s = GaussianChordState.from_vector(v, K)
                times.append(t)
                states.append(s)
                residuals.append(_sample_residual(s, model, coupling, t, control))
    except SingularMError as exc:
        if exc.t is None:
            exc.t = t
        exc.component = component
        raise
    return Trajectory(np.array(times), states, np.array(residuals), nsteps,
                      max_err, component, coupling.hbar)


def evolve_ensemble(ensemble, model, coupling, t0=0.0, t1=1.0, control=None):
    """Evolve every component independently; returns one trajectory each."""
    return [evolve(s, model, coupling, t0, t1, control, component=k)
            for k, (_, s) in enumerate(ensemble.components)]
