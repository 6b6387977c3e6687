"""Heller's thawed Gaussian wavepacket and its chord-function image.

The packet ``exp(i/hbar [A (q - Q)**2 + P (q - Q) + s])`` with
``A = pz / (2 z)`` is propagated through the linearized pair ``(pz, z)``
rather than the Riccati equation for ``A``, which avoids blow-through at
caustics.  The phase/prefactor ``s`` is not tracked.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import no_coupling, sym
from .hamiltonian import HamiltonianModel, Potential, separable
from .propagator import GaussianChordState, StepControl, evolve


@dataclass(frozen=True)
class HellerState:
    P: float
    Q: float
    pz: complex
    z: complex

    @classmethod
    def from_width(cls, P, Q, A) -> "HellerState":
        A = complex(A)
        if A.imag <= 0:
            raise ValueError("Im(A) must be positive for a normalizable packet")
        return cls(float(P), float(Q), 2.0 * A, 1.0 + 0j)

    @property
    def A(self) -> complex:
        return self.pz / (2.0 * self.z)

    def to_vector(self):
        return np.array([self.P, self.Q, self.pz, self.z], dtype=complex)

    @classmethod
    def from_vector(cls, v) -> "HellerState":
        return cls(float(v[0].real), float(v[1].real), complex(v[2]), complex(v[3]))


def heller_rhs(state: HellerState, V: Potential, m=1.0):
    """Returns ``(Pdot, Qdot, pzdot, zdot)``."""
    if m <= 0:
        raise ValueError("mass must be positive")
    d2 = V.d2V(state.Q)
    return (-float(V.dV(state.Q)), state.P / m, -d2 * state.z, state.pz / m)


def heller_to_chord(A) -> np.ndarray:
    """Real quadratic form ``M`` of the chord function of ``|psi_h><psi_h|``."""
    A = complex(A)
    a, b = A.real, A.imag
    if b <= 0:
        raise ValueError("Im(A) must be positive")
    return np.array([[b + a * a / b, a / (2 * b)], [a / (2 * b), 1 / (4 * b)]])


def _rk4_heller(v, V, m, h):
    def f(u):
        return np.array(heller_rhs(HellerState.from_vector(u), V, m), dtype=complex)
    k1 = f(v)
    k2 = f(v + 0.5 * h * k1)
    k3 = f(v + 0.5 * h * k2)
    k4 = f(v + h * k3)
    return v + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def heller_evolve(state: HellerState, V: Potential, m, t1, dt):
    n = int(np.ceil(t1 / dt - 1e-9)) if t1 > 0 else 0
    h = t1 / n if n else 0.0
    v = state.to_vector()
    out = [state]
    for _ in range(n):
        v = _rk4_heller(v, V, m, h)
        out.append(HellerState.from_vector(v))
    return np.linspace(0.0, t1, n + 1), out


@dataclass
class EquivalenceReport:
    model: str
    t1: float
    dt: float
    max_M_dev: float
    max_X_dev: float

    def to_dict(self):
        return {"model": self.model, "t1": self.t1, "dt": self.dt,
                "max_M_dev": self.max_M_dev, "max_X_dev": self.max_X_dev}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=1)


def unitary_equivalence_check(V: Potential | HamiltonianModel, m, initial: HellerState,
                              t1, dt=1e-3, name=None) -> EquivalenceReport:
    """Integrate Heller's equations and the chord propagator side by side.

    The chord side starts from ``Y = 0``, ``N = 0``, ``X = (P, Q)`` and
    ``M = heller_to_chord(A)`` with no environment.
    """
    if isinstance(V, HamiltonianModel):
        model = V
        if model.potential is None:
            raise ValueError(f"model {model.name!r} is not of the form p^2/2m + V(q)")
        V, m = model.potential, model.mass
    else:
        model = separable(V, m)
    _, hs = heller_evolve(initial, V, m, t1, dt)
    chord0 = GaussianChordState(0.0, 0.0, (initial.P, initial.Q), np.zeros(2),
                                heller_to_chord(initial.A), np.zeros((2, 2)))
    traj = evolve(chord0, model, no_coupling(), 0.0, t1,
                  StepControl(dt=dt, residual_probe_scale=None))
    max_m = max_x = 0.0
    for s, h in zip(traj.states, hs):
        max_m = max(max_m, float(np.abs(sym(s.M) - heller_to_chord(h.A)).max()))
        max_x = max(max_x, float(np.abs(s.X - np.array([h.P, h.Q])).max()))
    return EquivalenceReport(name or model.name, float(t1), float(dt), max_m, max_x)
