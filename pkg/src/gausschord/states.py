"""Initial Gaussian chord components and finite superpositions.

Squeezed states use the wavefunction

    psi(q) = (pi hbar w**2)**(-1/4) exp(-(q - Q)**2 / (2 w**2 hbar) + i P q / hbar)

with no symmetrizing ``exp(-i P Q / 2 hbar)`` phase.  The chord function of
``|psi_a><psi_b|`` then has, exactly,

    X = (X_a + X_b) / 2,         J Y = X_b - X_a,
    M = diag(1, wa**2 wb**2) / (wa**2 + wb**2),
    N_pq = (wa**2 - wb**2) / (2 (wa**2 + wb**2)),
    a = -Y_p P,   b = 0,
    K = sqrt(2 wa wb / (wa**2 + wb**2)) / (2 pi hbar),

obtained by doing the Gaussian integral over q in the chord definition.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .core import J, point
from .propagator import GaussianChordState


@dataclass(frozen=True)
class SqueezedSpec:
    center: np.ndarray
    omega: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "center", point(self.center))
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")

    def wavefunction(self, q, hbar):
        P, Q = self.center
        w2 = self.omega**2
        return ((np.pi * hbar * w2) ** -0.25
                * np.exp(-(q - Q) ** 2 / (2 * w2 * hbar) + 1j * P * q / hbar))


@dataclass
class ChordEnsemble:
    components: list = field(default_factory=list)

    def __post_init__(self):
        self.components = [(complex(w), s) for w, s in self.components]

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def evaluate(self, y, hbar):
        y = np.asarray(y, dtype=float)
        out = np.zeros(y.shape[:-1], dtype=complex)
        for w, s in self.components:
            out = out + w * s.evaluate(y, hbar)
        return out

    def trace(self, hbar) -> complex:
        """``2 pi hbar chi(0)``."""
        return 2 * np.pi * hbar * complex(self.evaluate(np.zeros(2), hbar))

    def with_states(self, states) -> "ChordEnsemble":
        if len(states) != len(self.components):
            raise ValueError("state count does not match ensemble size")
        return ChordEnsemble([(w, s) for (w, _), s in zip(self.components, states)])

    def normalized(self, hbar) -> "ChordEnsemble":
        tr = self.trace(hbar)
        if tr == 0:
            raise ValueError("ensemble has zero trace")
        return ChordEnsemble([(w / tr, s) for w, s in self.components])

    def to_json(self) -> str:
        return json.dumps([_component_dict(w, s) for w, s in self.components],
                          indent=1)

    @classmethod
    def from_json(cls, text) -> "ChordEnsemble":
        return cls([_component_from_dict(d) for d in json.loads(text)])


def _component_dict(w, s):
    return {
        "weight": [w.real, w.imag],
        "a": s.a, "b": s.b,
        "X": s.X.tolist(), "Y": s.Y.tolist(),
        "M": s.M.tolist(), "N": s.N.tolist(),
        "K": [s.K.real, s.K.imag],
    }


def _component_from_dict(d):
    w = complex(*d["weight"])
    s = GaussianChordState(d["a"], d["b"], d["X"], d["Y"], d["M"], d["N"],
                           complex(*d.get("K", (1.0, 0.0))))
    return w, s


def coherent_chord(spec: SqueezedSpec, hbar=1.0) -> GaussianChordState:
    w2 = spec.omega**2
    M = np.diag([1.0 / (2.0 * w2), w2 / 2.0])
    return GaussianChordState(0.0, 0.0, spec.center, np.zeros(2), M,
                              np.zeros((2, 2)), 1.0 / (2.0 * np.pi * hbar))


def cat_cross_term(spec_a: SqueezedSpec, spec_b: SqueezedSpec, hbar=1.0):
    """Chord component of ``|psi_a><psi_b|``."""
    wa2, wb2 = spec_a.omega**2, spec_b.omega**2
    s = wa2 + wb2
    X = 0.5 * (spec_a.center + spec_b.center)
    # J Y = X_b - X_a  and  J^-1 = -J
    Y = -J @ (spec_b.center - spec_a.center)
    M = np.diag([1.0, wa2 * wb2]) / s
    npq = 0.5 * (wa2 - wb2) / s
    N = np.array([[0.0, npq], [npq, 0.0]])
    a = -Y[0] * X[0]
    K = np.sqrt(2.0 * spec_a.omega * spec_b.omega / s) / (2.0 * np.pi * hbar)
    return GaussianChordState(a, 0.0, X, Y, M, N, K)


def cat_ensemble(spec_a: SqueezedSpec, spec_b: SqueezedSpec, hbar=1.0) -> ChordEnsemble:
    """``(|a> + |b>)(<a| + <b|) / 2``, not renormalized."""
    ab = cat_cross_term(spec_a, spec_b, hbar)
    return ChordEnsemble([
        (0.5, cat_cross_term(spec_a, spec_a, hbar)),
        (0.5, cat_cross_term(spec_b, spec_b, hbar)),
        (0.5, ab),
        (0.5, ab.conjugate_partner()),
    ])


def superpose(components) -> ChordEnsemble:
    components = list(components)
    if not components:
        raise ValueError("cannot superpose an empty list of components")
    return ChordEnsemble(components)


def normalize(ensemble: ChordEnsemble, hbar) -> ChordEnsemble:
    return ensemble.normalized(hbar)


def gaussian_overlap(spec_a: SqueezedSpec, spec_b: SqueezedSpec, hbar=1.0) -> complex:
    """``<psi_b|psi_a>`` by the closed-form Gaussian integral in q."""
    (Pa, Qa), (Pb, Qb) = spec_a.center, spec_b.center
    wa2, wb2 = spec_a.omega**2, spec_b.omega**2
    # integrand exp(-c2 q^2 + c1 q + c0)
    c2 = (1.0 / wa2 + 1.0 / wb2) / (2.0 * hbar)
    c1 = (Qa / wa2 + Qb / wb2) / hbar + 1j * (Pa - Pb) / hbar
    c0 = -(Qa**2 / wa2 + Qb**2 / wb2) / (2.0 * hbar)
    norm = (np.pi * hbar * wa2) ** -0.25 * (np.pi * hbar * wb2) ** -0.25
    return complex(norm * np.sqrt(np.pi / c2) * np.exp(c0 + c1**2 / (4.0 * c2)))


def cross_wigner(spec_a: SqueezedSpec, spec_b: SqueezedSpec, x, hbar=1.0):
    """Closed-form Weyl symbol of ``|psi_a><psi_b|`` at points ``x``.

    The Fourier transform of :func:`cat_cross_term`:

        W = sqrt(2 wa wb / s) / (pi hbar) exp(-F(x - X) / (hbar s / 2)
                                             + i (Y.x - Y_p P) / hbar)

    with ``s = wa**2 + wb**2`` and
    ``F(u) = u_q**2 + wa**2 wb**2 u_p**2 + i (wa**2 - wb**2) u_p u_q``.
    With ``a = b`` it is the Gaussian Wigner function of a squeezed state.
    """
    x = np.asarray(x, dtype=float)
    wa2, wb2 = spec_a.omega**2, spec_b.omega**2
    s = wa2 + wb2
    X = 0.5 * (spec_a.center + spec_b.center)
    Y = -J @ (spec_b.center - spec_a.center)
    up, uq = x[..., 0] - X[0], x[..., 1] - X[1]
    F = uq**2 + wa2 * wb2 * up**2 + 1j * (wa2 - wb2) * up * uq
    pref = np.sqrt(2.0 * spec_a.omega * spec_b.omega / s) / (np.pi * hbar)
    return pref * np.exp(-F / (0.5 * hbar * s) + 1j * (x @ Y - Y[0] * X[0]) / hbar)
