"""Symplectic phase-space primitives and linear environment coupling.

Phase points are plain ``numpy`` arrays of shape ``(2,)`` ordered ``(p, q)``.
Symmetric 2x2 matrices are stored as full ``(2, 2)`` arrays and kept
symmetric by :func:`sym`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: The skew matrix, rows (0, -1) and (1, 0).
J = np.array([[0.0, -1.0], [1.0, 0.0]])
J.flags.writeable = False


class GaussChordError(Exception):
    """Base class for numerical failures raised by this package."""


class NonFiniteError(GaussChordError, ValueError):
    """A value left the finite range."""

    def __init__(self, message, t=None, component=None):
        super().__init__(message)
        self.t = t
        self.component = component


class SingularMError(GaussChordError):
    """The real quadratic form ``M`` could not be inverted.

    This signals a breakdown of the Gaussian ansatz rather than a bug, so the
    simulation time and ensemble component are attached when known.
    """

    def __init__(self, message, t=None, component=None, cond=None):
        super().__init__(message)
        self.t = t
        self.component = component
        self.cond = cond


class NonIntegrableError(GaussChordError):
    """A Gaussian pair integral diverges (real part of the form not PD)."""


class AliasWarning(UserWarning):
    """A sampled field does not decay at the grid boundary."""


class TruncationWarning(UserWarning):
    """A Fock-space operation is outside its resolvable range."""


def point(p, q=None) -> np.ndarray:
    """Return a validated phase point ``(p, q)``.

    Accepts either two scalars or a single length-2 sequence.
    """
    if q is None:
        arr = np.asarray(p, dtype=float).reshape(-1)
    else:
        arr = np.array([p, q], dtype=float)
    if arr.shape != (2,):
        raise ValueError(f"phase point needs two components, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"non-finite phase point {arr!r}")
    return arr


def sym(m) -> np.ndarray:
    """Symmetrize a 2x2 matrix (average with its transpose)."""
    m = np.asarray(m)
    return 0.5 * (m + m.T)


def sym_from_entries(m_pp, m_pq, m_qq) -> np.ndarray:
    return np.array([[m_pp, m_pq], [m_pq, m_qq]], dtype=float)


def sym_entries(m) -> tuple[float, float, float]:
    m = np.asarray(m)
    return float(m[0, 0]), float(m[0, 1]), float(m[1, 1])


def wedge(x, x2) -> float:
    """Symplectic area ``p q' - p' q`` of two phase points."""
    return float(x[0] * x2[1] - x2[0] * x[1])


def is_psd(m, tol=1e-12) -> bool:
    w = np.linalg.eigvalsh(sym(m))
    return bool(w.min() >= -tol * max(1.0, abs(w).max()))


@dataclass(frozen=True)
class LindbladCoupling:
    """Single Lindblad operator ``L = (l_re + i l_im) . (p, q)``.

    ``gamma`` is the dissipation coefficient and ``D`` the real PSD chord
    damping matrix, so that the chord function is damped by
    ``exp(-y.D.y / 2 hbar)`` per unit time.
    """

    l_re: np.ndarray
    l_im: np.ndarray
    hbar: float = 1.0
    gamma: float = field(init=False)
    D: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        l_re = point(self.l_re)
        l_im = point(self.l_im)
        if not (np.isfinite(self.hbar) and self.hbar > 0):
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        object.__setattr__(self, "l_re", l_re)
        object.__setattr__(self, "l_im", l_im)
        object.__setattr__(self, "gamma", wedge(l_im, l_re))
        C = np.outer(l_re, l_re) + np.outer(l_im, l_im)
        object.__setattr__(self, "D", sym(J @ C @ J.T))

    @property
    def lam(self) -> np.ndarray:
        """Complex vector ``J (l_re + i l_im)``."""
        return J @ (self.l_re + 1j * self.l_im)

    def damping_form(self, y) -> np.ndarray:
        """``y.D.y`` evaluated on the trailing axis of ``y``."""
        y = np.asarray(y)
        return np.einsum("...i,ij,...j->...", y, self.D, y)

    @property
    def is_unitary(self) -> bool:
        return self.gamma == 0.0 and not np.any(self.D)


def build_coupling(l_re, l_im, hbar=1.0) -> LindbladCoupling:
    return LindbladCoupling(l_re, l_im, hbar)


def no_coupling(hbar=1.0) -> LindbladCoupling:
    return LindbladCoupling((0.0, 0.0), (0.0, 0.0), hbar)


def annihilation_coupling(rate=1.0, hbar=1.0) -> LindbladCoupling:
    """``L = sqrt(rate * hbar) a`` with ``a = (q + i p) / sqrt(2 hbar)``.

    Gives ``gamma = rate / 2`` and ``D = rate / 2 * I``; the vacuum is the
    stationary state.
    """
    s = np.sqrt(rate / 2.0)
    return LindbladCoupling((0.0, s), (s, 0.0), hbar)
