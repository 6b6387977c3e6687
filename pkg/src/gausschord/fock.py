"""Brute-force Lindblad oracle in a truncated Fock basis.

``q = sqrt(hbar/2) (a + a^+)`` and ``p = i sqrt(hbar/2) (a^+ - a)``, so the
basis functions are the real Hermite functions with ground state
``(pi hbar)**(-1/4) exp(-q**2 / 2 hbar)``.

The chord function is sampled as ``Tr[rho T(xi)] / (2 pi hbar)`` with
``T(xi) = exp(-i (xi_p q - xi_q p) / hbar)``; the Baker-Campbell-Hausdorff
split of ``T`` reproduces the position-space chord integral exactly, which
fixes the sign convention.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import LindbladCoupling, NonFiniteError, TruncationWarning
from .hamiltonian import HamiltonianModel

# extra levels used when forming operator products, cropped afterwards
PAD = 8


def _ladder(dim):
    return np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)


@dataclass
class FockSpace:
    dim: int = 60
    hbar: float = 1.0
    pad: int = PAD
    q: np.ndarray = field(init=False, repr=False)
    p: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.dim < 4:
            raise ValueError("dim must be >= 4")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")
        self.q = self.big_q()[: self.dim, : self.dim]
        self.p = self.big_p()[: self.dim, : self.dim]

    @property
    def big_dim(self):
        return self.dim + self.pad

    def big_q(self, dim=None):
        a = _ladder(dim or self.big_dim)
        return math.sqrt(self.hbar / 2.0) * (a + a.conj().T)

    def big_p(self, dim=None):
        a = _ladder(dim or self.big_dim)
        return 1j * math.sqrt(self.hbar / 2.0) * (a.conj().T - a)

    @property
    def a(self):
        return _ladder(self.dim)

    def crop(self, op):
        return op[: self.dim, : self.dim]

    def hermite_functions(self, q):
        """Basis wavefunctions ``phi_n(q)``, shape ``(dim, len(q))``."""
        q = np.asarray(q, dtype=float)
        h = self.hbar
        out = np.empty((self.dim, q.size))
        out[0] = (np.pi * h) ** -0.25 * np.exp(-q**2 / (2 * h))
        if self.dim > 1:
            out[1] = math.sqrt(2.0 / h) * q * out[0]
        for n in range(1, self.dim - 1):
            out[n + 1] = (math.sqrt(2.0 / (h * (n + 1))) * q * out[n]
                          - math.sqrt(n / (n + 1)) * out[n - 1])
        return out

    def ket_from_wavefunction(self, psi, q_range=None, npoints=4096):
        """Expansion coefficients of ``psi(q)`` by trapezoid quadrature."""
        if q_range is None:
            L = 2.5 * math.sqrt(self.hbar * (2 * self.dim + 1)) + 10 * math.sqrt(self.hbar)
            q_range = (-L, L)
        q = np.linspace(*q_range, npoints)
        dq = q[1] - q[0]
        return self.hermite_functions(q) @ (psi(q) * dq)

    def leakage(self, rho, top=5) -> float:
        """Population in the top ``top`` levels."""
        return float(np.real(np.diag(rho)[-top:].sum()))


def weyl_monomial(space: FockSpace, m, n):
    """Weyl-ordered ``p**m q**n`` as ``2**-n sum_k C(n, k) q^k p^m q^(n-k)``."""
    q, p = space.big_q(), space.big_p()
    eye = np.eye(space.big_dim, dtype=complex)
    pm = np.linalg.matrix_power(p, m) if m else eye
    qpow = [eye]
    for _ in range(n):
        qpow.append(qpow[-1] @ q)
    acc = np.zeros_like(eye)
    for k in range(n + 1):
        acc += math.comb(n, k) * qpow[k] @ pm @ qpow[n - k]
    return acc / 2.0**n


def build_hamiltonian_matrix(model: HamiltonianModel, space: FockSpace):
    if model.poly_terms is None:
        raise ValueError(f"model {model.name!r} is not polynomial; the Fock oracle "
                         "needs declared polynomial terms")
    degree = max((m + n for m, n in model.poly_terms), default=0)
    if degree > space.pad:
        raise ValueError(f"polynomial degree {degree} exceeds Fock padding {space.pad}")
    H = np.zeros((space.big_dim, space.big_dim), dtype=complex)
    for (m, n), c in model.poly_terms.items():
        if c != 0:
            H += c * weyl_monomial(space, m, n)
    H = space.crop(H)
    return 0.5 * (H + H.conj().T)


def lindblad_operator(coupling: LindbladCoupling, space: FockSpace):
    l = coupling.l_re + 1j * coupling.l_im
    return l[0] * space.p + l[1] * space.q


def lindblad_rhs(rho, Hmat, Lmat, hbar):
    Ld = Lmat.conj().T
    LdL = Ld @ Lmat
    comm = Hmat @ rho - rho @ Hmat
    diss = 2.0 * Lmat @ rho @ Ld - LdL @ rho - rho @ LdL
    return (-1j / hbar) * comm + diss / (2.0 * hbar)


def integrate(rho0, Hmat, Lmat, hbar, t1, dt=1e-3, hermitize=True, sample_times=None):
    """RK4 integration; returns ``rho(t1)``, or a list at ``sample_times``.

    Stability needs ``dt * ||superoperator|| < 1``; re-Hermitization each
    step is skipped with ``hermitize=False`` (e.g. for ``|a><b|`` terms).
    """
    times = [t1] if sample_times is None else sorted(sample_times)
    rho = np.array(rho0, dtype=complex)
    out = []
    t = 0.0
    for target in times:
        span = target - t
        n = int(math.ceil(span / dt - 1e-9)) if span > 0 else 0
        h = span / n if n else 0.0
        for _ in range(n):
            k1 = lindblad_rhs(rho, Hmat, Lmat, hbar)
            k2 = lindblad_rhs(rho + 0.5 * h * k1, Hmat, Lmat, hbar)
            k3 = lindblad_rhs(rho + 0.5 * h * k2, Hmat, Lmat, hbar)
            k4 = lindblad_rhs(rho + h * k3, Hmat, Lmat, hbar)
            rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            if hermitize:
                rho = 0.5 * (rho + rho.conj().T)
            if not np.all(np.isfinite(rho)):
                raise NonFiniteError("density matrix overflow", t=t)
        t = target
        out.append(rho.copy())
    return out[0] if sample_times is None else out


class ChordSampler:
    """Chord function samples of Fock-space operators.

    The displacement generator is diagonalized in the padded space and the
    resulting exponential cropped, which keeps truncation effects away from
    the populated levels.
    """

    def __init__(self, space: FockSpace, pad=40):
        self.space = space
        big = space.dim + pad
        self.q = space.big_q(big)
        self.p = space.big_p(big)

    def bound(self):
        return math.sqrt(self.space.hbar * self.space.dim) / 4.0

    def displacement(self, xi):
        xi_p, xi_q = float(xi[0]), float(xi[1])
        if math.hypot(xi_p, xi_q) > self.bound():
            warnings.warn(f"chord {xi} beyond the resolvable bound {self.bound():.3g}",
                          TruncationWarning, stacklevel=2)
        K = xi_p * self.q - xi_q * self.p
        K = 0.5 * (K + K.conj().T)
        w, V = np.linalg.eigh(K)
        T = (V * np.exp(-1j * w / self.space.hbar)) @ V.conj().T
        return self.space.crop(T)

    def sample(self, rho, xi) -> complex:
        T = self.displacement(xi)
        return complex(np.trace(rho @ T) / (2.0 * np.pi * self.space.hbar))

    def samples(self, rho, xis):
        return np.array([self.sample(rho, xi) for xi in xis])


def chord_sample(rho, space: FockSpace, xi) -> complex:
    return ChordSampler(space).sample(rho, xi)


def density_from_kets(kets_weights):
    """``sum w_ab |a><b|`` from ``[(w, ket_a, ket_b), ...]``."""
    rho = 0
    for w, ka, kb in kets_weights:
        rho = rho + w * np.outer(ka, kb.conj())
    return rho
