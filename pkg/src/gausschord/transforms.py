"""Grid evaluation of chord functions and their Fourier transforms.

Working in ``y = J xi`` turns the symplectic Fourier transform into an
ordinary one, because ``xi ^ x = (J xi).x = y.x``:

    chi(y) = N int exp(-i y.x / hbar) W(x) dx
    W(x)   = N int exp(+i y.x / hbar) chi(y) dy,        N = 1 / (2 pi hbar)

so ``y_p`` is conjugate to ``p`` and ``y_q`` to ``q``.  In ``xi`` terms this
is the axis swap ``(xi_p, xi_q) -> (-xi_q, xi_p)``.  Grids are centred FFT
grids: ``n`` points ``c + (j - n/2) d`` for ``j = 0 .. n-1``.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass

import numpy as np

from .core import AliasWarning, NonIntegrableError, point

BINARY_MAGIC = b"CHRD"
BINARY_VERSION = 1


@dataclass(frozen=True)
class GridSpec:
    centre: np.ndarray
    half_widths: tuple
    points: tuple

    def __post_init__(self):
        object.__setattr__(self, "centre", point(self.centre))
        hw = tuple(float(h) for h in np.broadcast_to(self.half_widths, (2,)))
        n = tuple(int(k) for k in np.broadcast_to(self.points, (2,)))
        if min(hw) <= 0:
            raise ValueError("grid half-widths must be positive")
        for k in n:
            if k < 8 or k & (k - 1):
                raise ValueError(f"points per axis must be a power of two >= 8, got {k}")
        object.__setattr__(self, "half_widths", hw)
        object.__setattr__(self, "points", n)

    @property
    def spacing(self) -> tuple:
        return tuple(2.0 * h / n for h, n in zip(self.half_widths, self.points))

    def axis(self, i) -> np.ndarray:
        n = self.points[i]
        return self.centre[i] + (np.arange(n) - n // 2) * self.spacing[i]

    def mesh(self) -> np.ndarray:
        """Points of shape ``(n_p, n_q, 2)``; first axis is the p-like coordinate."""
        P, Q = np.meshgrid(self.axis(0), self.axis(1), indexing="ij")
        return np.stack([P, Q], axis=-1)

    def conjugate(self, hbar) -> "GridSpec":
        """The grid reached by a Fourier transform of this one (centred at 0)."""
        dx = [2.0 * np.pi * hbar / (n * d) for n, d in zip(self.points, self.spacing)]
        hw = [0.5 * n * d for n, d in zip(self.points, dx)]
        return GridSpec(np.zeros(2), tuple(hw), self.points)


@dataclass(frozen=True)
class ComplexField2D:
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != self.grid.points:
            raise ValueError(f"sample shape {v.shape} does not match grid {self.grid.points}")
        object.__setattr__(self, "values", v)

    def boundary_ratio(self) -> float:
        v = np.abs(self.values)
        edge = max(v[0, :].max(), v[-1, :].max(), v[:, 0].max(), v[:, -1].max())
        peak = v.max()
        return float(edge / peak) if peak > 0 else 0.0

    def integral(self) -> complex:
        dp, dq = self.grid.spacing
        return complex(self.values.sum() * dp * dq)

    def to_csv(self, path):
        mesh = self.grid.mesh().reshape(-1, 2)
        vals = self.values.reshape(-1)
        with open(path, "w") as fh:
            fh.write("x_p,x_q,re,im\n")
            for (p, q), v in zip(mesh.tolist(), vals.tolist()):
                fh.write(f"{p!r},{q!r},{v.real!r},{v.imag!r}\n")

    def to_binary(self, path):
        """Binary dump.

        Layout (little-endian): magic ``b"CHRD"``, version ``u32``, ``n_p``
        and ``n_q`` as ``u32``, then ``f64`` centre_p, centre_q,
        half_width_p, half_width_q, then ``n_p * n_q`` samples as
        ``(re, im)`` ``f64`` pairs in row-major (p-major) order.
        """
        g = self.grid
        with open(path, "wb") as fh:
            fh.write(BINARY_MAGIC)
            fh.write(struct.pack("<3I", BINARY_VERSION, *g.points))
            fh.write(struct.pack("<4d", *g.centre, *g.half_widths))
            fh.write(np.ascontiguousarray(self.values, dtype="<c16").tobytes())

    @classmethod
    def from_binary(cls, path) -> "ComplexField2D":
        with open(path, "rb") as fh:
            data = fh.read()
        if data[:4] != BINARY_MAGIC:
            raise ValueError("not a CHRD field file")
        version, n_p, n_q = struct.unpack_from("<3I", data, 4)
        if version != BINARY_VERSION:
            raise ValueError(f"unsupported CHRD version {version}")
        c_p, c_q, h_p, h_q = struct.unpack_from("<4d", data, 16)
        vals = np.frombuffer(data, dtype="<c16", offset=48).reshape(n_p, n_q)
        return cls(GridSpec((c_p, c_q), (h_p, h_q), (n_p, n_q)), vals.copy())


# -- evaluation --------------------------------------------------------------

def auto_grid(ensemble, hbar, points=256, sigmas=8.0) -> GridSpec:
    """Symmetric chord grid wide enough for every component's Gaussian tail."""
    hw = np.zeros(2)
    for _, s in ensemble.components:
        w = np.linalg.eigvalsh(s.M)
        if w.min() <= 0:
            raise NonIntegrableError("component with non-PD M cannot be gridded")
        width = sigmas * np.sqrt(hbar / w.min())
        hw = np.maximum(hw, np.abs(s.Y) + width)
    return GridSpec(np.zeros(2), tuple(hw), (points, points))


def eval_chord(ensemble, grid: GridSpec, hbar) -> ComplexField2D:
    return ComplexField2D(grid, ensemble.evaluate(grid.mesh(), hbar))


def _check_alias(field: ComplexField2D, what):
    r = field.boundary_ratio()
    if r > 1e-8:
        warnings.warn(f"{what} does not decay at the grid edge "
                      f"(edge/max = {r:.2e})", AliasWarning, stacklevel=3)


def wigner_from_chord(field: ComplexField2D, hbar) -> ComplexField2D:
    """Wigner function on the conjugate grid of a chord field sampled in ``y``."""
    g = field.grid
    if np.any(np.abs(g.centre) > 1e-12 * max(g.half_widths)):
        raise ValueError("chord field must be sampled on a grid centred at the origin")
    _check_alias(field, "chord function")
    dy = g.spacing
    n = g.points
    W = np.fft.fftshift(np.fft.ifft2(np.fft.ifftshift(field.values)))
    W *= n[0] * n[1] * dy[0] * dy[1] / (2.0 * np.pi * hbar)
    return ComplexField2D(g.conjugate(hbar), W)


def chord_from_wigner(field: ComplexField2D, hbar) -> ComplexField2D:
    """Inverse of :func:`wigner_from_chord`."""
    g = field.grid
    dx = g.spacing
    chi = np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(field.values)))
    chi *= dx[0] * dx[1] / (2.0 * np.pi * hbar)
    return ComplexField2D(g.conjugate(hbar), chi)


def position_matrix_slice(field: ComplexField2D, hbar, q_grid):
    """Density matrix elements ``<q + s/2| rho |q - s/2>``.

    Returns ``(s_values, rho)`` with ``rho[i, k]`` at separation
    ``s_values[i]`` and position ``q_grid[k]``.  Each row of the chord grid
    at fixed ``y_p = -s`` is Fourier transformed along ``y_q``.
    """
    g = field.grid
    _check_alias(field, "chord function")
    q_grid = np.asarray(q_grid, dtype=float)
    yq = g.axis(1)
    kernel = np.exp(1j * np.outer(yq, q_grid) / hbar) * g.spacing[1]
    rho = field.values @ kernel
    return -g.axis(0), rho


def wigner_direct(ensemble, hbar, x):
    """Wigner function at points ``x`` from a sum of Gaussian components.

    Uses the closed-form Fourier transform of each component; independent of
    the FFT path.
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape[:-1], dtype=complex)
    for w, s in ensemble.components:
        P = (s.M - 1j * s.N) / hbar
        Pinv = np.linalg.inv(P)
        # int exp(i u.(x - X)/hbar - u.P.u/2) du  with  u = y - Y
        k = (x - s.X) / hbar
        quad = np.einsum("...i,ij,...j->...", k, Pinv, k)
        phase = (1j * s.a - s.b) / hbar + 1j * (x @ s.Y) / hbar
        pref = 2.0 * np.pi / _sqrt_det(P)
        out = out + w * s.K * pref * np.exp(phase - 0.5 * quad) / (2.0 * np.pi * hbar)
    return out


# -- purity ------------------------------------------------------------------

def _sqrt_det(P) -> complex:
    # branch continuous from the real PD case: eigenvalues have Re > 0
    ev = np.linalg.eigvals(P)
    return complex(np.prod(np.sqrt(ev.astype(complex))))


def _pair_integral(sj, sk, hbar) -> complex:
    """``int chi_j(y) conj(chi_k(y)) dy`` for two Gaussian components."""
    Mj, Mk = sj.M, sk.M
    Msum = Mj + Mk
    if np.linalg.eigvalsh(Msum).min() <= 0:
        raise NonIntegrableError("pair form M_j + M_k is not positive definite")
    Qj = (Mj - 1j * sj.N) / hbar
    Qk = (Mk + 1j * sk.N) / hbar
    P = Qj + Qk
    # log chi_j = cj + lj.y - y.Qj.y/2, likewise for conj(chi_k)
    lj = Qj @ sj.Y - 1j * sj.X / hbar
    cj = (1j * sj.a + 1j * sj.Y @ sj.X - sj.b) / hbar - 0.5 * sj.Y @ Qj @ sj.Y
    lk = Qk @ sk.Y + 1j * sk.X / hbar
    ck = (-1j * sk.a - 1j * sk.Y @ sk.X - sk.b) / hbar - 0.5 * sk.Y @ Qk @ sk.Y
    l = lj + lk
    expo = cj + ck + 0.5 * l @ np.linalg.solve(P, l)
    return sj.K * np.conj(sk.K) * 2.0 * np.pi / _sqrt_det(P) * np.exp(expo)


def purity(ensemble, hbar) -> float:
    """``Tr rho**2 = 2 pi hbar int |chi|**2 dy`` via closed-form pair integrals."""
    total = 0j
    comps = ensemble.components
    for j, (wj, sj) in enumerate(comps):
        for k, (wk, sk) in enumerate(comps):
            total += wj * np.conj(wk) * _pair_integral(sj, sk, hbar)
    return float((2.0 * np.pi * hbar * total).real)


def purity_grid(field: ComplexField2D, hbar) -> float:
    dy = field.grid.spacing
    return float(2.0 * np.pi * hbar * (np.abs(field.values) ** 2).sum() * dy[0] * dy[1])
