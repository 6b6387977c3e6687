"""Single Hamiltonians H(x, t) and the induced double-phase-space Hamiltonian.

For a chord ``y`` the two chord tips are ``x - J y / 2`` and ``x + J y / 2``
and the double Hamiltonian is

    HH(x, y, t) = H(x - J y / 2, t) - H(x + J y / 2, t) - gamma x.y

Its derivative blocks are assembled by the chain rule from the gradient and
Hessian of ``H`` at the two tips, never by differencing ``HH`` itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import J, LindbladCoupling, sym

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class HamiltonianModel:
    """Evaluator for ``H(x, t)`` with first and second derivatives.

    ``value``, ``grad`` and ``hess`` take a point ``x`` of shape ``(..., 2)``
    and a time.  Builtin models broadcast over leading axes and accept
    complex points, which the Hamilton-Jacobi residual needs.

    ``poly_terms`` maps ``(m, n)`` to the coefficient of ``p**m q**n`` for
    polynomial models (used to build the Weyl-ordered Fock matrix).
    ``mass`` and ``potential`` are set for separable ``p**2/2m + V(q)``
    models, which the Heller comparison needs.
    """

    name: str
    value: Callable
    grad: Callable
    hess: Callable
    analytic: bool = True
    params: dict = field(default_factory=dict)
    poly_terms: dict | None = None
    mass: float | None = None
    potential: "Potential | None" = None

    def __call__(self, x, t=0.0):
        return self.value(np.asarray(x), t)

    @property
    def is_quadratic(self) -> bool:
        return self.poly_terms is not None and all(
            m + n <= 2 for (m, n), c in self.poly_terms.items() if c != 0
        )

    @property
    def quadratic_matrix(self) -> np.ndarray:
        """The symmetric matrix ``Hm`` with ``H(x) = x.Hm.x`` (quadratic models only)."""
        if not self.is_quadratic:
            raise ValueError(f"model {self.name!r} is not quadratic")
        t = self.poly_terms
        return np.array(
            [[t.get((2, 0), 0.0), 0.5 * t.get((1, 1), 0.0)],
             [0.5 * t.get((1, 1), 0.0), t.get((0, 2), 0.0)]]
        )


@dataclass(frozen=True)
class Potential:
    """``V(q)`` with its first two derivatives; broadcasts, accepts complex."""

    name: str
    V: Callable
    dV: Callable
    d2V: Callable


@dataclass(frozen=True)
class DoubleHamiltonianEval:
    value: float
    d_x: np.ndarray
    d_y: np.ndarray
    d_xx: np.ndarray
    d_yy: np.ndarray
    d_xy: np.ndarray  # entry [i, j] is d2 HH / dx_i dy_j

    @property
    def d_yx(self) -> np.ndarray:
        return self.d_xy.T


# -- builtin models ---------------------------------------------------------

def quadratic(Hmat=((0.5, 0.0), (0.0, 0.5))) -> HamiltonianModel:
    """``H(x) = x.Hm.x`` for a symmetric 2x2 matrix ``Hm``."""
    Hm = sym(np.asarray(Hmat, dtype=float))
    if Hm.shape != (2, 2):
        raise ValueError("Hmat must be 2x2")

    def value(x, t=0.0):
        return np.einsum("...i,ij,...j->...", x, Hm, x)

    def grad(x, t=0.0):
        return 2.0 * np.einsum("ij,...j->...i", Hm, x)

    def hess(x, t=0.0):
        x = np.asarray(x)
        return np.broadcast_to(2.0 * Hm, x.shape[:-1] + (2, 2)).copy()

    terms = {(2, 0): Hm[0, 0], (1, 1): 2.0 * Hm[0, 1], (0, 2): Hm[1, 1]}
    pot = None
    mass = None
    if Hm[0, 1] == 0.0 and Hm[0, 0] > 0.0:
        mass = 1.0 / (2.0 * Hm[0, 0])
        k = Hm[1, 1]
        pot = Potential(
            "quadratic",
            lambda q: k * q**2,
            lambda q: 2.0 * k * q,
            lambda q: 2.0 * k + 0.0 * q,
        )
    return HamiltonianModel("quadratic", value, grad, hess, True,
                            {"Hmat": Hm.tolist()}, terms, mass, pot)


def separable(potential: Potential, m=1.0, name=None, params=None,
              poly_terms=None) -> HamiltonianModel:
    """``H = p**2 / 2m + V(q)``."""
    if m <= 0:
        raise ValueError("mass must be positive")

    def value(x, t=0.0):
        x = np.asarray(x)
        return x[..., 0] ** 2 / (2.0 * m) + potential.V(x[..., 1])

    def grad(x, t=0.0):
        x = np.asarray(x)
        return np.stack([x[..., 0] / m, potential.dV(x[..., 1])], axis=-1)

    def hess(x, t=0.0):
        x = np.asarray(x)
        out = np.zeros(x.shape[:-1] + (2, 2), dtype=np.result_type(x, float))
        out[..., 0, 0] = 1.0 / m
        out[..., 1, 1] = potential.d2V(x[..., 1])
        return out

    return HamiltonianModel(name or potential.name, value, grad, hess, True,
                            dict(params or {}, m=m), poly_terms, m, potential)


def quartic(eps=0.1, m=1.0) -> HamiltonianModel:
    """``H = p**2/2m + q**2/2 + eps q**4``."""
    pot = Potential(
        "quartic",
        lambda q: 0.5 * q**2 + eps * q**4,
        lambda q: q + 4.0 * eps * q**3,
        lambda q: 1.0 + 12.0 * eps * q**2,
    )
    terms = {(2, 0): 1.0 / (2.0 * m), (0, 2): 0.5, (0, 4): eps}
    return separable(pot, m, "quartic", {"eps": eps}, terms)


def pendulum(k=1.0, m=1.0) -> HamiltonianModel:
    """``H = p**2/2m - k cos q``."""
    pot = Potential(
        "pendulum",
        lambda q: -k * np.cos(q),
        lambda q: k * np.sin(q),
        lambda q: k * np.cos(q),
    )
    return separable(pot, m, "pendulum", {"k": k})


BUILTIN = {
    "quadratic": quadratic,
    "quartic": quartic,
    "pendulum": pendulum,
}


def builtin_models() -> list[HamiltonianModel]:
    """One default-parametrized instance of every builtin model."""
    return [factory() for factory in BUILTIN.values()]


def make_model(name: str, **params) -> HamiltonianModel:
    try:
        factory = BUILTIN[name]
    except KeyError:
        raise ValueError(
            f"unknown Hamiltonian {name!r}; choose from {sorted(BUILTIN)}"
        ) from None
    return factory(**params)


# -- numeric fallback -------------------------------------------------------

def numeric_derivatives(evaluator: Callable, name="numeric") -> HamiltonianModel:
    """Wrap a bare ``H(x, t)`` evaluator with central-difference derivatives.

    The gradient uses step ``cbrt(eps) * max(1, |x|)``.  The Hessian uses
    ``eps**0.25 * max(1, |x|)``, the step that balances truncation against
    rounding for a second difference.  Accuracy degrades silently near
    non-smooth points.
    """

    def value(x, t=0.0):
        return evaluator(np.asarray(x, dtype=float), t)

    def _step(x, power):
        return EPS**power * max(1.0, float(np.max(np.abs(x))))

    def grad(x, t=0.0):
        x = np.asarray(x, dtype=float)
        h = _step(x, 1.0 / 3.0)
        g = np.empty(2)
        for i in range(2):
            e = np.zeros(2)
            e[i] = h
            g[i] = (evaluator(x + e, t) - evaluator(x - e, t)) / (2.0 * h)
        return g

    def hess(x, t=0.0):
        x = np.asarray(x, dtype=float)
        h = _step(x, 0.25)
        f0 = evaluator(x, t)
        out = np.empty((2, 2))
        for i in range(2):
            e = np.zeros(2)
            e[i] = h
            out[i, i] = (evaluator(x + e, t) - 2.0 * f0 + evaluator(x - e, t)) / h**2
        ep = np.array([h, h])
        em = np.array([h, -h])
        out[0, 1] = out[1, 0] = (
            evaluator(x + ep, t) - evaluator(x + em, t)
            - evaluator(x - em, t) + evaluator(x - ep, t)
        ) / (4.0 * h**2)
        return out

    return HamiltonianModel(name, value, grad, hess, analytic=False)


# -- double Hamiltonian -----------------------------------------------------

def chord_tips(x, y):
    """Return ``(x - J y / 2, x + J y / 2)``, the arguments of the two H terms."""
    x = np.asarray(x)
    half = 0.5 * np.einsum("ij,...j->...i", J, y)
    return x - half, x + half


def double_hamiltonian_value(model: HamiltonianModel, coupling: LindbladCoupling,
                             x, y, t=0.0):
    """Vectorized ``HH(x, y, t)``; ``x`` may be complex."""
    xp, xm = chord_tips(x, y)
    return (model.value(xp, t) - model.value(xm, t)
            - coupling.gamma * np.einsum("...i,...i->...", x, y))


def double_hamiltonian(model: HamiltonianModel, coupling: LindbladCoupling,
                       x, y, t=0.0) -> DoubleHamiltonianEval:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    g = coupling.gamma
    xp, xm = chord_tips(x, y)
    gp, gm = model.grad(xp, t), model.grad(xm, t)
    hp, hm = sym(model.hess(xp, t)), sym(model.hess(xm, t))
    value = float(model.value(xp, t) - model.value(xm, t) - g * (x @ y))
    return DoubleHamiltonianEval(
        value=value,
        d_x=gp - gm - g * y,
        d_y=0.5 * J @ (gp + gm) - g * x,
        d_xx=hp - hm,
        d_yy=sym(0.25 * J @ (hm - hp) @ J),
        d_xy=-0.5 * (hp + hm) @ J - g * np.eye(2),
    )
