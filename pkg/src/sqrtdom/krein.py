"""Closed-form machinery for the unit-diffusion operator on a finite interval.

Everything here concerns ``-d^2/dx^2`` on ``(a, b)`` with a Dirichlet
condition at ``b`` and a (possibly complex) separated condition at ``a``:
the explicit boundary solution, the scalar denominator coupling the two
realizations, the rank-one resolvent correction, sampled Green and
square-root kernels, and the Bessel-type envelope of the square-root
correction.  Expressions are evaluated in exponential-ratio form so large
shifts never overflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .assembly import BoundaryCondition, Mesh
from .matfun import QuadratureSpec, gauss_panels

__all__ = [
    "KernelTable",
    "u2_closed_form",
    "d_theta",
    "green_kernel_dirichlet",
    "krein_resolvent",
    "sqrt_kernel",
    "bessel_bound_check",
    "bessel_k0_quad",
]


@dataclass
class KernelTable:
    """Two-point kernel samples on the mesh nodes."""

    grid: np.ndarray
    values: np.ndarray
    kind: str  # green | sqrt_kernel | t_kernel
    params: dict


def u2_closed_form(z: complex, x, a: float, b: float):
    """Boundary solution with unit value at ``a`` and zero at ``b``.

    ``sin(sqrt(z)(b - x)) / sin(sqrt(z)(b - a))`` on the principal branch;
    for negative real ``z`` this is the hyperbolic ratio.  Raises when ``z``
    hits a Dirichlet eigenvalue (vanishing denominator).
    """
    z = complex(z)
    sz = np.sqrt(z)
    den = np.sin(sz * (b - a))
    if abs(den) < 1e-12 * (1.0 + abs(sz) * (b - a)):
        raise ZeroDivisionError(f"z = {z} is a Dirichlet eigenvalue")
    return np.sin(sz * (b - np.asarray(x))) / den


def _stable_cot(w: complex) -> complex:
    """Complex cotangent via one-sided exponentials, overflow-free."""
    if w.imag >= 0:
        t = np.exp(2j * w)
        return 1j * (t + 1.0) / (t - 1.0)
    t = np.exp(-2j * w)
    return -1j * (1.0 + t) / (t - 1.0)


def _u2_slope_at_a(z: complex, a: float, b: float) -> complex:
    # d/dx of the boundary solution at x = a
    sz = np.sqrt(complex(z))
    return -sz * _stable_cot(sz * (b - a))


def d_theta(z: complex, theta_a: BoundaryCondition, a: float, b: float) -> complex:
    """Coupling denominator ``cot(theta_a) + u2'(z, a)``.

    Nonzero whenever ``z`` lies in both resolvent sets; a (near) zero marks
    shared spectrum between the two realizations and is surfaced by the
    caller.
    """
    if theta_a.is_dirichlet:
        raise ValueError("the coupling denominator needs theta_a != 0")
    return theta_a.cot() + _u2_slope_at_a(z, a, b)


def _expm1_ratio(st, d):
    """(1 - exp(-2 st d)) terms, stable for large |st|."""
    return -np.expm1(-2.0 * st * d)


def green_kernel_dirichlet(z: complex, x, xp, a: float, b: float):
    """Green kernel of the Dirichlet realization at spectral point ``z``.

    Written as ``exp(-sqrt(-z) |x - x'|)`` times bounded hyperbolic ratios,
    so evaluation is stable arbitrarily deep on the negative real axis.
    """
    st = np.sqrt(-complex(z))  # principal root of -z; positive for z = -E
    X = np.asarray(x, dtype=float)
    Xp = np.asarray(xp, dtype=float)
    xl = np.minimum(X, Xp)
    xg = np.maximum(X, Xp)
    num = np.exp(-st * (xg - xl)) * _expm1_ratio(st, xl - a) * _expm1_ratio(st, b - xg)
    return num / (2.0 * st * _expm1_ratio(st, b - a))


def _t_kernel(tau, x, xp, cot_a: complex, a: float, b: float):
    """Square-root correction integrand at argument ``tau`` (> 0).

    The hyperbolic product over the squared denominator, divided by the
    coupling denominator evaluated at ``-tau``; decays like
    ``exp(-sqrt(tau) (x + x' - 2a))``.
    """
    st = np.sqrt(tau)
    ell = b - a
    em = np.exp(-2.0 * st * ell)
    dval = cot_a - st * (1.0 + em) / (1.0 - em)
    num = (np.exp(-st * ((x - a) + (xp - a)))
           * _expm1_ratio(st, b - x) * _expm1_ratio(st, b - xp))
    return num / (dval * _expm1_ratio(st, ell) ** 2)


def krein_resolvent(R_dir: np.ndarray, z: complex,
                    theta_a: BoundaryCondition, mesh: Mesh) -> np.ndarray:
    """Rank-one boundary correction of a Dirichlet resolvent kernel table.

    ``R_dir`` is the kernel table of the Dirichlet resolvent on the full
    node grid; the return value is the kernel of the realization with the
    ``theta_a`` condition at the left endpoint (Dirichlet kept at the
    right).  Aborts when the coupling denominator is numerically zero.
    """
    a, b = mesh.a, mesh.b
    d = d_theta(z, theta_a, a, b)
    if abs(d) < 1e-12 * (1.0 + abs(_u2_slope_at_a(z, a, b))):
        raise ZeroDivisionError("shared spectrum: coupling denominator vanishes")
    u2 = u2_closed_form(z, mesh.nodes, a, b)
    u2_bar = u2_closed_form(np.conj(complex(z)), mesh.nodes, a, b)
    return R_dir - np.outer(u2, np.conj(u2_bar)) / d


def sqrt_kernel(E: float, theta_a: BoundaryCondition, mesh: Mesh,
                quad: QuadratureSpec | None = None,
                cutoff: float | None = None) -> KernelTable:
    """Kernel table of the inverse square root at shift ``E``.

    The Dirichlet part integrates the closed-form Green kernel over the
    spectral parameter; the boundary-condition correction subtracts the
    integrated coupling kernel.  Both use the shared composite Gauss rule
    after the square-root substitution, truncated at ``cutoff`` (default
    pi / h, the finest scale the grid can carry; the on-diagonal values
    grow logarithmically with this cutoff, all off-diagonal entries
    converge).  Rows at the Dirichlet end vanish identically.
    """
    quad = quad or QuadratureSpec()
    a, b = mesh.a, mesh.b
    if E <= 0:
        raise ValueError("E must be positive")
    d0 = d_theta(-E, theta_a, a, b)
    if abs(d0) < 1e-12 * (1.0 + np.sqrt(E)):
        raise ValueError("E below the safe shift: coupling denominator vanishes")
    U = cutoff if cutoff is not None else np.pi / mesh.h
    cot_a = theta_a.cot()
    X, Xp = np.meshgrid(mesh.nodes, mesh.nodes, indexing="ij")
    # panels geometric toward 0 then scaled to [0, U]
    u, w = gauss_panels(U * quad.unit_edges(), quad.panel_nodes)
    acc = np.zeros_like(X, dtype=complex)
    for ui, wi in zip(u, w):
        tau = ui * ui + E
        acc += wi * (green_kernel_dirichlet(-tau, X, Xp, a, b)
                     - _t_kernel(tau, X, Xp, cot_a, a, b))
    values = (2.0 / np.pi) * acc
    if not np.all(np.isfinite(values)):
        raise FloatingPointError("square-root kernel quadrature overflowed")
    return KernelTable(grid=mesh.nodes.copy(), values=values,
                       kind="sqrt_kernel",
                       params={"E": E, "theta_a": theta_a.theta, "theta_b": 0.0,
                               "cutoff": float(U)})


def bessel_k0_quad(y: float, n_panels: int = 8, n_nodes: int = 24) -> float:
    """Macdonald function of order zero by quadrature of its cosh form.

    Integrates ``exp(-y cosh(u))`` over a panelled range long enough that
    the tail is below double precision; independent of the library
    implementation used as cross-check.
    """
    if y <= 0:
        raise ValueError("argument must be positive")
    # truncate once y cosh(u) pushes the integrand below double precision
    upper = float(np.arccosh(max(50.0 / y, 2.0))) + 1.0
    u, w = gauss_panels(np.linspace(0.0, upper, n_panels + 1), n_nodes)
    return float(np.sum(w * np.exp(-y * np.cosh(u))))


def _t_integral(E: float, x, xp, cot_a: complex, a: float, b: float,
                quad: QuadratureSpec, cutoff: float) -> complex:
    u, w = gauss_panels(cutoff * quad.unit_edges(), quad.panel_nodes)
    acc = 0.0 + 0.0j
    for ui, wi in zip(u, w):
        acc += wi * _t_kernel(ui * ui + E, x, xp, cot_a, a, b)
    return 2.0 * acc  # the substitution absorbs the inverse square root


def bessel_bound_check(E: float, x: float, xp: float,
                       theta_a: BoundaryCondition, mesh: Mesh,
                       quad: QuadratureSpec | None = None,
                       n_fit: int = 96) -> dict:
    """Envelope check of the square-root correction by Macdonald functions.

    The left side is the integrated coupling kernel at ``(x, x')``; the
    right side the four-term Macdonald envelope with prefactor ``C`` fitted
    as the supremum of the pointwise ratio over a log grid of spectral
    arguments at and above ``E``, inflated by a small relative margin since
    a sampled supremum underestimates the true one.  Degenerate corner
    arguments are rejected.
    """
    quad = quad or QuadratureSpec()
    a, b = mesh.a, mesh.b
    args = np.array([x + xp - 2 * a, 2 * b + x - xp - 2 * a,
                     2 * b + xp - x - 2 * a, 4 * b - x - xp - 2 * a])
    if np.any(args <= 0):
        raise ValueError("Macdonald arguments must be positive (corner pair)")
    cot_a = theta_a.cot()

    # fit C = sup |T(t, x, x')| sqrt(t) / (sum of four exponentials)
    taus = np.geomspace(E, E * 1e6, n_fit)
    C = 0.0
    for tau in taus:
        st = np.sqrt(tau)
        envelope = np.sum(np.exp(-st * args))
        tval = abs(_t_kernel(tau, x, xp, cot_a, a, b))
        if envelope > 0:
            C = max(C, tval * np.sqrt(tau) / envelope)
    C *= 1.0 + 1e-6

    cutoff = np.pi / mesh.h
    lhs = abs(_t_integral(E, x, xp, cot_a, a, b, quad, cutoff))
    sqE = np.sqrt(E)
    rhs = 2.0 * C * float(sum(special.k0(sqE * d) for d in args))
    return {"lhs": float(lhs), "rhs": float(rhs), "slack": float(rhs - lhs),
            "C": float(C)}
