"""Named coefficient families and ready-made operator setups.

The families exercise the admissible coefficient classes: bounded complex
constants, sign-changing sawtooth profiles, and locally integrable spikes
whose singularity is truncated at grid scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assembly import (BoundaryCondition, CoefficientSet, DiscreteOperator,
                       FormMatrices, IntervalSpec, Mesh, assemble_forms,
                       build_mesh, coefficient_family, orthonormalize,
                       w12_norm_matrix)

__all__ = [
    "FAMILY_NAMES",
    "build_coefficients",
    "Problem",
    "make_problem",
    "lions_operator",
]

FAMILY_NAMES = (
    "free",
    "complex_p",
    "constant_qrs",
    "complex_constant",
    "mixed_sign",
    "sawtooth",
    "spike",
)


def build_coefficients(name: str, mesh: Mesh) -> CoefficientSet:
    """Sample one named family on the mesh; spikes are capped at grid scale."""
    if name == "free":
        return CoefficientSet.from_callables(mesh)
    if name == "complex_p":
        return CoefficientSet.from_callables(mesh, p=1.0 + 0.5j)
    if name == "constant_qrs":
        return CoefficientSet.from_callables(mesh, q=1.0, r=1.0, s=1.0)
    if name == "complex_constant":
        return CoefficientSet.from_callables(
            mesh, p=1.0 + 0.5j, q=2.0 - 1.0j, r=1.0 + 1.0j, s=0.5j)
    if name == "mixed_sign":
        return CoefficientSet.from_callables(
            mesh,
            q=coefficient_family("sawtooth", amplitude=3.0, period=0.37),
            r=coefficient_family("sawtooth", amplitude=2.0, period=0.53),
            s=-1.0)
    if name == "sawtooth":
        return CoefficientSet.from_callables(
            mesh, p=lambda x: 1.0 + 0.25j * np.ones_like(x),
            q=coefficient_family("sawtooth", amplitude=4.0, period=0.29),
            r=coefficient_family("sawtooth", amplitude=1.5, period=0.41),
            s=coefficient_family("sawtooth", amplitude=1.0, period=0.61))
    if name == "spike":
        center = mesh.a + 0.5 * (mesh.b - mesh.a)
        return CoefficientSet.from_callables(
            mesh,
            q=coefficient_family("spike", center=center, exponent=0.5,
                                 cap=(mesh.h / 2.0) ** -0.5,
                                 phase=np.exp(1j * np.pi / 3)),
            r=coefficient_family("spike", center=center, exponent=0.25,
                                 cap=(mesh.h / 2.0) ** -0.25),
            s=coefficient_family("spike", center=center, exponent=0.25,
                                 cap=(mesh.h / 2.0) ** -0.25, phase=-1.0))
    raise ValueError(f"unknown coefficient family {name!r}; "
                     f"choose one of {FAMILY_NAMES}")


@dataclass
class Problem:
    """One assembled instance: mesh, coefficients and both operator forms."""

    name: str
    interval: IntervalSpec
    mesh: Mesh
    coeffs: CoefficientSet
    bc_left: BoundaryCondition
    bc_right: BoundaryCondition
    forms: FormMatrices
    operator: DiscreteOperator

    def base_operator(self) -> DiscreteOperator:
        """Same second-order part and boundary conditions, no lower-order terms."""
        base = CoefficientSet(p=self.coeffs.p, q=np.zeros_like(self.coeffs.q),
                              r=np.zeros_like(self.coeffs.r),
                              s=np.zeros_like(self.coeffs.s),
                              lam=self.coeffs.lam, Lam=self.coeffs.Lam)
        return orthonormalize(assemble_forms(self.mesh, base, self.bc_left,
                                             self.bc_right))

    def reference_operator(self) -> DiscreteOperator:
        """Self-adjoint unit-diffusion reference with the same form domain.

        Non-Dirichlet ends become Neumann: the form domain only sees whether
        a boundary parameter vanishes.
        """
        ref = CoefficientSet.from_callables(self.mesh, p=1.0)
        bl = (self.bc_left if self.bc_left.is_dirichlet
              else BoundaryCondition.neumann())
        br = (self.bc_right if self.bc_right.is_dirichlet
              else BoundaryCondition.neumann())
        return orthonormalize(assemble_forms(self.mesh, ref, bl, br))

    def sobolev_gram(self, E: float) -> np.ndarray:
        return w12_norm_matrix(self.mesh, self.bc_left, self.bc_right, E)


def make_problem(family: str, interval: IntervalSpec | None = None,
                 n: int = 64,
                 bc_left: BoundaryCondition | None = None,
                 bc_right: BoundaryCondition | None = None) -> Problem:
    """Assemble a named family on an interval with the given conditions.

    Truncated-line intervals default to Dirichlet at the artificial far
    boundary; the finite interval defaults to Dirichlet at both ends.
    """
    interval = interval or IntervalSpec()
    mesh = build_mesh(interval, n)
    coeffs = build_coefficients(family, mesh)
    bl = bc_left if bc_left is not None else BoundaryCondition.dirichlet()
    br = bc_right if bc_right is not None else BoundaryCondition.dirichlet()
    forms = assemble_forms(mesh, coeffs, bl, br)
    return Problem(name=family, interval=interval, mesh=mesh, coeffs=coeffs,
                   bc_left=bl, bc_right=br, forms=forms,
                   operator=orthonormalize(forms))


def lions_operator(n: int, X: float = 1.0) -> DiscreteOperator:
    """Upwind first-derivative operator with a Dirichlet condition at 0.

    Forward differences on ``(0, X)`` in L2-orthonormal coordinates give the
    lower-bidiagonal Toeplitz matrix with ``1/h`` on the diagonal: accretive,
    heavily nonnormal, and the canonical negative control for square-root
    domain questions at the critical power.
    """
    if n < 8:
        raise ValueError("need at least 8 cells")
    interval = IntervalSpec(kind="finite", a=0.0, b=X)
    mesh = build_mesh(interval, n)
    h = mesh.h
    T = np.zeros((n, n), dtype=complex)
    np.fill_diagonal(T, 1.0 / h)
    T[np.arange(1, n), np.arange(0, n - 1)] = -1.0 / h
    # carrier FormMatrices: uniform rectangle-rule mass, the derivative form
    # itself in the base slot (no second-order part exists for this operator)
    M = h * np.eye(n, dtype=complex)
    S = h * T
    zero = np.zeros((n, n), dtype=complex)
    coeffs = CoefficientSet.from_callables(mesh, p=1.0)
    forms = FormMatrices(M=M, K0=S, K1=zero, K2=zero.copy(), K3=zero.copy(),
                         Bdry=zero.copy(), mesh=mesh,
                         bc_left=BoundaryCondition.dirichlet(),
                         bc_right=BoundaryCondition.neumann(),
                         coeffs=coeffs, dof_nodes=np.arange(1, n + 1),
                         _lumped=np.full(n, h))
    return DiscreteOperator(H=T, forms=forms, mass_treatment="lumped",
                            coefficient_hash=coeffs.digest())
