"""Meshes, boundary conditions and finite-element form matrices.

Second-order operators with convection and potential terms are realized
through their sesquilinear forms on piecewise-linear elements over uniform
meshes.  Coefficients are sampled once per cell at the midpoint, which keeps
every matrix exact for piecewise-constant data and first-order accurate
otherwise.  The convention throughout: the full form matrix ``S`` satisfies
``q(g, f) = g^H S f`` for nodal vectors, conjugate-linear in the first slot.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "IntervalSpec",
    "Mesh",
    "BoundaryCondition",
    "CoefficientSet",
    "FormMatrices",
    "DiscreteOperator",
    "build_mesh",
    "assemble_forms",
    "orthonormalize",
    "w12_norm_matrix",
    "coefficient_family",
]


@dataclass(frozen=True)
class IntervalSpec:
    """A finite interval or a truncated half/full line.

    ``half_line`` computes on ``[a, a + truncation_radius]`` and ``full_line``
    on ``[-truncation_radius, truncation_radius]``; the artificial far
    boundary carries a Dirichlet condition by default, documented as an
    approximation of the unbounded problem.
    """

    kind: str = "finite"
    a: float = 0.0
    b: float = 1.0
    truncation_radius: float = 20.0

    def __post_init__(self):
        if self.kind not in ("finite", "half_line", "full_line"):
            raise ValueError(f"unknown interval kind {self.kind!r}")
        if self.kind == "finite" and not self.a < self.b:
            raise ValueError("degenerate interval: need a < b")
        if self.kind != "finite" and not self.truncation_radius > 0:
            raise ValueError("truncation radius must be positive")

    def endpoints(self) -> tuple[float, float]:
        if self.kind == "finite":
            return self.a, self.b
        if self.kind == "half_line":
            return self.a, self.a + self.truncation_radius
        return -self.truncation_radius, self.truncation_radius

    @property
    def length(self) -> float:
        lo, hi = self.endpoints()
        return hi - lo


@dataclass(frozen=True)
class Mesh:
    """Uniform partition of an interval into ``n_cells`` cells."""

    nodes: np.ndarray
    uniform: bool = True

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or len(nodes) < 3:
            raise ValueError("mesh needs at least 2 cells")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("mesh nodes must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)

    @property
    def h(self) -> float:
        return (self.nodes[-1] - self.nodes[0]) / self.n_cells

    @property
    def n_cells(self) -> int:
        return len(self.nodes) - 1

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.nodes[:-1] + self.nodes[1:])

    @property
    def a(self) -> float:
        return float(self.nodes[0])

    @property
    def b(self) -> float:
        return float(self.nodes[-1])


def build_mesh(interval: IntervalSpec, n: int) -> Mesh:
    """Uniform mesh with ``n`` cells over the (truncated) interval."""
    if n < 2:
        raise ValueError("need at least 2 cells")
    lo, hi = interval.endpoints()
    return Mesh(nodes=np.linspace(lo, hi, n + 1))


_THETA_NEUMANN = np.pi / 2


@dataclass(frozen=True)
class BoundaryCondition:
    """Separated boundary condition encoded by a strip parameter.

    ``theta = 0`` is Dirichlet (the boundary degree of freedom is removed),
    ``theta = pi/2`` is Neumann (the free natural condition), any other value
    in the strip ``0 <= Re theta < pi`` contributes ``-cot(theta)`` times the
    boundary trace to the base form.
    """

    theta: complex = 0.0

    def __post_init__(self):
        th = complex(self.theta)
        if not (0.0 <= th.real < np.pi):
            raise ValueError("boundary parameter must satisfy 0 <= Re(theta) < pi")
        object.__setattr__(self, "theta", th)

    @classmethod
    def dirichlet(cls) -> "BoundaryCondition":
        return cls(0.0)

    @classmethod
    def neumann(cls) -> "BoundaryCondition":
        return cls(_THETA_NEUMANN)

    @property
    def is_dirichlet(self) -> bool:
        return self.theta == 0

    def cot(self) -> complex:
        # theta = 0 must route to the Dirichlet branch, never through here
        if self.is_dirichlet:
            raise ZeroDivisionError("cot(theta) pole at theta = 0 (Dirichlet)")
        if self.theta == _THETA_NEUMANN:
            return 0.0 + 0.0j
        th = self.theta
        return np.cos(th) / np.sin(th)

    def conjugate(self) -> "BoundaryCondition":
        return BoundaryCondition(np.conj(self.theta))


@dataclass(frozen=True)
class CoefficientSet:
    """Cell-midpoint samples of the four coefficients plus ellipticity bounds.

    ``lam`` is a positive lower bound for ``Re p`` and ``Lam`` an upper bound
    for ``|p|`` over the samples; both default to the sampled extremes.
    """

    p: np.ndarray
    q: np.ndarray
    r: np.ndarray
    s: np.ndarray
    lam: float = 0.0
    Lam: float = 0.0

    def __post_init__(self):
        arrs = {}
        n = None
        for name in ("p", "q", "r", "s"):
            arr = np.asarray(getattr(self, name), dtype=complex)
            if n is None:
                n = len(arr)
            elif len(arr) != n:
                raise ValueError("coefficient samples must share one length")
            arrs[name] = arr
        lam = self.lam if self.lam > 0 else float(arrs["p"].real.min())
        Lam = self.Lam if self.Lam > 0 else float(np.abs(arrs["p"]).max())
        if lam <= 0:
            raise ValueError("need Re(p) >= lam > 0 at every sample")
        if arrs["p"].real.min() < lam - 1e-12 * max(1.0, lam):
            raise ValueError("Re(p) drops below the declared lower bound")
        if np.abs(arrs["p"]).max() > Lam + 1e-12 * max(1.0, Lam):
            raise ValueError("|p| exceeds the declared upper bound")
        for name, arr in arrs.items():
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "Lam", Lam)

    @classmethod
    def from_callables(cls, mesh: Mesh, p=None, q=None, r=None, s=None,
                       lam: float = 0.0, Lam: float = 0.0) -> "CoefficientSet":
        """Sample callables (or constants) at the cell midpoints."""
        mids = mesh.midpoints

        def sample(f, default):
            if f is None:
                return np.full(len(mids), default, dtype=complex)
            if np.isscalar(f):
                return np.full(len(mids), complex(f))
            return np.asarray(f(mids), dtype=complex)

        return cls(p=sample(p, 1.0), q=sample(q, 0.0), r=sample(r, 0.0),
                   s=sample(s, 0.0), lam=lam, Lam=Lam)

    def conjugate_adjoint(self) -> "CoefficientSet":
        """Coefficients of the formal adjoint: conjugate and swap r with s."""
        return CoefficientSet(p=np.conj(self.p), q=np.conj(self.q),
                              r=np.conj(self.s), s=np.conj(self.r),
                              lam=self.lam, Lam=self.Lam)

    def digest(self) -> str:
        h = hashlib.sha256()
        for arr in (self.p, self.q, self.r, self.s):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()[:12]


def coefficient_family(name: str, **params):
    """Built-in coefficient callables for the named test families.

    Families: ``constant`` (value), ``sawtooth`` (amplitude, period) and
    ``spike`` (center, exponent, cap), the last giving the locally
    integrable singular profile ``|x - center|^(-exponent)`` truncated at
    ``cap`` (callers truncate at grid scale).
    """
    if name == "constant":
        value = complex(params.get("value", 1.0))
        return lambda x: np.full(np.shape(x), value)
    if name == "sawtooth":
        amp = complex(params.get("amplitude", 1.0))
        period = float(params.get("period", 0.25))
        return lambda x: amp * (2.0 * np.mod(np.asarray(x) / period, 1.0) - 1.0)
    if name == "spike":
        center = float(params.get("center", 0.5))
        expo = float(params.get("exponent", 0.5))
        cap = float(params.get("cap", 1e6))
        phase = complex(params.get("phase", 1.0))

        def f(x):
            d = np.abs(np.asarray(x) - center)
            with np.errstate(divide="ignore"):
                v = np.where(d > 0, d ** (-expo), np.inf)
            return phase * np.minimum(v, cap)

        return f
    raise ValueError(f"unknown coefficient family {name!r}")


@dataclass
class FormMatrices:
    """Assembled form matrices on the retained degrees of freedom.

    ``M`` is the consistent mass, ``M_lumped`` its diagonal row-sum; ``K0``
    carries the second-order part, ``K1``/``K2`` the two convective terms,
    ``K3`` the (lumped, diagonal) potential and ``Bdry`` the rank <= 2
    boundary contribution.  ``dof_nodes`` indexes the retained mesh nodes.
    """

    M: np.ndarray
    K0: np.ndarray
    K1: np.ndarray
    K2: np.ndarray
    K3: np.ndarray
    Bdry: np.ndarray
    mesh: Mesh
    bc_left: BoundaryCondition
    bc_right: BoundaryCondition
    coeffs: CoefficientSet
    dof_nodes: np.ndarray = field(repr=False, default=None)
    _lumped: np.ndarray = field(repr=False, default=None)

    @property
    def n_dof(self) -> int:
        return self.M.shape[0]

    @property
    def lumped_weights(self) -> np.ndarray:
        """Trapezoid weights of the retained nodes (full-mesh row sums), real.

        Computed before Dirichlet removal so interior nodes next to a
        removed boundary node keep their full weight.
        """
        return self._lumped

    def total(self) -> np.ndarray:
        return self.K0 + self.K1 + self.K2 + self.K3 + self.Bdry


@dataclass
class DiscreteOperator:
    """Operator matrix in L2-orthonormal coordinates plus provenance.

    ``H = M^{-1/2} S M^{-1/2}`` with ``S`` the full form matrix.  Nodal
    vectors ``f`` and orthonormal vectors ``u`` are related by
    ``u = M^{1/2} f``; with the (default) lumped mass ``M^{1/2}`` is the
    diagonal of square-rooted trapezoid weights.
    """

    H: np.ndarray
    forms: FormMatrices
    mass_treatment: str = "lumped"
    coefficient_hash: str = ""

    @property
    def n(self) -> int:
        return self.H.shape[0]

    @property
    def mesh(self) -> Mesh:
        return self.forms.mesh

    @property
    def dof_nodes(self) -> np.ndarray:
        return self.forms.dof_nodes

    def mass_sqrt(self) -> np.ndarray:
        """The square root of the mass used for the coordinate change."""
        if self.mass_treatment == "lumped":
            return np.diag(np.sqrt(self.forms.lumped_weights))
        from .matfun import sqrt_db

        return sqrt_db(self.forms.M)

    def nodal_to_ortho(self, f: np.ndarray) -> np.ndarray:
        if self.mass_treatment == "lumped":
            return np.sqrt(self.forms.lumped_weights) * np.asarray(f, dtype=complex)
        return self.mass_sqrt() @ np.asarray(f, dtype=complex)

    def kernel_table(self, R_ortho: np.ndarray) -> np.ndarray:
        """Two-point kernel samples of an operator given in orthonormal
        coordinates, extended by zero onto removed Dirichlet nodes."""
        w = self.forms.lumped_weights
        winv = 1.0 / np.sqrt(w)
        n_nodes = len(self.mesh.nodes)
        table = np.zeros((n_nodes, n_nodes), dtype=complex)
        idx = np.ix_(self.dof_nodes, self.dof_nodes)
        table[idx] = winv[:, None] * R_ortho * winv[None, :]
        return table


def _dof_nodes(n_nodes: int, bc_left: BoundaryCondition,
               bc_right: BoundaryCondition) -> np.ndarray:
    keep = np.arange(n_nodes)
    if bc_left.is_dirichlet:
        keep = keep[1:]
    if bc_right.is_dirichlet:
        keep = keep[:-1]
    return keep


def assemble_forms(mesh: Mesh, coeffs: CoefficientSet,
                   bc_left: BoundaryCondition,
                   bc_right: BoundaryCondition) -> FormMatrices:
    """Assemble the form matrices of the full operator on the mesh.

    Parameters
    ----------
    mesh : Mesh
    coeffs : CoefficientSet
        Samples aligned with ``mesh.midpoints``.
    bc_left, bc_right : BoundaryCondition
        Dirichlet ends drop the corresponding node from the DOF set; any
        other ``theta`` adds ``-cot(theta)`` times the boundary trace pair.
    """
    n = mesh.n_cells
    if len(coeffs.p) != n:
        raise ValueError("coefficient samples are not aligned with the mesh")
    h = mesh.h
    N = n + 1
    p, q, r, s = coeffs.p, coeffs.q, coeffs.r, coeffs.s

    M = np.zeros((N, N), dtype=complex)
    K0 = np.zeros((N, N), dtype=complex)
    K1 = np.zeros((N, N), dtype=complex)
    K2 = np.zeros((N, N), dtype=complex)
    K3 = np.zeros((N, N), dtype=complex)

    ks = np.arange(n)
    left, right = ks, ks + 1

    def scatter(mat, ii, jj, vals):
        np.add.at(mat, (ii, jj), vals)

    # mass: exact hat integrals per cell (h/3 diagonal, h/6 off-diagonal)
    for ii, jj, w in ((left, left, h / 3), (right, right, h / 3),
                      (left, right, h / 6), (right, left, h / 6)):
        scatter(M, ii, jj, np.full(n, w, dtype=complex))
    # second-order part: p(mid) * grad(hat) products, +-1/h
    for ii, jj, sign in ((left, left, 1), (right, right, 1),
                         (left, right, -1), (right, left, -1)):
        scatter(K0, ii, jj, sign * p / h)
    # convection <f, r g'>: midpoint value 1/2 against slope +-1/h
    for ii, jj, sign in ((left, left, -1), (left, right, 1),
                         (right, left, -1), (right, right, 1)):
        scatter(K1, ii, jj, sign * r / 2)
    # convection <f', s g>: transpose sparsity of K1
    for ii, jj, sign in ((left, left, -1), (right, left, 1),
                         (left, right, -1), (right, right, 1)):
        scatter(K2, ii, jj, sign * s / 2)
    # potential: lumped quadrature, diagonal
    scatter(K3, left, left, q * h / 2)
    scatter(K3, right, right, q * h / 2)

    Bdry = np.zeros((N, N), dtype=complex)
    if not bc_left.is_dirichlet:
        Bdry[0, 0] = -bc_left.cot()
    if not bc_right.is_dirichlet:
        Bdry[-1, -1] = -bc_right.cot()

    keep = _dof_nodes(N, bc_left, bc_right)
    sub = np.ix_(keep, keep)
    lumped = np.full(N, h)
    lumped[0] = lumped[-1] = h / 2
    return FormMatrices(M=M[sub], K0=K0[sub], K1=K1[sub], K2=K2[sub],
                        K3=K3[sub], Bdry=Bdry[sub], mesh=mesh,
                        bc_left=bc_left, bc_right=bc_right, coeffs=coeffs,
                        dof_nodes=keep, _lumped=lumped[keep])


def orthonormalize(forms: FormMatrices,
                   mass_treatment: str = "lumped") -> DiscreteOperator:
    """Turn assembled forms into the operator matrix ``M^{-1/2} S M^{-1/2}``.

    Lumped mode uses the diagonal row-sum mass, making ``M^{-1/2}`` exact;
    consistent mode computes a dense Hermitian square root of ``M``.
    """
    S = forms.total()
    if mass_treatment == "lumped":
        w = forms.lumped_weights
        if np.any(w <= 0):
            raise ValueError("lumped mass is not positive definite")
        winv = 1.0 / np.sqrt(w)
        H = winv[:, None] * S * winv[None, :]
    elif mass_treatment == "consistent":
        M = 0.5 * (forms.M + forms.M.conj().T)
        evals, evecs = np.linalg.eigh(M)
        if evals.min() <= 0:
            raise ValueError("consistent mass is not positive definite")
        Minvh = (evecs * (evals ** -0.5)[None, :]) @ evecs.conj().T
        H = Minvh @ S @ Minvh
    else:
        raise ValueError(f"unknown mass treatment {mass_treatment!r}")
    return DiscreteOperator(H=H, forms=forms, mass_treatment=mass_treatment,
                            coefficient_hash=forms.coeffs.digest())


def w12_norm_matrix(mesh: Mesh, bc_left: BoundaryCondition,
                    bc_right: BoundaryCondition, E: float,
                    mass_treatment: str = "lumped") -> np.ndarray:
    """Gram matrix of the E-scaled first-order Sobolev norm on interpolants.

    ``f^H G_E f = ||f'||^2 + E ||f||^2`` with unit diffusion stiffness and
    the requested mass, Dirichlet DOFs removed per the boundary conditions.
    """
    if E <= 0:
        raise ValueError("E must be positive")
    ref = CoefficientSet.from_callables(mesh, p=1.0)
    forms = assemble_forms(mesh, ref, bc_left, bc_right)
    if mass_treatment == "lumped":
        mass = np.diag(forms.lumped_weights).astype(complex)
    else:
        mass = forms.M
    return forms.K0 + E * mass
