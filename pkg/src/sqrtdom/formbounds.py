"""Explicit relative form-bound constants and pointwise bound verification.

The derived constants follow the chain: sliding unit-window norms of the
lower-order coefficients feed a uniform constant ``C0``, which in turn gives
the cubic-in-1/eps bound

    |q_j(f, f)| <= eps * Re q0(f, f) + M eps^-3 ||f||^2,   0 < eps < eps0,

with ``M = 128 C0^2 (lam^-1 + lam^-3)`` and
``eps0 = min(1, 4 lam^-1 eps_qrs)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assembly import CoefficientSet, FormMatrices, IntervalSpec, Mesh

__all__ = [
    "FormBoundConstants",
    "EtaTable",
    "locunif_norms",
    "check_form_bound",
    "check_trudinger",
    "compose_infinitesimal",
]


@dataclass(frozen=True)
class FormBoundConstants:
    """Window norms and the derived bound constants for one coefficient set."""

    C_q: float
    C_r: float
    C_s: float
    C_0: float
    eps_qrs: float
    M: float
    eps_0: float
    window_fallback: bool = False  # window exceeded the domain, whole-domain norms used

    @classmethod
    def from_window_norms(cls, C_q: float, C_r: float, C_s: float,
                          lam: float, window_fallback: bool = False
                          ) -> "FormBoundConstants":
        C_0 = np.sqrt(2.0) * max(1.0, C_r, C_s, np.sqrt(2.0) * C_q ** 2)
        # zero coefficients impose no eps restriction of their own
        candidates = [v for v in (np.sqrt(C_r), np.sqrt(C_s), C_q) if v > 0]
        eps_qrs = min(candidates) if candidates else np.inf
        M = 128.0 * C_0 ** 2 * (1.0 / lam + 1.0 / lam ** 3)
        eps_0 = min(1.0, 4.0 / lam * eps_qrs)
        return cls(C_q=C_q, C_r=C_r, C_s=C_s, C_0=float(C_0),
                   eps_qrs=float(eps_qrs), M=float(M), eps_0=float(eps_0),
                   window_fallback=window_fallback)


def _window_sup(mesh: Mesh, values: np.ndarray, width: float) -> tuple[float, bool]:
    """Sliding-window supremum of the per-cell integral, window starts on nodes.

    Evaluated at mesh-node window starts, so the result is a lower bound of
    the true supremum; falls back to the whole-domain integral (flagged) if
    the window does not fit.
    """
    h = mesh.h
    cell = values * h  # per-cell contributions, midpoint rule
    total = float(np.sum(cell))
    if width >= mesh.b - mesh.a:
        return total, True
    per_window = max(1, int(round(width / h)))
    csum = np.concatenate(([0.0], np.cumsum(cell)))
    n = mesh.n_cells
    sums = csum[per_window:] - csum[: n - per_window + 1]
    return float(np.max(sums)), False


def locunif_norms(coeffs: CoefficientSet, interval: IntervalSpec,
                  mesh: Mesh) -> FormBoundConstants:
    """Unit-window norms of ``|q|``, ``|r|^2``, ``|s|^2`` and derived constants.

    On the (truncated) line the supremum slides a unit window across the
    mesh; on a finite interval the whole-domain norms are used instead.
    """
    width = 1.0 if interval.kind != "finite" else np.inf
    C_q, fb_q = _window_sup(mesh, np.abs(coeffs.q), width)
    C_r, fb_r = _window_sup(mesh, np.abs(coeffs.r) ** 2, width)
    C_s, fb_s = _window_sup(mesh, np.abs(coeffs.s) ** 2, width)
    fallback = interval.kind != "finite" and (fb_q or fb_r or fb_s)
    return FormBoundConstants.from_window_norms(C_q, C_r, C_s, coeffs.lam,
                                                window_fallback=fallback)


def check_form_bound(f: np.ndarray, forms: FormMatrices,
                     constants: FormBoundConstants, eps: float) -> list[dict]:
    """Evaluate both sides of the relative bound for one nodal vector.

    Returns one record per lower-order form ``j`` in {1, 2, 3} with the
    absolute form value, the bound ``eps Re q0 + M eps^-3 ||f||^2`` and the
    slack (nonnegative up to roundoff whenever the constants come from the
    same discrete data).
    """
    if not 0.0 < eps < constants.eps_0:
        raise ValueError(f"eps must lie in (0, {constants.eps_0})")
    f = np.asarray(f, dtype=complex)
    re_q0 = float(np.real(np.vdot(f, forms.K0 @ f)))
    norm2 = float(np.real(np.vdot(f, forms.M @ f)))
    bound = eps * re_q0 + constants.M * eps ** -3 * norm2
    out = []
    for j, K in ((1, forms.K1), (2, forms.K2), (3, forms.K3)):
        lhs = abs(np.vdot(f, K @ f))
        out.append({"j": j, "eps": eps, "lhs": float(lhs),
                    "bound": float(bound), "slack": float(bound - lhs)})
    return out


def check_trudinger(f: np.ndarray, w: np.ndarray, mesh: Mesh,
                    eps: float) -> dict:
    """Pointwise and weighted Trudinger-type bounds on a finite interval.

    Checks ``|f(x)|^2 <= eps ||f'||^2 + ((b-a)^-1 + eps^-1) ||f||^2`` at
    every node and the weighted variant with ``N_w = ||w||^2``; uses exact
    interpolant integrals so the inequality carries over verbatim.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    f = np.asarray(f, dtype=complex)
    h, length = mesh.h, mesh.b - mesh.a
    slopes = np.diff(f) / h
    grad2 = float(np.sum(np.abs(slopes) ** 2) * h)
    fl, fr = f[:-1], f[1:]
    # exact cellwise integral of |linear|^2: h/3 (|a|^2 + Re(conj(a) b) + |b|^2)
    norm2 = float(h / 3.0 * np.sum(np.abs(fl) ** 2 + (np.conj(fl) * fr).real
                                   + np.abs(fr) ** 2))
    rhs_point = eps * grad2 + (1.0 / length + 1.0 / eps) * norm2
    point_slack = rhs_point - float(np.max(np.abs(f) ** 2))

    w = np.asarray(w, dtype=complex)
    N_w = float(np.sum(np.abs(w) ** 2) * h)  # cell-midpoint samples
    fm = 0.5 * (fl + fr)
    wf2 = float(np.sum(np.abs(w * fm) ** 2) * h)
    rhs_weighted = (eps * grad2 + (1.0 / length + 1.0 / eps) * norm2) * N_w
    return {"eps": eps, "max_f2": float(np.max(np.abs(f) ** 2)),
            "point_bound": rhs_point, "point_slack": point_slack,
            "wf2": wf2, "N_w": N_w, "weighted_bound": rhs_weighted,
            "weighted_slack": rhs_weighted - wf2}


@dataclass(frozen=True)
class EtaTable:
    """An eps -> eta(eps) table on a log grid, 32 points per decade."""

    eps: np.ndarray
    eta: np.ndarray

    @classmethod
    def from_function(cls, fn, eps_max: float, decades: float = 4.0,
                      per_decade: int = 32) -> "EtaTable":
        k = int(np.ceil(decades * per_decade))
        eps = eps_max * 10.0 ** (-np.arange(k, -1, -1.0) / per_decade)
        return cls(eps=eps, eta=np.asarray([fn(e) for e in eps], dtype=float))

    def __call__(self, e: float) -> float:
        # log-log interpolation; clamped at the grid ends
        le = np.log(self.eps)
        return float(np.exp(np.interp(np.log(e), le, np.log(self.eta))))


def compose_infinitesimal(eps1: float, eps2: float, eta1: EtaTable,
                          eta2: EtaTable) -> tuple[float, EtaTable]:
    """Combine two infinitesimal form bounds into one for the summed base form.

    Returns ``eps0 = 2 min(1/2, eps1, eps2)`` and the composed table
    ``eta0(eps) = eta1(eps/2) + eta2(eps/2)`` on its valid range.
    """
    if eps1 <= 0 or eps2 <= 0:
        raise ValueError("validity ranges must be positive")
    eps0 = 2.0 * min(0.5, eps1, eps2)
    grid = EtaTable.from_function(lambda e: eta1(e / 2) + eta2(e / 2), eps0)
    return eps0, grid
