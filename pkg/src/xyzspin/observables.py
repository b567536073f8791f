"""Steady-state observables: correlators, entropies, bimodality, susceptibility.

Every routine accepts the state in either representation -- a
:class:`~.dicke.DickeBlockMatrix` (packed symmetric form, the production
path) or a dense product-basis array (the brute-force path used for
cross-checks at small N) -- and returns plain floats.

Conventions (sigma are Pauli matrices, S^a = sum_i sigma^a_i):

* ``spin_structure_factor``: S^aa = (<(S^a)^2> - N) / (N (N-1)),
  the site-averaged two-point correlator sum_{i != j} <sigma^a_i sigma^a_j>
  normalized to [-1, 1]; the order parameter of the ferromagnetic phase.
* ``z_magnetization``: M_z = <S^z> / N in [-1, 1].
* ``entropy`` / ``purity``: von Neumann entropy -Tr rho ln rho (natural log)
  and Tr rho^2 of the *global* N-spin state.
* ``bimodality``: B_c = <(S^a)^2>^2 / <(S^a)^4>, a Binder-style cumulant of
  the collective-magnetization distribution; N/(3N-2) for uncorrelated
  spins, with the crossing of curves at successive N locating the critical
  point.
* ``averaged_susceptibility``: the angle-averaged magnetic response

      chi_av = (1/2pi) \\int d theta |chi(theta)|,

  where chi(theta) is the per-spin response of <n(theta).sigma> to a weak
  transverse field h n(theta) added to the Hamiltonian as
  (h/2) (cos theta S^x + sin theta S^y).  The default implementation
  perturbs the Liouvillian at finite h and resolves the steady state on a
  theta grid; :func:`averaged_susceptibility_linear` obtains the same
  quantity from two linear-response solves against the unperturbed
  factorization (exact h -> 0 limit, and much cheaper on sweeps).
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.sparse as sp
from scipy.special import xlogy

from .dicke import (
    DickeBlockMatrix,
    build_layout,
    collective_operator,
    expectation,
    weighted_functional,
)
from .liouvillian import (
    BorderedSolver,
    SuperOperator,
    _check_residual,
    _unitary_superop,
    _unpack,
    build_full_liouvillian,
    build_symmetric_liouvillian,
    collective_full,
    commutator_superoperator,
)
from .model import OBSERVABLE_NAMES, ModelParams

__all__ = [
    "DegenerateDistribution",
    "ChiLinearityWarning",
    "spin_structure_factor",
    "z_magnetization",
    "entropy",
    "purity",
    "bimodality",
    "chi_tensor",
    "averaged_susceptibility",
    "averaged_susceptibility_linear",
    "compute_report",
]


class DegenerateDistribution(ValueError):
    """Moment ratio undefined: the fourth moment (essentially) vanishes."""


class ChiLinearityWarning(UserWarning):
    """Finite-field susceptibility estimate may sit outside the linear regime."""


def _spin_count(rho) -> int:
    if isinstance(rho, DickeBlockMatrix):
        return rho.layout.N
    n = rho.shape[0]
    N = int(round(np.log2(n)))
    if 2**N != n:
        raise ValueError(f"state dimension {n} is not a power of two")
    return N


def _collective(rho, which: str):
    if isinstance(rho, DickeBlockMatrix):
        return collective_operator(rho.layout, which)
    return collective_full(which, _spin_count(rho))


def _expect(rho, op) -> float:
    if isinstance(rho, DickeBlockMatrix):
        return float(np.real(expectation(op, rho)))
    # Tr(A rho) = sum_ij A_ij rho_ji
    return float(np.real(sp.csr_matrix(op).multiply(rho.T).sum()))


def spin_structure_factor(rho, axis: str = "x") -> float:
    """Normalized equal-time spin structure factor S^aa, a in {x, y, z}."""
    if axis not in ("x", "y", "z"):
        raise ValueError(f"axis must be x, y or z, got {axis!r}")
    N = _spin_count(rho)
    s = _collective(rho, "S" + axis)
    m2 = _expect(rho, s @ s)
    return (m2 - N) / (N * (N - 1))


def z_magnetization(rho) -> float:
    """Per-spin magnetization <sigma^z> = <S^z>/N."""
    return _expect(rho, _collective(rho, "Sz")) / _spin_count(rho)


def _eigenvalue_sum(rho, f) -> float:
    if isinstance(rho, DickeBlockMatrix):
        return float(weighted_functional(rho, f))
    w = np.linalg.eigvalsh(rho)
    if w.min() < -1e-9:
        raise ValueError(f"state has negative eigenvalue {w.min():.3e}")
    return float(np.sum(f(np.clip(w, 0.0, None))))


def entropy(rho) -> float:
    """Von Neumann entropy -Tr rho ln rho of the global state (nats)."""
    return _eigenvalue_sum(rho, lambda w: -xlogy(w, w))


def purity(rho) -> float:
    """Tr rho^2."""
    return _eigenvalue_sum(rho, np.square)


def bimodality(rho, axis: str = "x") -> float:
    """B_c = <(S^a)^2>^2 / <(S^a)^4> (N/(3N-2) for uncorrelated spins)."""
    if axis not in ("x", "y", "z"):
        raise ValueError(f"axis must be x, y or z, got {axis!r}")
    s = _collective(rho, "S" + axis)
    s2 = s @ s
    m2 = _expect(rho, s2)
    m4 = _expect(rho, s2 @ s2)
    if abs(m4) < 1e-300:
        raise DegenerateDistribution(
            "fourth moment of the collective magnetization vanishes"
        )
    return m2 * m2 / m4


# -- susceptibility -----------------------------------------------------


def _transverse_commutators(L: SuperOperator):
    """Superoperators -i [S^a/2, .] for a = x, y in L's representation."""
    if L.basis == "symmetric":
        assert L.layout is not None
        cx = commutator_superoperator(collective_operator(L.layout, "Sx") * 0.5)
        cy = commutator_superoperator(collective_operator(L.layout, "Sy") * 0.5)
    else:
        n = int(round(np.sqrt(L.dim)))
        N = int(round(np.log2(n)))
        cx = _unitary_superop(collective_full("Sx", N) * 0.5, n)
        cy = _unitary_superop(collective_full("Sy", N) * 0.5, n)
    return cx, cy


def chi_tensor(L: SuperOperator, solver: BorderedSolver | None = None) -> np.ndarray:
    """2x2 transverse response tensor chi_ab = Tr[S^a drho_b] / N.

    drho_b solves L drho = i [S^b/2, rho_ss] -- the h -> 0 limit of adding
    (h/2) S^b to the Hamiltonian -- reusing the steady-state factorization.
    """
    if solver is None:
        solver = BorderedSolver(L)
    vec_ss = solver.steady()
    cx, cy = _transverse_commutators(L)
    N = L.params.N
    ops = [_collective_packed(L, "Sx"), _collective_packed(L, "Sy")]
    out = np.empty((2, 2))
    for b, cb in enumerate((cx, cy)):
        delta = solver.response(-(cb @ vec_ss))
        for a, ta in enumerate(ops):
            out[a, b] = float(np.real(ta @ delta)) / N
    return out


def _collective_packed(L: SuperOperator, which: str) -> np.ndarray:
    """Row vector t with t . vec(rho) = Tr[S^which rho]."""
    if L.basis == "symmetric":
        assert L.layout is not None
        op = collective_operator(L.layout, which)
        return np.concatenate([a.T.reshape(-1, order="F") for a in op.blocks])
    n = int(round(np.sqrt(L.dim)))
    N = int(round(np.log2(n)))
    return np.asarray(
        collective_full(which, N).toarray().T.reshape(-1, order="F")
    )


def _theta_grid(n_theta: int) -> np.ndarray:
    return np.arange(n_theta) * (2.0 * np.pi / n_theta)


def averaged_susceptibility_linear(
    params: ModelParams,
    n_theta: int = 64,
    L: SuperOperator | None = None,
    solver: BorderedSolver | None = None,
) -> float:
    """chi_av from the linear-response tensor (exact weak-field limit)."""
    if L is None:
        L = build_symmetric_liouvillian(params)
    T = chi_tensor(L, solver=solver)
    th = _theta_grid(n_theta)
    n = np.stack([np.cos(th), np.sin(th)])
    vals = np.abs(np.einsum("ak,ab,bk->k", n, T, n))
    return float(vals.mean())


def averaged_susceptibility(
    params: ModelParams,
    h: float | None = None,
    n_theta: int = 64,
    basis: str = "symmetric",
    linearity_tol: float = 0.05,
) -> float:
    """chi_av by finite-field steady-state solves on a theta grid.

    The field strength defaults to 1e-3 (gamma + Gamma).  The periodic
    trapezoid rule on *n_theta* equispaced angles is a plain mean.  At two
    angles the response is recomputed at h/2; if the two estimates differ
    by more than *linearity_tol* (relative) a :class:`ChiLinearityWarning`
    is issued -- the caller should shrink h.
    """
    params.require_valid()
    if h is None:
        h = 1e-3 * params.rate_unit
    if h <= 0:
        raise ValueError("h must be positive")
    if basis == "symmetric":
        L0 = build_symmetric_liouvillian(params)
    elif basis == "full":
        L0 = build_full_liouvillian(params)
    else:
        raise ValueError(f"unknown basis {basis!r}")
    cx, cy = _transverse_commutators(L0)
    tx = _collective_packed(L0, "Sx")
    ty = _collective_packed(L0, "Sy")
    N = params.N

    def response(theta: float, field: float) -> float:
        pert = SuperOperator(
            basis=L0.basis,
            dim=L0.dim,
            matrix=(L0.matrix + field * (np.cos(theta) * cx + np.sin(theta) * cy)).tocsr(),
            params=params,
            layout=L0.layout,
        )
        vec = BorderedSolver(pert).steady()
        m = np.real(np.cos(theta) * (tx @ vec) + np.sin(theta) * (ty @ vec))
        return float(m) / (N * field)

    th = _theta_grid(n_theta)
    vals = np.array([response(t, h) for t in th])
    for t in (0.0, np.pi / 2.0):
        idx = int(np.argmin(np.abs(th - t)))
        ref = response(th[idx], h / 2.0)
        denom = max(abs(ref), 1e-12)
        if abs(vals[idx] - ref) / denom > linearity_tol:
            warnings.warn(
                f"chi({th[idx]:.3f}) changes by more than {linearity_tol:.0%} "
                f"when halving h={h:.3e}: not in the linear regime",
                ChiLinearityWarning,
                stacklevel=2,
            )
            break
    return float(np.abs(vals).mean())


# -- one-stop report ----------------------------------------------------


def compute_report(
    params: ModelParams,
    observables: tuple[str, ...] = OBSERVABLE_NAMES,
    tol: float = 1e-12,
    n_theta: int = 64,
) -> dict[str, float]:
    """Steady state plus every requested observable at one parameter point.

    Builds the symmetric-basis Liouvillian once and reuses its
    factorization for the susceptibility.  Returns ``{name: value}`` in the
    order requested; unknown names raise ``ValueError``.
    """
    unknown = [o for o in observables if o not in OBSERVABLE_NAMES]
    if unknown:
        raise ValueError(f"unknown observables: {unknown}")
    L = build_symmetric_liouvillian(params)
    solver = BorderedSolver(L)
    vec = solver.steady()
    _check_residual(L, vec, tol)
    rho = _unpack(L, vec)
    N = params.N
    out: dict[str, float] = {}
    for name in observables:
        if name == "Sxx":
            out[name] = spin_structure_factor(rho, "x")
        elif name == "Syy":
            out[name] = spin_structure_factor(rho, "y")
        elif name == "Mz":
            out[name] = z_magnetization(rho)
        elif name == "entropy_per_spin":
            out[name] = entropy(rho) / N
        elif name == "purity":
            out[name] = purity(rho)
        elif name == "Bc_x":
            out[name] = bimodality(rho, "x")
        elif name == "Bc_y":
            out[name] = bimodality(rho, "y")
        elif name == "chi_av":
            out[name] = averaged_susceptibility_linear(
                params, n_theta=n_theta, L=L, solver=solver
            )
    return out
