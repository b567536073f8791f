"""Gutzwiller mean-field treatment of the dissipative all-to-all XYZ model.

The Gutzwiller ansatz factorizes the density matrix into identical single-site
states, reducing the Lindblad dynamics to three coupled equations for the
Bloch vector ``(sx, sy, sz) = (<sigma_x>, <sigma_y>, <sigma_z>)``:

    d sx/dt = 2 (Jy - Jz) sy sz - (gt/2) sx + (Gamma/2) sx sz
    d sy/dt = 2 (Jz - Jx) sx sz - (gt/2) sy + (Gamma/2) sy sz
    d sz/dt = 2 (Jx - Jy) sx sy - gt (sz + 1) - (Gamma/2) (sx^2 + sy^2)

with the dressed local rate ``gt = gamma + Gamma/(N-1)``.  ``N = math.inf``
is accepted as a thermodynamic-limit sentinel meaning ``gt = gamma``.

For purely local dissipation (Gamma = 0) the steady states are available in
closed form: a paramagnetic branch (0, 0, -1) at any coupling, and a
ferromagnetic pair bifurcating from it when

    -gamma^2 / 16 > (Jx - Jz) (Jy - Jz)

holds strictly (the boundary itself is classified paramagnetic: the order
parameter vanishes there).  Only the non-negative-sx member of the
ferromagnetic pair is reported; its partner follows from the Z2 symmetry
(sx, sy) -> (-sx, -sy) of the equations of motion.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np
from scipy.integrate import solve_ivp

from .model import ModelParams

__all__ = [
    "MeanFieldState",
    "MfBranch",
    "MeanFieldConvergenceError",
    "gamma_tilde",
    "mf_rhs",
    "mf_jacobian",
    "mf_steady_state_numeric",
    "mf_steady_state_local_closed_form",
    "mf_is_ferromagnetic",
    "mf_phase_boundary",
    "mf_entropy_per_spin",
    "mf_reference",
]

#: Default symmetry-broken seed used to land on the ferromagnetic branch.
FM_SEED = (0.1, 0.1, -0.9)

_BLOCH_SLACK = 1e-9


class MeanFieldConvergenceError(RuntimeError):
    """Long-time integration failed to settle; carries the last state."""

    def __init__(self, message: str, last_state: "MeanFieldState"):
        super().__init__(message)
        self.last_state = last_state


@dataclasses.dataclass(frozen=True)
class MeanFieldState:
    """Bloch vector of the Gutzwiller ansatz.

    The same type doubles as a time-derivative (the return of
    :func:`mf_rhs`), so the Bloch-ball constraint ``|s| <= 1`` is *not*
    enforced at construction; callers that need a physical state use
    :meth:`require_physical`.
    """

    sx: float
    sy: float
    sz: float

    def as_array(self) -> np.ndarray:
        return np.array([self.sx, self.sy, self.sz], dtype=float)

    @property
    def norm(self) -> float:
        return math.sqrt(self.sx**2 + self.sy**2 + self.sz**2)

    def require_physical(self) -> "MeanFieldState":
        if self.norm > 1.0 + _BLOCH_SLACK:
            raise ValueError(f"Bloch vector has length {self.norm} > 1")
        return self

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "MeanFieldState":
        return cls(float(arr[0]), float(arr[1]), float(arr[2]))


@dataclasses.dataclass(frozen=True)
class MfBranch:
    """One steady-state branch: kind, Bloch vector, entropy per spin."""

    kind: str  # "paramagnetic" | "ferromagnetic"
    state: MeanFieldState
    entropy_per_spin: float


def gamma_tilde(params: ModelParams) -> float:
    """Dressed local rate gt = gamma + Gamma/(N-1); gamma at N = inf."""
    if params.is_thermodynamic:
        return params.gamma
    return params.gamma + params.Gamma / (params.N - 1)


def _rhs_array(s: np.ndarray, params: ModelParams, gt: float) -> np.ndarray:
    sx, sy, sz = s
    G = params.Gamma
    return np.array(
        [
            2.0 * (params.Jy - params.Jz) * sy * sz - 0.5 * gt * sx + 0.5 * G * sx * sz,
            2.0 * (params.Jz - params.Jx) * sx * sz - 0.5 * gt * sy + 0.5 * G * sy * sz,
            2.0 * (params.Jx - params.Jy) * sx * sy
            - gt * (sz + 1.0)
            - 0.5 * G * (sx * sx + sy * sy),
        ]
    )


def mf_rhs(state: MeanFieldState, params: ModelParams) -> MeanFieldState:
    """Time derivative of the Bloch vector under the mean-field equations."""
    gt = gamma_tilde(params)
    return MeanFieldState.from_array(_rhs_array(state.as_array(), params, gt))


def mf_jacobian(state: MeanFieldState, params: ModelParams) -> np.ndarray:
    """Analytic 3x3 Jacobian of :func:`mf_rhs` at *state*."""
    gt = gamma_tilde(params)
    G = params.Gamma
    sx, sy, sz = state.sx, state.sy, state.sz
    a = 2.0 * (params.Jy - params.Jz)
    b = 2.0 * (params.Jz - params.Jx)
    c = 2.0 * (params.Jx - params.Jy)
    return np.array(
        [
            [-0.5 * gt + 0.5 * G * sz, a * sz, a * sy + 0.5 * G * sx],
            [b * sz, -0.5 * gt + 0.5 * G * sz, b * sx + 0.5 * G * sy],
            [c * sy - G * sx, c * sx - G * sy, -gt],
        ]
    )


def mf_steady_state_numeric(
    params: ModelParams,
    init: MeanFieldState = MeanFieldState(*FM_SEED),
    tol: float = 1e-10,
    max_doublings: int = 8,
) -> MeanFieldState:
    """Steady state by long-time integration followed by Newton polish.

    Integrates the mean-field equations from *init* until the residual
    ``||rhs||_inf`` drops below ``sqrt(tol)``, doubling the time horizon up
    to ``max_doublings`` times, then polishes with Newton iterations using
    the analytic Jacobian.  Whichever branch attracts *init* is the one
    returned; a symmetry-broken *init* (the default) is required to land on
    the ferromagnetic branch where it exists.

    Raises
    ------
    MeanFieldConvergenceError
        If the step budget is exhausted; the exception carries the last state.
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    gt = gamma_tilde(params)
    rate = max(gt, params.Gamma, 1e-12)
    s = init.as_array()
    horizon = 50.0 / rate
    coarse = math.sqrt(tol)
    for _ in range(max_doublings + 1):
        sol = solve_ivp(
            lambda _t, y: _rhs_array(y, params, gt),
            (0.0, horizon),
            s,
            method="LSODA",
            rtol=1e-10,
            atol=1e-12,
        )
        s = sol.y[:, -1]
        if np.max(np.abs(_rhs_array(s, params, gt))) < coarse:
            break
        horizon *= 2.0
    else:
        raise MeanFieldConvergenceError(
            "mean-field integration did not settle within the step budget",
            MeanFieldState.from_array(s),
        )

    # Newton polish: a handful of steps suffices this close to the fixed point.
    state = MeanFieldState.from_array(s)
    for _ in range(50):
        resid = _rhs_array(s, params, gt)
        if np.max(np.abs(resid)) < tol:
            return MeanFieldState.from_array(s)
        jac = mf_jacobian(MeanFieldState.from_array(s), params)
        try:
            step = np.linalg.solve(jac, -resid)
        except np.linalg.LinAlgError:
            break
        s = s + step
    if np.max(np.abs(_rhs_array(s, params, gt))) < tol:
        return MeanFieldState.from_array(s)
    raise MeanFieldConvergenceError(
        "Newton polish failed to reach tolerance", state
    )


def mf_is_ferromagnetic(params: ModelParams) -> bool:
    """Whether the mean-field steady state breaks the Z2 symmetry.

    For Gamma = 0 this is the closed-form instability condition
    ``-gamma^2/16 > (Jx - Jz)(Jy - Jz)`` (strict: the boundary is
    paramagnetic).  For Gamma > 0 no closed form is used; the decision is
    delegated to :func:`mf_steady_state_numeric` from a symmetry-broken seed.
    """
    if params.Gamma == 0:
        return -params.gamma**2 / 16.0 > (params.Jx - params.Jz) * (
            params.Jy - params.Jz
        )
    state = mf_steady_state_numeric(params)
    return state.sx**2 + state.sy**2 > 1e-6


def mf_steady_state_local_closed_form(params: ModelParams) -> list[MfBranch]:
    """Closed-form steady-state branches for purely local dissipation.

    Always returns the paramagnetic branch (0, 0, -1).  When the instability
    condition holds strictly, additionally returns the ferromagnetic branch

        sz = -(gamma/4) / sqrt((Jy - Jz)(Jz - Jx)),
        sx^2 = 2 sz (sz + 1) (Jy - Jz)/(Jx - Jy),

    reporting the non-negative-sx root; sy then follows exactly from the
    stationarity of the z-equation, ``sx sy = gamma (sz + 1)/(2 (Jx - Jy))``.

    Raises
    ------
    ValueError
        If Gamma != 0, or on an internally inconsistent intermediate (the
        square-root argument non-positive while the instability condition
        claims a ferromagnet).
    """
    if params.Gamma != 0:
        raise ValueError("closed-form branches require Gamma = 0")
    pm = MfBranch(
        "paramagnetic", MeanFieldState(0.0, 0.0, -1.0), 0.0
    )
    branches = [pm]
    if not mf_is_ferromagnetic(params):
        return branches

    prod = (params.Jy - params.Jz) * (params.Jz - params.Jx)
    if prod <= 0:
        raise ValueError(
            "inconsistent ferromagnetic branch: (Jy-Jz)(Jz-Jx) <= 0 "
            "while the instability condition holds"
        )
    sz = -(params.gamma / 4.0) / math.sqrt(prod)
    sxx = 2.0 * sz * (sz + 1.0) * (params.Jy - params.Jz) / (params.Jx - params.Jy)
    if not (sxx > 0) or math.isnan(sxx):
        raise ValueError(
            f"inconsistent ferromagnetic branch: sx^2 = {sxx} not positive"
        )
    sx = math.sqrt(sxx)
    sy = params.gamma * (sz + 1.0) / (2.0 * (params.Jx - params.Jy) * sx)
    state = MeanFieldState(sx, sy, sz).require_physical()
    branches.append(MfBranch("ferromagnetic", state, mf_entropy_per_spin(state)))
    return branches


def mf_phase_boundary(
    Jx_grid: list[float] | np.ndarray, Jz: float, gamma: float
) -> list[tuple[float, float]]:
    """Critical Jy along a grid of Jx, for purely local dissipation.

    Solves the equality case of the instability condition:
    ``Jy_c = Jz - gamma^2 / (16 (Jx - Jz))``.

    Raises
    ------
    ValueError
        If any grid point has Jx = Jz (the boundary runs off to infinity).
    """
    out = []
    for jx in Jx_grid:
        if jx == Jz:
            raise ValueError(f"singular boundary at Jx = Jz = {Jz}")
        out.append((float(jx), Jz - gamma**2 / (16.0 * (jx - Jz))))
    return out


def mf_entropy_per_spin(state: MeanFieldState) -> float:
    """Von Neumann entropy (natural log) of the single-site MF state.

    The single-site eigenvalues are ``(1 +/- J)/2`` with J the Bloch-vector
    length, so the entropy per spin depends on J alone: ln 2 at J = 0
    (maximally mixed), 0 at J = 1 (pure).
    """
    J = state.norm
    if J > 1.0 + _BLOCH_SLACK:
        raise ValueError(f"Bloch vector has length {J} > 1")
    J = min(J, 1.0)
    s = 0.0
    for p in ((1.0 + J) / 2.0, (1.0 - J) / 2.0):
        if p > 0.0:
            s -= p * math.log(p)
    return s


def mf_reference(params: ModelParams) -> dict[str, float]:
    """Mean-field reference values (Sxx, Mz, entropy per spin) for *params*.

    Uses the closed form when Gamma = 0 (N-independent), otherwise the
    numeric steady state at the given N -- the reference then depends on N
    through the dressed rate and must be recomputed per point.  The branch
    reported is the stable one reached from the symmetry-broken seed.
    """
    if params.Gamma == 0:
        branches = mf_steady_state_local_closed_form(params)
        branch = branches[-1]  # FM when present, else PM
    else:
        state = mf_steady_state_numeric(params)
        kind = "ferromagnetic" if state.sx**2 + state.sy**2 > 1e-6 else "paramagnetic"
        branch = MfBranch(kind, state, mf_entropy_per_spin(state))
    s = branch.state
    return {
        "branch": branch.kind,
        "sx": s.sx,
        "sy": s.sy,
        "sz": s.sz,
        "Sxx_mf": s.sx**2,
        "Syy_mf": s.sy**2,
        "Mz_mf": s.sz,
        "entropy_per_spin_mf": branch.entropy_per_spin,
    }
