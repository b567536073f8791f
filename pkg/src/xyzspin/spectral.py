"""Liouvillian spectra, PT symmetry of the eigenvalue ladder, and gaps.

For this model the Liouvillian spectrum lies in Re(lambda) <= 0 with a
single zero eigenvalue (the steady state) away from the degenerate
collective-only point.  With purely local dissipation the spectrum is, in
addition, symmetric under reflection about Re(lambda) = -eta with

    eta = N gamma / 2,

i.e. for every eigenvalue lambda there is a partner with real part
-2 eta - Re(lambda) and the same imaginary part.  The reflection pairs the
steady state with the extremal ("antigap") eigenvalue lambda_M = -2 eta and
the slowest decaying mode lambda_1 with lambda_{M-1}, whence

    lambda_{M-1} - lambda_M = lambda_1   (up to the pairing of imaginary parts).

This turns the asymptotic gap into a quantity readable off the *fast* end of
the ladder: for the negated, shifted operator A = -(L + 2 eta) the extremal
eigenvalue lambda_M maps to the origin and lambda_{M-1} to -gap, so the two
largest-real-part Ritz values of A are all that is needed.  The known top
value 0 acts as a built-in certificate: it sits there if and only if the
most-damped eigenvalue of L is exactly -2 eta, i.e. the reflection symmetry
(and the assumed eta) actually holds.
"""

from __future__ import annotations

import dataclasses

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, eigs as sparse_eigs

from .liouvillian import ResourceLimitError, SuperOperator
from .model import ModelParams

__all__ = [
    "SpectrumReport",
    "PTResult",
    "GapResult",
    "SpectralError",
    "SymmetryAssumptionError",
    "full_spectrum",
    "detect_pt",
    "direct_gap",
    "gap_via_antigap",
    "local_dissipation_eta",
]

DENSE_LIMIT = 4096
_ARPACK_SEED = 20240901


class SpectralError(RuntimeError):
    """Eigenvalue computation failed to converge."""


class SymmetryAssumptionError(RuntimeError):
    """The assumed spectral reflection (value of eta) does not hold."""


@dataclasses.dataclass
class PTResult:
    symmetric: bool
    eta: float
    max_deviation: float


@dataclasses.dataclass
class GapResult:
    gap: float
    eta: float
    eigenvalues: np.ndarray  # computed damped-end Ritz values, extremal first
    method: str
    top_deviation: float


@dataclasses.dataclass
class SpectrumReport:
    eigenvalues: np.ndarray  # sorted by |Re| ascending: slowest first
    gap: float
    eta: float
    pt_symmetric: bool
    antigap_pair: tuple[complex, complex]  # (lambda_M, lambda_{M-1})


def local_dissipation_eta(params: ModelParams) -> float:
    """The exact reflection point eta = N gamma / 2 (local dissipation only)."""
    if params.Gamma != 0:
        raise ValueError(
            "eta = N gamma / 2 holds only for purely local dissipation "
            f"(Gamma = {params.Gamma})"
        )
    return params.N * params.gamma / 2.0


def _sorted_slow_first(eigenvalues: np.ndarray) -> np.ndarray:
    e = np.asarray(eigenvalues, dtype=complex)
    order = np.lexsort((e.imag, np.abs(e.real)))
    return e[order]


def full_spectrum(L: SuperOperator, dense_limit: int = DENSE_LIMIT) -> SpectrumReport:
    """Dense spectrum of the whole Liouvillian with gap and PT diagnosis."""
    if L.dim > dense_limit:
        raise ResourceLimitError(
            f"dense spectrum of a {L.dim}-dimensional operator refused "
            f"(limit {dense_limit}); pass dense_limit explicitly to override"
        )
    eigenvalues = _sorted_slow_first(np.linalg.eigvals(L.matrix.toarray()))
    pt = detect_pt(eigenvalues)
    return SpectrumReport(
        eigenvalues=eigenvalues,
        gap=direct_gap(eigenvalues),
        eta=pt.eta,
        pt_symmetric=pt.symmetric,
        antigap_pair=(complex(eigenvalues[-1]), complex(eigenvalues[-2])),
    )


def detect_pt(eigenvalues: np.ndarray, tol: float = 1e-7) -> PTResult:
    """Test whether the spectrum maps to itself under Re -> -2 eta - Re.

    eta is read off the extremal eigenvalue; both the spectrum and its
    reflection are sorted on (Re, Im) rounded to the tolerance grid and
    compared elementwise, so *tol* is a relative tolerance on eigenvalue
    positions at the scale of eta.
    """
    e = np.asarray(eigenvalues, dtype=complex)
    if e.size == 0:
        raise ValueError("empty spectrum")
    eta = -float(e.real.min()) / 2.0
    scale = max(1.0, 2.0 * eta)
    mirrored = (-2.0 * eta - e.real) + 1j * e.imag

    def _order(v: np.ndarray) -> np.ndarray:
        rkey = np.round(v.real / (tol * scale))
        ikey = np.round(v.imag / (tol * scale))
        return v[np.lexsort((ikey, rkey))]

    a = _order(e)
    b = _order(mirrored)
    dev = float(np.max(np.abs(a - b)))
    return PTResult(symmetric=dev <= tol * scale, eta=eta, max_deviation=dev)


def direct_gap(eigenvalues: np.ndarray, zero_tol: float = 1e-9) -> float:
    """|Re lambda_1| of the slowest nonzero mode in a computed spectrum."""
    re = np.asarray(eigenvalues, dtype=complex).real
    if re.size == 0:
        raise ValueError("empty spectrum")
    scale = max(1.0, float(-re.min()))
    nonzero = re[re < -zero_tol * scale]
    if nonzero.size == 0:
        raise ValueError("no decaying mode found (all eigenvalues at zero?)")
    return float(-nonzero.max())


def gap_via_antigap(
    L: SuperOperator,
    eta: float,
    k: int = 6,
    ncv: int | None = None,
    tol: float = 1e-9,
    top_tol: float = 1e-6,
) -> GapResult:
    """Spectral gap read off the reflection-certified damped end of L.

    Computes the *k* largest-real-part eigenvalues of A = -(L + 2 eta) with
    ARPACK (deterministic start vector, growing subspace sizes on
    non-convergence).  Under the reflection these are the mirror images of
    the *k* slowest modes: the extremal eigenvalue lambda_M = -2 eta of L
    maps to 0 and lambda_{M-1} to -gap.  The top Ritz value landing at 0
    certifies that eta and the reflection symmetry are consistent; the gap
    is the distance down to the next distinct real part.

    Raises
    ------
    SymmetryAssumptionError
        If no Ritz value of A lands at 0 within *top_tol* (relative to
        2 eta): either eta is wrong or the spectrum is not
        reflection-symmetric.
    SpectralError
        If ARPACK fails to converge at every subspace size.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    n = L.dim
    if n < 200:
        # dense is cheaper and unconditional at toy sizes
        vals = np.linalg.eigvals((-L.matrix).toarray()) - 2.0 * eta
        order = np.argsort(vals.real)[::-1]
        mirrored = vals[order][: max(k, 2)]
        method = "antigap-dense"
    else:
        A = (-L.matrix - 2.0 * eta * sp.identity(n, dtype=complex, format="csr")).tocsr()
        rng = np.random.default_rng(_ARPACK_SEED)
        v0 = rng.standard_normal(n)
        v0 /= np.linalg.norm(v0)
        base = ncv if ncv is not None else max(40, 4 * k + 2)
        mirrored = None
        last_exc: Exception | None = None
        for factor in (1, 2, 4):
            m = min(n - 1, base * factor)
            if m <= k + 1:
                break
            try:
                vals = sparse_eigs(
                    A, k=k, which="LR", ncv=m, tol=tol, v0=v0,
                    return_eigenvectors=False,
                )
                mirrored = vals[np.argsort(vals.real)[::-1]]
                break
            except (ArpackNoConvergence, ArpackError) as exc:
                last_exc = exc
        if mirrored is None:
            raise SpectralError(
                f"ARPACK did not converge for dim={n} up to ncv={base * 4}"
            ) from last_exc
        method = "antigap-arpack"

    scale = max(1.0, 2.0 * eta)
    top_dev = float(abs(mirrored.real.max()))
    if top_dev > top_tol * scale:
        raise SymmetryAssumptionError(
            f"most-damped eigenvalue sits at {-2 * eta - mirrored.real.max():.6g}, "
            f"not at -2 eta = {-2 * eta:.6g} (deviation {top_dev:.2e}); eta "
            "may be wrong or the reflection symmetry broken"
        )
    re = np.sort(mirrored.real)[::-1]
    distinct_tol = max(10.0 * tol, 1e-8) * scale
    below = re[re < re[0] - distinct_tol]
    if below.size == 0:
        raise SpectralError(
            f"no second distinct real part among k={k} Ritz values; "
            "increase k"
        )
    gap = float(re[0] - below[0])
    return GapResult(
        gap=gap,
        eta=eta,
        eigenvalues=-mirrored - 2.0 * eta,
        method=method,
        top_deviation=top_dev,
    )
