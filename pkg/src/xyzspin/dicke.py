"""Permutation-symmetric block algebra over total-spin sectors.

A permutationally invariant operator on N spin-1/2 sites is block-diagonal in
the total-spin ("Dicke") basis |j, m>, with j running from j_min (0 for even
N, 1/2 for odd N) up to N/2, and each j-sector repeated d_j times:

    d_j = (2j+1) N! / ((N/2+j+1)! (N/2-j)!) = C(N, N/2-j) - C(N, N/2-j-1).

Permutational invariance forbids coherences both between different j-sectors
and between degenerate copies of the same sector, so a symmetric density
matrix is fully described by one (2j+1)x(2j+1) block per j -- O(N^3) numbers
instead of 4^N.

Storage convention
------------------
The stored block ``rho_j`` carries the *total* weight of all d_j copies, i.e.
``rho_j = d_j x (per-copy block)``, so that ``sum_j Tr rho_j = 1`` and linear
expectation values need no degeneracy factors.  Nonlinear spectral
functionals recover the per-copy block explicitly:

    f[rho] = sum_j d_j Tr f(rho_j / d_j).

Operator normalization
----------------------
This is the one place where the Pauli-vs-spin-1/2 convention is fixed;
everything else in the package inherits it.  Collective operators are sums
of *Pauli* matrices, S^a = sum_i sigma^a_i, so within a j-block

    Sz |j,m>  = 2m |j,m>,
    S+-       = standard angular-momentum ladders (S+- = J+-, since
                sigma+- = (sigma^x +- i sigma^y)/2 has unit matrix elements),
    Sx        = S+ + S-,      Sy = -i (S+ - S-),

giving [Sz, S+-] = +-2 S+- and [S+, S-] = Sz.  Mixing this with the
spin-1/2 normalization (eigenvalues +-1/2) is the classic implementation
error; the ladder identities above are property-tested.

m-ordering is descending, m = j, j-1, ..., -j, so lowering m moves one step
down/right in the block.  Half-integers are avoided internally by storing 2j
(``twice_j``) and 2m as exact integers.
"""

from __future__ import annotations

import dataclasses
import functools
import io
import math
from typing import Callable, Iterable

import numpy as np

__all__ = [
    "Block",
    "BlockLayout",
    "DickeBlockMatrix",
    "build_layout",
    "degeneracy",
    "collective_operator",
    "expectation",
    "weighted_functional",
    "all_down",
    "maximally_mixed",
    "expand_full",
    "project_symmetric",
    "dump_block_matrix",
    "load_block_matrix",
]

#: Hard cap for product-basis embeddings (2^N x 2^N dense intermediates).
EMBED_MAX_N = 12


def degeneracy(N: int, twice_j: int) -> int:
    """Multiplicity d_j of the spin-j sector for N spins, exact integer."""
    k = (N - twice_j) // 2
    d = math.comb(N, k)
    if k >= 1:
        d -= math.comb(N, k - 1)
    return d


@dataclasses.dataclass(frozen=True)
class Block:
    twice_j: int
    degeneracy: int
    offset: int  # start of this block in the packed column-stacked vector

    @property
    def dim(self) -> int:
        return self.twice_j + 1

    @property
    def j(self) -> float:
        return self.twice_j / 2.0

    def m_values(self) -> np.ndarray:
        """2m as integers, descending: 2j, 2j-2, ..., -2j."""
        return np.arange(self.twice_j, -self.twice_j - 1, -2)


@dataclasses.dataclass(frozen=True)
class BlockLayout:
    """Ordered block structure (j descending from N/2) for N spins."""

    N: int
    blocks: tuple[Block, ...]

    @property
    def packed_length(self) -> int:
        last = self.blocks[-1]
        return last.offset + last.dim**2

    def block_index(self, twice_j: int) -> int:
        idx = (self.blocks[0].twice_j - twice_j) // 2
        if not (0 <= idx < len(self.blocks)) or self.blocks[idx].twice_j != twice_j:
            raise KeyError(f"no block with 2j = {twice_j}")
        return idx

    def __iter__(self) -> Iterable[Block]:
        return iter(self.blocks)


@functools.lru_cache(maxsize=None)
def build_layout(N: int) -> BlockLayout:
    """Block layout for N spins, with exact integer degeneracies.

    j descends from N/2 to j_min in unit steps; within each block m descends
    from j to -j.  Degeneracies satisfy ``sum_j d_j (2j+1) = 2^N`` exactly
    (big-integer arithmetic; the identity is asserted here for every N).
    """
    if not isinstance(N, int) or N < 1:
        raise ValueError(f"N must be a positive integer, got {N!r}")
    blocks = []
    offset = 0
    for twice_j in range(N, -1 if N % 2 == 0 else 0, -2):
        d = degeneracy(N, twice_j)
        blocks.append(Block(twice_j=twice_j, degeneracy=d, offset=offset))
        offset += (twice_j + 1) ** 2
    layout = BlockLayout(N=N, blocks=tuple(blocks))
    assert sum(b.degeneracy * b.dim for b in blocks) == 2**N
    return layout


class DickeBlockMatrix:
    """Block-diagonal operator over the Dicke sectors of a :class:`BlockLayout`.

    Thin wrapper around a list of dense complex blocks with the algebra
    needed downstream (adjoint, products, trace, packing).  Blocks are dense:
    each is at most (N+1)x(N+1) and the Hermitian eigen-solves of
    :func:`weighted_functional` want dense input anyway.
    """

    def __init__(self, layout: BlockLayout, blocks: list[np.ndarray] | None = None):
        self.layout = layout
        if blocks is None:
            blocks = [np.zeros((b.dim, b.dim), dtype=complex) for b in layout]
        else:
            blocks = [np.asarray(b, dtype=complex) for b in blocks]
            for arr, blk in zip(blocks, layout):
                if arr.shape != (blk.dim, blk.dim):
                    raise ValueError(
                        f"block 2j={blk.twice_j} must have shape "
                        f"({blk.dim}, {blk.dim}), got {arr.shape}"
                    )
        self.blocks = blocks

    # -- basic algebra -------------------------------------------------

    def copy(self) -> "DickeBlockMatrix":
        return DickeBlockMatrix(self.layout, [b.copy() for b in self.blocks])

    def dag(self) -> "DickeBlockMatrix":
        return DickeBlockMatrix(self.layout, [b.conj().T.copy() for b in self.blocks])

    def trace(self) -> complex:
        return complex(sum(np.trace(b) for b in self.blocks))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(np.allclose(b, b.conj().T, atol=tol) for b in self.blocks)

    def _require_same_layout(self, other: "DickeBlockMatrix") -> None:
        if other.layout.N != self.layout.N:
            raise ValueError(
                f"layout mismatch: N = {self.layout.N} vs {other.layout.N}"
            )

    def __matmul__(self, other: "DickeBlockMatrix") -> "DickeBlockMatrix":
        self._require_same_layout(other)
        return DickeBlockMatrix(
            self.layout, [a @ b for a, b in zip(self.blocks, other.blocks)]
        )

    def __add__(self, other: "DickeBlockMatrix") -> "DickeBlockMatrix":
        self._require_same_layout(other)
        return DickeBlockMatrix(
            self.layout, [a + b for a, b in zip(self.blocks, other.blocks)]
        )

    def __sub__(self, other: "DickeBlockMatrix") -> "DickeBlockMatrix":
        self._require_same_layout(other)
        return DickeBlockMatrix(
            self.layout, [a - b for a, b in zip(self.blocks, other.blocks)]
        )

    def __mul__(self, scalar: complex) -> "DickeBlockMatrix":
        return DickeBlockMatrix(self.layout, [scalar * b for b in self.blocks])

    __rmul__ = __mul__

    # -- packing (column-stacked per block, the solver convention) -----

    def packed(self) -> np.ndarray:
        """Concatenated per-block column-stacked vector (complex 1-D)."""
        return np.concatenate([b.flatten(order="F") for b in self.blocks])

    @classmethod
    def from_packed(cls, layout: BlockLayout, vec: np.ndarray) -> "DickeBlockMatrix":
        vec = np.asarray(vec, dtype=complex)
        if vec.shape != (layout.packed_length,):
            raise ValueError(
                f"packed vector must have length {layout.packed_length}, "
                f"got {vec.shape}"
            )
        blocks = [
            vec[b.offset : b.offset + b.dim**2].reshape((b.dim, b.dim), order="F")
            for b in layout
        ]
        return cls(layout, blocks)


# -- canonical states ---------------------------------------------------


def all_down(layout: BlockLayout) -> DickeBlockMatrix:
    """Product state with every spin down: |N/2, -N/2><N/2, -N/2|."""
    rho = DickeBlockMatrix(layout)
    rho.blocks[0][-1, -1] = 1.0
    return rho


def maximally_mixed(layout: BlockLayout) -> DickeBlockMatrix:
    """The 2^N-dimensional maximally mixed state in stored-block form."""
    N = layout.N
    rho = DickeBlockMatrix(layout)
    for i, blk in enumerate(layout):
        rho.blocks[i] = (blk.degeneracy / 2.0**N) * np.eye(blk.dim, dtype=complex)
    return rho


# -- collective operators ----------------------------------------------


def _ladder_plus_block(twice_j: int) -> np.ndarray:
    """S+ within one block, m-descending: entry [k-1, k] raises m."""
    dim = twice_j + 1
    sp = np.zeros((dim, dim), dtype=complex)
    tm = np.arange(twice_j, -twice_j - 1, -2)
    for k in range(1, dim):
        # sqrt(j(j+1) - m(m+1)) with 2j, 2m integer arithmetic inside
        val = 0.5 * math.sqrt(twice_j * (twice_j + 2) - tm[k] * (tm[k] + 2))
        sp[k - 1, k] = val
    return sp


def collective_operator(layout: BlockLayout, which: str) -> DickeBlockMatrix:
    """One of Sx, Sy, Sz, S+, S- as a block-diagonal matrix.

    Pauli normalization throughout (see module docstring): Sz has integer
    eigenvalues 2m, S+- are the standard ladders, Sx = S+ + S-,
    Sy = -i (S+ - S-).  Sx, Sy, Sz are exactly Hermitian by construction.
    """
    out = DickeBlockMatrix(layout)
    for i, blk in enumerate(layout):
        if which == "Sz":
            out.blocks[i] = np.diag(blk.m_values().astype(complex))
            continue
        sp = _ladder_plus_block(blk.twice_j)
        if which == "S+":
            out.blocks[i] = sp
        elif which == "S-":
            out.blocks[i] = sp.conj().T
        elif which == "Sx":
            out.blocks[i] = sp + sp.conj().T
        elif which == "Sy":
            out.blocks[i] = -1j * (sp - sp.conj().T)
        else:
            raise ValueError(f"unknown operator {which!r}")
    return out


def total_spin_squared(layout: BlockLayout) -> DickeBlockMatrix:
    """S^2 = (Sx)^2 + (Sy)^2 + (Sz)^2; eigenvalue 2j(2j+2) on sector j."""
    out = DickeBlockMatrix(layout)
    for i, blk in enumerate(layout):
        out.blocks[i] = blk.twice_j * (blk.twice_j + 2) * np.eye(blk.dim, dtype=complex)
    return out


# -- traces and functionals --------------------------------------------


def expectation(rho: DickeBlockMatrix, op: DickeBlockMatrix) -> complex:
    """sum_j Tr(rho_j op_j).

    In the stored-block convention the degeneracy is already folded into
    rho_j, so no d_j factors appear here.
    """
    rho._require_same_layout(op)
    total = 0.0 + 0.0j
    for a, b in zip(rho.blocks, op.blocks):
        total += np.sum(a.T * b)  # Tr(a b) without forming the product
    return complex(total)


def weighted_functional(
    rho: DickeBlockMatrix,
    f: Callable[[np.ndarray], np.ndarray],
    psd_tol: float = 1e-9,
) -> float:
    """Degeneracy-weighted spectral functional sum_j d_j Tr f(rho_j / d_j).

    *f* is applied to the (clipped to >= 0) eigenvalue array of each
    per-copy block; with f(x) = -x ln x this is the Von Neumann entropy of
    the full 2^N-spin state, with f(x) = x^2 the purity.

    Raises
    ------
    ValueError
        If any per-copy block has an eigenvalue below ``-psd_tol``.
    """
    total = 0.0
    for arr, blk in zip(rho.blocks, rho.layout):
        w = np.linalg.eigvalsh(arr / blk.degeneracy)
        if w.min() < -psd_tol:
            raise ValueError(
                f"block 2j={blk.twice_j} violates positivity: "
                f"min eigenvalue {w.min():.3e}"
            )
        total += blk.degeneracy * float(np.sum(f(np.clip(w, 0.0, None))))
    return total


# -- product-basis embedding (the oracle bridge) ------------------------
#
# The isometries below identify each degenerate copy of sector j inside the
# full 2^N product space, built by coupling one spin-1/2 at a time with
# Clebsch-Gordan coefficients.  Any orthonormal choice of the multiplicity
# bases gives the same embedding/projection (copies enter symmetrically),
# so the CG sign convention is immaterial.


@functools.lru_cache(maxsize=None)
def _coupling_isometries(N: int) -> dict[int, list[np.ndarray]]:
    """twice_j -> list of d_j orthonormal maps C^(2j+1) -> C^(2^N).

    Column m-ordering matches the block convention (descending).  The new
    spin is appended as the least significant qubit; |0> is up (sigma_z = +1).
    """
    if N > EMBED_MAX_N:
        raise ValueError(f"product-basis embedding limited to N <= {EMBED_MAX_N}")
    iso: dict[int, list[np.ndarray]] = {1: [np.eye(2, dtype=complex)]}
    for n in range(2, N + 1):
        nxt: dict[int, list[np.ndarray]] = {}
        for tj, vs in iso.items():
            for V in vs:
                up = _couple_up(V, tj)
                nxt.setdefault(tj + 1, []).append(up)
                if tj >= 1:
                    nxt.setdefault(tj - 1, []).append(_couple_down(V, tj))
        iso = nxt
    for tj, vs in iso.items():
        assert len(vs) == degeneracy(N, tj)
    return iso


def _couple_up(V: np.ndarray, tj: int) -> np.ndarray:
    """Couple spin-1/2 to a spin-(tj/2) rest, total 2j' = tj + 1."""
    dim_old, dim_new = tj + 1, tj + 2
    out = np.zeros((2 * V.shape[0], dim_new), dtype=complex)
    for knew in range(dim_new):
        tm = (tj + 1) - 2 * knew  # 2m of the new state, descending
        # |j+1/2, m> = a |j, m-1/2>|up> + b |j, m+1/2>|down>
        a2 = (tj + tm + 1) / (2.0 * (tj + 1))  # (j + m + 1/2)/(2j+1)
        b2 = (tj - tm + 1) / (2.0 * (tj + 1))  # (j - m + 1/2)/(2j+1)
        k_hi = (tj - (tm - 1)) // 2  # index of m-1/2 in the old block
        k_lo = (tj - (tm + 1)) // 2  # index of m+1/2
        if 0 <= k_hi < dim_old and a2 > 0:
            out[0::2, knew] += math.sqrt(a2) * V[:, k_hi]
        if 0 <= k_lo < dim_old and b2 > 0:
            out[1::2, knew] += math.sqrt(b2) * V[:, k_lo]
    return out


def _couple_down(V: np.ndarray, tj: int) -> np.ndarray:
    """Couple spin-1/2 to a spin-(tj/2) rest, total 2j' = tj - 1."""
    dim_old, dim_new = tj + 1, tj
    out = np.zeros((2 * V.shape[0], dim_new), dtype=complex)
    for knew in range(dim_new):
        tm = (tj - 1) - 2 * knew
        # |j-1/2, m> = -b |j, m-1/2>|up> + a |j, m+1/2>|down>
        a2 = (tj + tm + 1) / (2.0 * (tj + 1))
        b2 = (tj - tm + 1) / (2.0 * (tj + 1))
        k_hi = (tj - (tm - 1)) // 2
        k_lo = (tj - (tm + 1)) // 2
        if 0 <= k_hi < dim_old and b2 > 0:
            out[0::2, knew] -= math.sqrt(b2) * V[:, k_hi]
        if 0 <= k_lo < dim_old and a2 > 0:
            out[1::2, knew] += math.sqrt(a2) * V[:, k_lo]
    return out


def expand_full(rho: DickeBlockMatrix) -> np.ndarray:
    """Embed into the full 2^N product basis.

    Each of the d_j degenerate copies receives the per-copy block
    rho_j / d_j (uniform distribution over copies -- the convention
    consistent with :func:`weighted_functional`).
    """
    N = rho.layout.N
    iso = _coupling_isometries(N)
    full = np.zeros((2**N, 2**N), dtype=complex)
    for arr, blk in zip(rho.blocks, rho.layout):
        per_copy = arr / blk.degeneracy
        for V in iso[blk.twice_j]:
            full += V @ per_copy @ V.conj().T
    return full


def project_symmetric(X: np.ndarray, layout: BlockLayout) -> DickeBlockMatrix:
    """Project a full product-basis operator onto stored block form.

    The stored block sums over degenerate copies,
    ``rho_j[m, m'] = sum_alpha <j,m,alpha| X |j,m',alpha>``, which makes
    this the exact left inverse of :func:`expand_full`.
    """
    iso = _coupling_isometries(layout.N)
    out = DickeBlockMatrix(layout)
    for i, blk in enumerate(layout):
        acc = np.zeros((blk.dim, blk.dim), dtype=complex)
        for V in iso[blk.twice_j]:
            acc += V.conj().T @ X @ V
        out.blocks[i] = acc
    return out


# -- serialization ------------------------------------------------------


def dump_block_matrix(rho: DickeBlockMatrix) -> bytes:
    """Binary dump: N plus per-block row-major complex data."""
    buf = io.BytesIO()
    np.savez(
        buf,
        N=np.int64(rho.layout.N),
        **{f"block_{blk.twice_j}": arr for arr, blk in zip(rho.blocks, rho.layout)},
    )
    return buf.getvalue()


def load_block_matrix(data: bytes) -> DickeBlockMatrix:
    with np.load(io.BytesIO(data)) as npz:
        layout = build_layout(int(npz["N"]))
        blocks = [np.array(npz[f"block_{blk.twice_j}"]) for blk in layout]
    return DickeBlockMatrix(layout, blocks)
