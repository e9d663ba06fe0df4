"""Finite-dimensional C*-algebras as block-diagonal matrix algebras.

A FiniteCStarAlgebra is a direct sum of full matrix algebras, carried in its
ambient faithful representation: M_{n_1} ⊕ … ⊕ M_{n_m} sitting block-diagonally
inside the square matrices of size Σn_i.  The same type models both the
diagonal algebra of a bundle and (with a single block) the ambient algebra.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import DEFAULT_EPS, as_matrix, operator_norm


@dataclass(frozen=True)
class FiniteCStarAlgebra:
    """A direct sum ⊕ M_{n_i}(ℂ) with its block projections.

    The block index set doubles as the pure state space of the algebra: each
    block is one unitary-equivalence class of irreducible representations.
    """

    block_dims: tuple[int, ...]

    def __post_init__(self):
        if len(self.block_dims) == 0:
            raise ValueError("algebra needs at least one block")
        if any(n < 1 for n in self.block_dims):
            raise ValueError(f"block dimensions must be positive: {self.block_dims}")

    @property
    def n_blocks(self) -> int:
        return len(self.block_dims)

    @property
    def ambient_dim(self) -> int:
        return sum(self.block_dims)

    @property
    def block_offsets(self) -> tuple[int, ...]:
        offs = [0]
        for n in self.block_dims[:-1]:
            offs.append(offs[-1] + n)
        return tuple(offs)

    def projection(self, i: int) -> np.ndarray:
        """Orthogonal projection onto the i-th block (rank block_dims[i])."""
        p = np.zeros((self.ambient_dim, self.ambient_dim), dtype=complex)
        o = self.block_offsets[i]
        n = self.block_dims[i]
        p[o : o + n, o : o + n] = np.eye(n)
        return p

    def projections(self) -> list[np.ndarray]:
        return [self.projection(i) for i in range(self.n_blocks)]

    def unit(self) -> np.ndarray:
        """The identity: in finite dimension the approximate unit is exact."""
        return np.eye(self.ambient_dim, dtype=complex)

    def block(self, b, i: int, j: int) -> np.ndarray:
        """The (i, j) block p_i b p_j of an ambient matrix, as a small matrix."""
        a = as_matrix(b)
        oi, oj = self.block_offsets[i], self.block_offsets[j]
        return a[oi : oi + self.block_dims[i], oj : oj + self.block_dims[j]]

    def embed_block(self, i: int, j: int, small) -> np.ndarray:
        """Place a small matrix at block position (i, j) of an ambient matrix."""
        s = as_matrix(small)
        if s.shape != (self.block_dims[i], self.block_dims[j]):
            raise ValueError(
                f"block ({i},{j}) wants shape "
                f"({self.block_dims[i]},{self.block_dims[j]}), got {s.shape}"
            )
        out = np.zeros((self.ambient_dim, self.ambient_dim), dtype=complex)
        oi, oj = self.block_offsets[i], self.block_offsets[j]
        out[oi : oi + s.shape[0], oj : oj + s.shape[1]] = s
        return out

    def compress(self, b) -> np.ndarray:
        """Σ_i p_i b p_i — kill the off-diagonal blocks."""
        a = as_matrix(b)
        out = np.zeros_like(a)
        for o, n in zip(self.block_offsets, self.block_dims):
            out[o : o + n, o : o + n] = a[o : o + n, o : o + n]
        return out

    def contains(self, b, eps: float = DEFAULT_EPS) -> bool:
        """True iff b is block-diagonal for this algebra within eps."""
        a = as_matrix(b)
        d = self.ambient_dim
        if a.shape != (d, d):
            raise ValueError(f"expected shape ({d},{d}), got {a.shape}")
        return operator_norm(a - self.compress(a)) <= eps

    def basis(self) -> list[np.ndarray]:
        """All block matrix units, embedded in the ambient representation."""
        out = []
        for k, n in enumerate(self.block_dims):
            for r in range(n):
                for c in range(n):
                    e = np.zeros((n, n), dtype=complex)
                    e[r, c] = 1.0
                    out.append(self.embed_block(k, k, e))
        return out

    def dim(self) -> int:
        """Linear dimension Σ n_i² of the algebra itself."""
        return sum(n * n for n in self.block_dims)


def make_algebra(block_dims) -> FiniteCStarAlgebra:
    """Build ⊕ M_{n_i}(ℂ) from a list of positive block dimensions."""
    return FiniteCStarAlgebra(tuple(int(n) for n in block_dims))
