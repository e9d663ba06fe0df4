"""Spatial automorphisms, covariance groups and dynamical checks.

A spatial automorphism pairs a base permutation f0 with one unitary per point
and assembles to a block-permutation unitary U whose nonzero blocks sit
exactly on the graph of f0 (the covariance condition).  Iterating one such
automorphism over a cyclic base flow gives a covariance group, the discrete
stand-in for a 1-parameter group.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Re-exported: the twist machinery lives in .cocycle to avoid an import cycle
# with the bundle module.
from .cocycle import (  # noqa: F401
    Cocycle2,
    NotATwistError,
    cocycle_identity_check,
    cocycle_identity_residual,
    extract_cocycle,
)
from .algebra import FiniteCStarAlgebra
from .fellbundle import FellBundleModel, diagonal_algebra, is_saturated
from .groupoid import Bisection, CyclicFlow, cyclic_flow, is_minimal_flow
from .linalg import (
    DEFAULT_EPS,
    as_matrix,
    haar_unitary,
    is_partial_isometry,
    is_unitary,
    orthonormal_span_basis,
    span_dimension,
)
from .subalgebra import Slice, is_normalizer, normalizer_support


class CovarianceError(ValueError):
    """Fibre data incompatible with the base permutation."""


@dataclass(frozen=True)
class SpatialAutomorphism:
    """(f0, {w_x}) with w_x : fibre at x → fibre at f0(x), all unitary.

    The assembled U has block (f0(x), x) equal to w_x; conjugation by U maps
    the diagonal algebra onto itself.
    """

    f0: Bisection
    fibre_maps: tuple[np.ndarray, ...]
    fibre_dims: tuple[int, ...]

    @property
    def U(self) -> np.ndarray:
        A = FiniteCStarAlgebra(self.fibre_dims)
        out = np.zeros((A.ambient_dim, A.ambient_dim), dtype=complex)
        for x, w in enumerate(self.fibre_maps):
            out += A.embed_block(self.f0(x), x, w)
        return out


def make_spatial_automorphism(
    f0: Bisection,
    fibre_maps,
    fibre_dims,
    eps: float = DEFAULT_EPS,
) -> SpatialAutomorphism:
    """Validate and assemble a spatial automorphism."""
    dims = tuple(int(n) for n in fibre_dims)
    if f0.n_points != len(dims):
        raise CovarianceError(
            f"base permutation on {f0.n_points} points vs {len(dims)} fibres"
        )
    maps = []
    for x in range(len(dims)):
        if dims[x] != dims[f0(x)]:
            raise CovarianceError(
                f"fibre dims {dims[x]} at {x} and {dims[f0(x)]} at f0({x})={f0(x)} "
                "differ; a non-trivial base map needs matching dimensions"
            )
        w = as_matrix(fibre_maps[x])
        if w.shape != (dims[f0(x)], dims[x]) or not is_unitary(w, eps):
            raise CovarianceError(f"fibre map at {x} is not a unitary of the right shape")
        maps.append(w)
    return SpatialAutomorphism(f0=f0, fibre_maps=tuple(maps), fibre_dims=dims)


def identity_automorphism(fibre_dims) -> SpatialAutomorphism:
    dims = tuple(int(n) for n in fibre_dims)
    return SpatialAutomorphism(
        f0=Bisection(tuple(range(len(dims)))),
        fibre_maps=tuple(np.eye(n, dtype=complex) for n in dims),
        fibre_dims=dims,
    )


def compose_automorphisms(
    s: SpatialAutomorphism, t: SpatialAutomorphism
) -> SpatialAutomorphism:
    """Apply t first, then s: base = s.f0 ∘ t.f0, U = s.U · t.U."""
    if s.fibre_dims != t.fibre_dims:
        raise CovarianceError("automorphisms over different bundles")
    f0 = s.f0.compose(t.f0)
    maps = tuple(
        s.fibre_maps[t.f0(x)] @ t.fibre_maps[x] for x in range(len(s.fibre_dims))
    )
    return SpatialAutomorphism(f0=f0, fibre_maps=maps, fibre_dims=s.fibre_dims)


def automorphism_power(s: SpatialAutomorphism, m: int) -> SpatialAutomorphism:
    if m < 1:
        raise ValueError("power must be ≥ 1")
    out = s
    for _ in range(m - 1):
        out = compose_automorphisms(out, s)
    return out


def inverse_automorphism(s: SpatialAutomorphism) -> SpatialAutomorphism:
    f0i = s.f0.inverse()
    maps = tuple(s.fibre_maps[f0i(x)].conj().T for x in range(len(s.fibre_dims)))
    return SpatialAutomorphism(f0=f0i, fibre_maps=maps, fibre_dims=s.fibre_dims)


def random_spatial_automorphism(
    f0: Bisection, fibre_dims, rng: np.random.Generator
) -> SpatialAutomorphism:
    dims = tuple(int(n) for n in fibre_dims)
    maps = [haar_unitary(dims[x], rng) for x in range(len(dims))]
    return make_spatial_automorphism(f0, maps, dims)


@dataclass(frozen=True)
class CovarianceGroup:
    """The cyclic group generated by one spatial automorphism σ.

    elements[m-1] is σ^m paired with the base power g^m; the last element
    covers the identity bisection, so its U is block-diagonal.
    """

    flow: CyclicFlow
    sigma: SpatialAutomorphism
    elements: tuple[SpatialAutomorphism, ...]

    @property
    def fibre_dims(self) -> tuple[int, ...]:
        return self.sigma.fibre_dims

    @property
    def n_points(self) -> int:
        return len(self.fibre_dims)


def covariance_group(sigma: SpatialAutomorphism) -> CovarianceGroup:
    flow = cyclic_flow(sigma.f0)
    elements = []
    power = sigma
    for _ in range(flow.order):
        elements.append(power)
        power = compose_automorphisms(power, sigma)
    return CovarianceGroup(flow=flow, sigma=sigma, elements=tuple(elements[:flow.order]))


def covariance_group_from_frame(
    generator: Bisection,
    E: FellBundleModel,
) -> CovarianceGroup:
    """Build σ from a bundle's frame along the generator's graph."""
    dims = E.fibre_dims
    if E.frame is not None:
        maps = [E.frame[(generator(x), x)] for x in range(len(dims))]
    else:
        maps = [np.eye(dims[x], dtype=complex) for x in range(len(dims))]
    sigma = make_spatial_automorphism(generator, maps, dims)
    return covariance_group(sigma)


def check_unitary_normalizer_theorem(
    E: FellBundleModel,
    samples: int = 100,
    eps: float = DEFAULT_EPS,
    rng: np.random.Generator | None = None,
) -> dict:
    """Sample-scale check that spatial automorphisms = unitary normalizers.

    Forward: every assembled spatial automorphism U is a unitary normalizer of
    the diagonal algebra with support exactly a bisection graph.  Converse:
    unitaries mixing two diagonal blocks (not supported on any bisection) fail
    to normalize.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    if len(set(E.fibre_dims)) != 1:
        raise ValueError("theorem check needs constant fibre dimension")
    if not is_saturated(E, eps):
        raise ValueError("theorem check needs a saturated bundle")
    A = diagonal_algebra(E)
    n = E.n_points
    forward_ok = 0
    forward_residual = 0.0
    for _ in range(samples):
        f0 = Bisection(tuple(int(i) for i in rng.permutation(n)))
        s = random_spatial_automorphism(f0, E.fibre_dims, rng)
        u = s.U
        good = (
            is_unitary(u, eps)
            and is_normalizer(u, A, eps)
            and set(normalizer_support(u, A, eps).pairs) == f0.graph()
        )
        forward_ok += int(good)

    converse_ok = 0
    for _ in range(samples):
        if n >= 2:
            i, j = rng.choice(n, size=2, replace=False)
            dim = E.fibre_dims[0]
            mix = haar_unitary(2 * dim, rng)
            u = A.unit()
            oi, oj = A.block_offsets[i], A.block_offsets[j]
            idx = list(range(oi, oi + dim)) + list(range(oj, oj + dim))
            u[np.ix_(idx, idx)] = mix
        else:
            u = haar_unitary(A.ambient_dim, rng)
        support = normalizer_support(u, A, eps)
        not_bisection = not support.is_partial_bijection or len(support.pairs) != n
        fails = not is_normalizer(u, A, eps)
        converse_ok += int((not not_bisection) or fails)
    return {
        "samples": samples,
        "forward_pass": forward_ok,
        "converse_pass": converse_ok,
        "pass": forward_ok == samples and converse_ok == samples,
    }


def a_dynamical_generation_check(
    Gs: CovarianceGroup,
    A: FiniteCStarAlgebra,
    B: FiniteCStarAlgebra,
    eps: float = DEFAULT_EPS,
) -> bool:
    """Whether products a₀ σ^{t₁} a₁ σ^{t₂} … generate all of B.

    Computed as a span closure: starting from A, repeatedly adjoin s·σ·a for s
    in the current span and a over basis(A) (σ-powers arise because the unit
    lies in A).  Requires a minimal base flow; returns False otherwise, since
    the orbit pairs then miss part of X×X and generation cannot happen.
    """
    if A.ambient_dim != B.ambient_dim or B.n_blocks != 1:
        raise ValueError("expected A inside the single-block ambient algebra B")
    if not is_minimal_flow(Gs.flow.generator):
        return False
    sigma = Gs.sigma.U
    a_basis = A.basis()
    target = B.dim()
    span = orthonormal_span_basis(a_basis, eps)
    for _ in range(Gs.flow.order + 1):
        new = [s @ sigma @ a for s in span for a in a_basis]
        grown = orthonormal_span_basis(span + new, eps)
        if len(grown) == len(span):
            break
        span = grown
        if len(span) >= target:
            break
    return len(span) == target


def slice_from_bisection(
    A: FiniteCStarAlgebra, U: SpatialAutomorphism, eps: float = DEFAULT_EPS
) -> Slice:
    """The slice A·U for a self-adjoint base bisection (f0² = id)."""
    if not U.f0.is_self_adjoint():
        raise ValueError("slice construction needs a self-adjoint base bisection")
    u = U.U
    return Slice(basis=tuple(a @ u for a in A.basis()))


def partial_isometry_endomorphism_check(
    V, A: FiniteCStarAlgebra, eps: float = DEFAULT_EPS
) -> dict:
    """Report on a ↦ VaV* as a candidate bundle *-endomorphism.

    Invertible partial isometries are unitaries, in which case the map is a
    spatial automorphism rather than a mere endomorphism.
    """
    v = as_matrix(V)
    partial = is_partial_isometry(v, eps)
    endo = all(A.contains(v @ a @ v.conj().T, eps) for a in A.basis())
    invertible = (
        v.shape[0] == v.shape[1]
        and span_dimension([v[i : i + 1, :] for i in range(v.shape[0])], eps)
        == v.shape[0]
    )
    return {
        "partial_isometry": partial,
        "endomorphism_into_A": endo,
        "invertible": invertible,
        "spatial_automorphism": partial and endo and invertible and is_unitary(v, eps),
    }
