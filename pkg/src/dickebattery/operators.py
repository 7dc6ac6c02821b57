"""Truncated bosonic and qubit operators on tensor-product Hilbert spaces.

Factor order is always ``[auxiliary, battery]``. Matrices are dense complex
arrays; every :class:`Operator` is read-only after construction.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from numbers import Number
from typing import Sequence, Tuple

import numpy as np


class DimensionError(ValueError):
    """Raised for invalid dimensions or mismatched Hilbert spaces."""


@dataclass(frozen=True)
class HilbertSpace:
    factor_dims: Tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.factor_dims)
        if not dims or any(d < 1 for d in dims):
            raise DimensionError(f"factor dimensions must be >= 1, got {self.factor_dims}")
        object.__setattr__(self, "factor_dims", dims)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.factor_dims))

    def __len__(self):
        return len(self.factor_dims)


def _space(dims) -> HilbertSpace:
    if isinstance(dims, HilbertSpace):
        return dims
    if isinstance(dims, (int, np.integer)):
        return HilbertSpace((int(dims),))
    return HilbertSpace(tuple(dims))


class Operator:
    """Dense matrix tagged with the Hilbert space it acts on."""

    __slots__ = ("space", "data")

    def __init__(self, data, space=None):
        arr = np.array(data, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionError(f"operator data must be square, got shape {arr.shape}")
        space = _space(arr.shape[0] if space is None else space)
        if arr.shape[0] != space.total_dim:
            raise DimensionError(
                f"matrix side {arr.shape[0]} does not match space {space.factor_dims}"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "data", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Operator is immutable")

    @property
    def dims(self) -> Tuple[int, ...]:
        return self.space.factor_dims

    @property
    def shape(self):
        return self.data.shape

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.data
        return self.data.astype(dtype)

    def _check(self, other: "Operator"):
        if not isinstance(other, Operator):
            raise TypeError(f"expected Operator, got {type(other).__name__}")
        if other.space != self.space:
            raise DimensionError(
                f"space mismatch: {self.space.factor_dims} vs {other.space.factor_dims}"
            )

    def __add__(self, other):
        if isinstance(other, Number) and other == 0:
            return self
        self._check(other)
        return Operator(self.data + other.data, self.space)

    __radd__ = __add__

    def __sub__(self, other):
        self._check(other)
        return Operator(self.data - other.data, self.space)

    def __neg__(self):
        return Operator(-self.data, self.space)

    def __mul__(self, scalar):
        if not isinstance(scalar, Number):
            return NotImplemented
        return Operator(scalar * self.data, self.space)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Operator(self.data / scalar, self.space)

    def __matmul__(self, other):
        self._check(other)
        return Operator(self.data @ other.data, self.space)

    def __pow__(self, n: int):
        return Operator(np.linalg.matrix_power(self.data, n), self.space)

    def __eq__(self, other):
        return (
            isinstance(other, Operator)
            and other.space == self.space
            and np.array_equal(other.data, self.data)
        )

    __hash__ = None

    def dag(self) -> "Operator":
        return Operator(self.data.conj().T, self.space)

    def tr(self) -> complex:
        return complex(np.trace(self.data))

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.data - self.data.conj().T), initial=0.0) <= atol)

    def __repr__(self):
        return f"Operator(dims={list(self.dims)}, data=\n{self.data})"


def annihilation(dim: int) -> Operator:
    """Truncated ladder operator ``a`` with ``<n-1|a|n> = sqrt(n)``."""
    if dim < 2:
        raise DimensionError(f"ladder operators need dim >= 2, got {dim}")
    return Operator(np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1))


def creation(dim: int) -> Operator:
    return annihilation(dim).dag()


def number(dim: int) -> Operator:
    if dim < 1:
        raise DimensionError(f"dim must be >= 1, got {dim}")
    return Operator(np.diag(np.arange(dim, dtype=float)))


def identity(dim: int) -> Operator:
    if dim < 1:
        raise DimensionError(f"dim must be >= 1, got {dim}")
    return Operator(np.eye(dim))


def qubit_ops() -> Tuple[Operator, Operator, Operator]:
    """Return ``(sigma_z, sigma_plus, sigma_minus)``.

    Basis ``|0>`` is the ground state and ``|1>`` the excited state, so
    ``sigma_z = diag(-1, 1)`` and ``(sigma_z + 1)/2 = diag(0, 1)``.
    """
    sz = Operator(np.diag([-1.0, 1.0]))
    sp = Operator(np.array([[0.0, 0.0], [1.0, 0.0]]))
    return sz, sp, sp.dag()


def embed(op: Operator, factor_index: int, space) -> Operator:
    """Place a local operator on one factor: ``I x ... x op x ... x I``."""
    space = _space(space)
    dims = space.factor_dims
    if not 0 <= factor_index < len(dims):
        raise DimensionError(f"factor index {factor_index} out of range for {dims}")
    if op.space.total_dim != dims[factor_index]:
        raise DimensionError(
            f"operator of dim {op.space.total_dim} cannot act on factor "
            f"{factor_index} of dim {dims[factor_index]}"
        )
    mats = [np.eye(d) for d in dims]
    mats[factor_index] = op.data
    return Operator(reduce(np.kron, mats), space)


def tensor(*ops: Operator) -> Operator:
    dims = sum((op.dims for op in ops), ())
    return Operator(reduce(np.kron, [op.data for op in ops]), HilbertSpace(dims))


def commutator(A: Operator, B: Operator) -> Operator:
    A._check(B)
    return Operator(A.data @ B.data - B.data @ A.data, A.space)


def anticommutator(A: Operator, B: Operator) -> Operator:
    A._check(B)
    return Operator(A.data @ B.data + B.data @ A.data, A.space)


def adjoint(A: Operator) -> Operator:
    return A.dag()


def basis(dim: int, n: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[n] = 1.0
    return v


def projector(space, index: Sequence[int]) -> Operator:
    """``|i0 i1 ...><i0 i1 ...|`` for a product basis state."""
    space = _space(space)
    vecs = [basis(d, i) for d, i in zip(space.factor_dims, index)]
    v = reduce(np.kron, vecs)
    return Operator(np.outer(v, v.conj()), space)
