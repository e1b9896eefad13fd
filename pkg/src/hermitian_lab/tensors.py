"""Frames and exterior algebra at a point.

Forms live in two shapes. Inside the pipeline a k-form is a full
antisymmetric array with k axes, possibly a ``TensorJet`` when it has to be
differentiated. ``KForm`` keeps only strictly increasing multi-indices and is
used for wedge powers, the Hodge star and inner products in an orthonormal
frame.
"""

import functools
import itertools
import math
import operator
import string
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

import numpy as np

from hermitian_lab.constants import STRUCTURE_TOLERANCE
from hermitian_lab.errors import DegenerateFrameError, StructureError
from hermitian_lab.jets import TensorJet, jet_einsum

if TYPE_CHECKING:
    from collections.abc import Sequence

    from numpy.typing import NDArray


def standard_complex_structure(n: int) -> NDArray[np.float64]:
    """J0 with J e_i = e_{n+i} for the coordinate ordering (x1..xn, y1..yn)."""
    j0 = np.zeros((2 * n, 2 * n))
    j0[n:, :n] = np.eye(n)
    j0[:n, n:] = -np.eye(n)
    return j0


@dataclass(frozen=True)
class Frame:
    """h-orthonormal frame with e_{n+i} = J e_i, columns in chart coordinates."""

    vectors: NDArray[np.float64]
    metric: NDArray[np.float64]
    acs: NDArray[np.float64]

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[0])

    @property
    def n(self) -> int:
        return self.dim // 2

    @functools.cached_property
    def coframe(self) -> NDArray[np.float64]:
        return np.linalg.inv(self.vectors)

    @property
    def unitary(self) -> NDArray[np.complex128]:
        """u_i = (e_i - sqrt(-1) e_{n+i}) / sqrt(2) in chart coordinates."""
        n = self.n
        return (self.vectors[:, :n] - 1j * self.vectors[:, n:]) / math.sqrt(2)

    def covariant(self, tensor: NDArray[Any]) -> NDArray[Any]:
        """Frame components of a tensor whose axes are all covariant."""
        out = tensor
        for axis in range(tensor.ndim):
            out = np.moveaxis(np.tensordot(out, self.vectors, axes=([axis], [0])), -1, axis)
        return out

    def vector(self, components: NDArray[Any]) -> NDArray[Any]:
        """Frame components of a vector given in coordinates."""
        return self.coframe @ components


@functools.cache
def frame_unitary(n: int) -> NDArray[np.complex128]:
    """Frame components of u_1..u_n followed by their conjugates, shape (2n, 2n)."""
    u = np.zeros((2 * n, n), dtype=complex)
    u[:n, :] = np.eye(n) / math.sqrt(2)
    u[n:, :] = -1j * np.eye(n) / math.sqrt(2)
    return np.concatenate([u, u.conj()], axis=1)


@functools.cache
def frame_coframe_unitary(n: int) -> NDArray[np.complex128]:
    """theta^i = (e^i + sqrt(-1) e^{n+i}) / sqrt(2) as rows over the real frame."""
    theta = np.zeros((n, 2 * n), dtype=complex)
    theta[:, :n] = np.eye(n) / math.sqrt(2)
    theta[:, n:] = 1j * np.eye(n) / math.sqrt(2)
    return theta


def check_structure(
    h: NDArray[np.float64], acs: NDArray[np.float64], tol: float = STRUCTURE_TOLERANCE
) -> None:
    scale = max(1.0, float(np.abs(h).max()))
    identity = np.eye(h.shape[0])
    if (residual := float(np.abs(h - h.T).max())) > tol * scale:
        raise StructureError("metric is not symmetric", residual)
    if (residual := float(np.abs(acs @ acs + identity).max())) > tol * max(
        1.0, float(np.abs(acs).max()) ** 2
    ):
        raise StructureError("J does not square to -1", residual)
    if (residual := float(np.abs(acs.T @ h @ acs - h).max())) > tol * scale * max(
        1.0, float(np.abs(acs).max()) ** 2
    ):
        raise StructureError("J is not h-orthogonal", residual)
    if float(np.linalg.eigvalsh(h).min()) <= 0.0:
        raise StructureError("metric is not positive definite")


def build_adapted_frame(
    h: NDArray[np.float64], acs: NDArray[np.float64], tol: float = STRUCTURE_TOLERANCE
) -> Frame:
    """Gram-Schmidt over the coordinate basis, pairing each vector with its J image."""
    check_structure(h, acs, tol)
    dim = h.shape[0]
    n = dim // 2
    firsts: list[NDArray[np.float64]] = []
    span: list[NDArray[np.float64]] = []
    for seed in np.eye(dim):
        v = seed - sum((w @ h @ seed) * w for w in span)
        norm_sq = float(v @ h @ v)
        if norm_sq < 1e-16:
            continue
        e = v / math.sqrt(norm_sq)
        firsts.append(e)
        span.extend((e, acs @ e))
        if len(firsts) == n:
            break
    if len(firsts) < n:
        raise DegenerateFrameError(len(firsts), n)
    vectors = np.column_stack(firsts + [acs @ e for e in firsts])
    return Frame(vectors=vectors, metric=h, acs=acs)


@functools.cache
def multi_indices(dim: int, degree: int) -> tuple[tuple[int, ...], ...]:
    return tuple(itertools.combinations(range(dim), degree))


@functools.cache
def _index_of(dim: int, degree: int) -> dict[tuple[int, ...], int]:
    return {idx: pos for pos, idx in enumerate(multi_indices(dim, degree))}


def permutation_sign(seq: Sequence[int]) -> int:
    inversions = sum(1 for i, j in itertools.combinations(range(len(seq)), 2) if seq[i] > seq[j])
    return -1 if inversions % 2 else 1


@dataclass(frozen=True, slots=True)
class KForm:
    """k-form components over strictly increasing multi-indices of a frame."""

    dim: int
    degree: int
    components: NDArray[Any]
    bidegree: tuple[int, int] | None = None

    @classmethod
    def from_full(cls, array: NDArray[Any], bidegree: tuple[int, int] | None = None) -> KForm:
        dim, degree = (array.shape[0] if array.ndim else 0), array.ndim
        comps = np.array([array[idx] for idx in multi_indices(dim, degree)])
        return cls(dim, degree, comps, bidegree)

    @classmethod
    def scalar(cls, dim: int, value: complex) -> KForm:
        return cls(dim, 0, np.array([value]))

    def full(self) -> NDArray[Any]:
        out = np.zeros((self.dim,) * self.degree, dtype=self.components.dtype)
        for idx, value in zip(multi_indices(self.dim, self.degree), self.components, strict=True):
            for perm in itertools.permutations(range(self.degree)):
                out[tuple(idx[p] for p in perm)] = permutation_sign(perm) * value
        return out

    def __add__(self, other: KForm) -> KForm:
        return KForm(self.dim, self.degree, self.components + other.components)

    def __mul__(self, scalar: complex) -> KForm:
        return KForm(self.dim, self.degree, scalar * self.components, self.bidegree)

    __rmul__ = __mul__

    @property
    def top(self) -> complex:
        if self.degree != self.dim:
            raise ValueError(f"degree {self.degree} form is not top degree")
        return complex(self.components[0]) if np.iscomplexobj(self.components) else float(self.components[0])


@functools.cache
def _shuffles(dim: int, k: int, m: int) -> tuple[tuple[int, tuple[tuple[int, int, int], ...]], ...]:
    left, right, out = _index_of(dim, k), _index_of(dim, m), multi_indices(dim, k + m)
    table = []
    for pos, idx in enumerate(out):
        terms = []
        for chosen in itertools.combinations(range(k + m), k):
            rest = tuple(i for i in range(k + m) if i not in chosen)
            sign = permutation_sign(chosen + rest)
            terms.append(
                (sign, left[tuple(idx[i] for i in chosen)], right[tuple(idx[i] for i in rest)])
            )
        table.append((pos, tuple(terms)))
    return tuple(table)


def wedge(a: KForm, b: KForm) -> KForm:
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    degree = a.degree + b.degree
    if degree > a.dim:
        return KForm(a.dim, degree, np.zeros(0))
    dtype = np.result_type(a.components, b.components)
    comps = np.zeros(math.comb(a.dim, degree), dtype=dtype)
    for pos, terms in _shuffles(a.dim, a.degree, b.degree):
        comps[pos] = sum(s * a.components[i] * b.components[j] for s, i, j in terms)
    bidegree = None
    if a.bidegree is not None and b.bidegree is not None:
        bidegree = (a.bidegree[0] + b.bidegree[0], a.bidegree[1] + b.bidegree[1])
    return KForm(a.dim, degree, comps, bidegree)


def wedge_power(a: KForm, k: int) -> KForm:
    out = KForm.scalar(a.dim, 1.0)
    for _ in range(k):
        out = wedge(out, a)
    return out


def kform_inner(a: KForm, b: KForm) -> complex:
    """Bilinear inner product; frame forms only."""
    if a.degree != b.degree:
        raise ValueError("degree mismatch")
    return complex(np.dot(a.components, b.components)) if np.iscomplexobj(
        a.components
    ) or np.iscomplexobj(b.components) else float(np.dot(a.components, b.components))


def hodge_star(a: KForm) -> KForm:
    """Star for the orientation of F^n / n!, so that *1 is the volume form."""
    dim, k = a.dim, a.degree
    n = dim // 2
    orientation = -1 if (n * (n - 1) // 2) % 2 else 1
    index = _index_of(dim, k)
    comps = np.zeros(math.comb(dim, dim - k), dtype=a.components.dtype)
    for pos, idx in enumerate(multi_indices(dim, dim - k)):
        complement = tuple(i for i in range(dim) if i not in idx)
        comps[pos] = orientation * permutation_sign(complement + idx) * a.components[index[complement]]
    return KForm(dim, dim - k, comps)


def form_norm_sq(array: NDArray[Any]) -> float:
    """|phi|^2 over increasing multi-indices of a full frame array."""
    return float(np.sum(np.abs(array) ** 2).real) / math.factorial(array.ndim)


def apply_slots(array: NDArray[Any], matrices: Sequence[NDArray[Any]]) -> NDArray[Any]:
    """phi(M1 X1, ..., Mk Xk) as a new array."""
    out = array
    for axis, matrix in enumerate(matrices):
        out = np.moveaxis(np.tensordot(out, matrix, axes=([axis], [0])), -1, axis)
    return out


def pq_project(array: NDArray[Any], acs: NDArray[Any], p: int, q: int) -> NDArray[np.complex128]:
    """(p, q) part of a k-form: p slots through pi, q through its conjugate."""
    k = array.ndim
    if p + q != k:
        raise ValueError(f"bidegree ({p}, {q}) does not match degree {k}")
    pi = 0.5 * (np.eye(acs.shape[0]) - 1j * acs)
    out = np.zeros(array.shape, dtype=complex)
    for holomorphic in itertools.combinations(range(k), p):
        out += apply_slots(array, [pi if i in holomorphic else pi.conj() for i in range(k)])
    return out


def pq_project_jet(form: TensorJet, acs: TensorJet, p: int, q: int) -> TensorJet:
    """``pq_project`` for forms and structures that carry jets."""
    k = form.rank
    dim = acs.value.shape[0]
    pi = TensorJet(
        0.5 * np.eye(dim) - 0.5j * acs.value,
        None if acs.d1 is None else -0.5j * acs.d1,
        None if acs.d2 is None else -0.5j * acs.d2,
    )
    letters = string.ascii_lowercase
    src, dst = letters[:k], letters[k : 2 * k]
    spec = src + "," + ",".join(f"{src[i]}{dst[i]}" for i in range(k)) + "->" + dst
    return functools.reduce(
        operator.add,
        (
            jet_einsum(spec, form, *[pi if i in holomorphic else pi.conj() for i in range(k)])
            for holomorphic in itertools.combinations(range(k), p)
        ),
    )


def j_action(array: NDArray[Any], acs: NDArray[Any]) -> NDArray[Any]:
    """(J phi)(X1..Xk) = (-1)^k phi(J X1, ..., J Xk)."""
    return (-1) ** array.ndim * apply_slots(array, [acs] * array.ndim)


def exterior_derivative(form: TensorJet) -> TensorJet:
    """d of a full coordinate k-form, one jet order lower."""
    k = form.rank
    gradient = form.grad()
    terms = []
    for i in range(k + 1):
        axes = list(range(k))
        axes.insert(i, k)
        term = gradient.transpose(*axes)
        terms.append(term if i % 2 == 0 else -term)
    return functools.reduce(operator.add, terms)


def _raise_all(form: TensorJet, hinv: TensorJet) -> TensorJet:
    k = form.rank
    letters = string.ascii_lowercase
    low, up = letters[:k], letters[k : 2 * k]
    spec = low + "," + ",".join(f"{up[i]}{low[i]}" for i in range(k)) + "->" + up
    return jet_einsum(spec, form, *[hinv] * k)


def codifferential(form: TensorJet, h: TensorJet, hinv: TensorJet, sqrt_det: TensorJet) -> TensorJet:
    """-*d* on a coordinate k-form via (delta phi)^{b..} = -div(sqrt(g) phi^{a b..}) / sqrt(g).

    Christoffel terms cancel on antisymmetric tensors, so the divergence is
    taken with partial derivatives only. The result is lowered again.
    """
    k = form.rank
    if k == 0:
        raise ValueError("codifferential of a function is zero by definition")
    weighted = jet_einsum("," + string.ascii_lowercase[:k] + "->" + string.ascii_lowercase[:k], sqrt_det, _raise_all(form, hinv))
    letters = string.ascii_lowercase
    rest = letters[1:k]
    divergence = jet_einsum(f"a{rest}a->{rest}", weighted.grad()) if k > 1 else jet_einsum("aa->", weighted.grad())
    inv_det = sqrt_det.truncate(divergence.order).reciprocal()
    raised = jet_einsum(f",{rest}->{rest}", inv_det, divergence) * -1.0
    if k == 1:
        return raised
    lowered_spec = rest + "," + ",".join(f"{rest[i]}{letters[k + i]}" for i in range(k - 1)) + "->" + letters[k : 2 * k - 1]
    return jet_einsum(lowered_spec, raised, *[h] * (k - 1))
