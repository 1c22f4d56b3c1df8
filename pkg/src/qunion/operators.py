"""Finite-dimensional operator algebra.

Operators are plain complex ``numpy`` arrays. The ``as_*`` constructors
validate the defining invariants of each operator class and return a cleaned
copy; they raise :class:`ValidationError` on failure. Channels and spectral
decompositions are small frozen dataclasses.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

HERMITIAN_TOL = 1e-9
PSD_TOL = 1e-9
TRACE_TOL = 1e-9
IDEMPOTENT_TOL = 1e-8
CPTP_TOL = 1e-8


class ValidationError(ValueError):
    """An operator failed one of its defining invariants."""


def _max_abs(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def _square(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ValidationError(f"expected a non-empty square matrix, got shape {a.shape}")
    return a


def as_hermitian(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    a = _square(a)
    err = _max_abs(a - a.conj().T)
    if err > tol:
        raise ValidationError(f"operator is not Hermitian (max |A - A^dag| = {err:.3g})")
    return 0.5 * (a + a.conj().T)


def as_density(a, tol: float = PSD_TOL) -> np.ndarray:
    """Validate a density operator; eigenvalues in ``[-tol, 0)`` are clipped to 0."""
    a = as_hermitian(a)
    tr = float(np.trace(a).real)
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValidationError(f"density operator must have unit trace, got {tr!r}")
    w, v = np.linalg.eigh(a)
    if w[0] < -tol:
        raise ValidationError(f"density operator has eigenvalue {w[0]:.3g} < 0")
    if w[0] < 0:
        w = np.clip(w, 0.0, None)
        a = (v * w) @ v.conj().T
    return a


def as_psd(a, tol: float = PSD_TOL) -> np.ndarray:
    """Validate a positive semi-definite operator of arbitrary trace."""
    a = as_hermitian(a)
    w = np.linalg.eigvalsh(a)
    if w[0] < -tol:
        raise ValidationError(f"operator has eigenvalue {w[0]:.3g} < 0")
    return a


def as_measurement(a, tol: float = PSD_TOL) -> np.ndarray:
    """Validate ``0 <= a <= I`` (a POVM element)."""
    a = as_hermitian(a)
    w = np.linalg.eigvalsh(a)
    if w[0] < -tol or w[-1] > 1.0 + tol:
        raise ValidationError(
            f"measurement operator spectrum [{w[0]:.3g}, {w[-1]:.3g}] leaves [0, 1]"
        )
    return a


def as_projector(a) -> np.ndarray:
    a = as_hermitian(a)
    err = _max_abs(a @ a - a)
    if err > IDEMPOTENT_TOL:
        raise ValidationError(f"operator is not idempotent (max |P^2 - P| = {err:.3g})")
    return a


def projector_rank(p: np.ndarray) -> int:
    """Number of eigenvalues at least 1/2."""
    return int(np.sum(np.linalg.eigvalsh(p) >= 0.5))


def as_pure_state(v, normalize: bool = False) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.size == 0:
        raise ValidationError("empty state vector")
    norm = float(np.linalg.norm(v))
    if normalize:
        if norm == 0:
            raise ValidationError("cannot normalize the zero vector")
        return v / norm
    if abs(norm - 1.0) > 1e-9:
        raise ValidationError(f"state vector has norm {norm!r}, expected 1")
    return v


def complement(p: np.ndarray) -> np.ndarray:
    return np.eye(p.shape[0], dtype=complex) - p


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def pure_density(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def expectation(op: np.ndarray, state: np.ndarray) -> complex:
    """``Tr{op rho}`` for a density matrix or ``<psi|op|psi>`` for a vector."""
    if state.ndim == 1:
        return complex(np.vdot(state, op @ state))
    return complex(np.einsum("ij,ji->", op, state))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Rank-1 spectral pieces, eigenvalues in descending order.

    Degenerate eigenvalues are not grouped: every eigenvector is its own
    piece.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray  # columns

    @property
    def projectors(self) -> list[np.ndarray]:
        return [np.outer(v, v.conj()) for v in self.vectors.T]

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.eigenvalues) @ self.vectors.conj().T

    def grouped(self, tol: float = 1e-10) -> list[tuple[float, np.ndarray]]:
        """Merge numerically degenerate eigenvalues into (value, projector) pairs."""
        groups: list[tuple[float, list[int]]] = []
        for k, lam in enumerate(self.eigenvalues):
            if groups and abs(groups[-1][0] - lam) <= tol * max(1.0, abs(lam)):
                groups[-1][1].append(k)
            else:
                groups.append((float(lam), [k]))
        out = []
        for _, idx in groups:
            vecs = self.vectors[:, idx]
            out.append((float(np.mean(self.eigenvalues[idx])), vecs @ vecs.conj().T))
        return out


def spectral_decompose(op) -> SpectralDecomposition:
    op = as_hermitian(op)
    w, v = np.linalg.eigh(op)
    order = np.argsort(w)[::-1]
    return SpectralDecomposition(eigenvalues=w[order], vectors=v[:, order])


def operator_function(op: np.ndarray, f, lo: float | None = None, hi: float | None = None) -> np.ndarray:
    """Apply a scalar function to a Hermitian operator through its spectrum.

    The spectrum is clipped to ``[lo, hi]`` first when bounds are given.
    """
    w, v = np.linalg.eigh(0.5 * (op + op.conj().T))
    if lo is not None or hi is not None:
        w = np.clip(w, lo, hi)
    return (v * f(w)) @ v.conj().T


def sqrtm_psd(op: np.ndarray) -> np.ndarray:
    return operator_function(op, np.sqrt, lo=0.0)


def support_projector(op: np.ndarray, rel_tol: float = 1e-10) -> np.ndarray:
    """Projector onto eigenvectors with eigenvalue above ``rel_tol * ||op||``."""
    w, v = np.linalg.eigh(0.5 * (op + op.conj().T))
    scale = max(float(np.max(np.abs(w))), 0.0) if w.size else 0.0
    if scale == 0.0:
        return np.zeros_like(op, dtype=complex)
    keep = w > rel_tol * scale
    vk = v[:, keep]
    return vk @ vk.conj().T


def positive_part_projector(op: np.ndarray, tol: float = 0.0) -> np.ndarray:
    """Projector onto the eigenspace of ``op`` with eigenvalues strictly above ``tol``."""
    w, v = np.linalg.eigh(0.5 * (op + op.conj().T))
    vk = v[:, w > tol]
    return vk @ vk.conj().T


def tensor(*ops) -> np.ndarray:
    """Kronecker product of operators (or vectors), left to right."""
    if not ops:
        raise ValueError("tensor() needs at least one operand")
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def _check_dims(op: np.ndarray, dims: Sequence[int]) -> list[int]:
    dims = [int(d) for d in dims]
    if any(d <= 0 for d in dims) or int(np.prod(dims)) != op.shape[0]:
        raise ValidationError(f"subsystem dims {dims} inconsistent with operator dim {op.shape[0]}")
    return dims


def partial_trace(op, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep`` (kept order is ascending)."""
    op = _square(op)
    dims = _check_dims(op, dims)
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise ValidationError(f"keep indices {keep} out of range for {n} subsystems")
    t = op.reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    if 2 * n > len(letters):
        raise ValidationError("too many subsystems")
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for k in range(n):
        if k not in keep:
            col[k] = row[k]
    out = "".join(row[k] for k in keep) + "".join(col[k] for k in keep)
    res = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    return res.reshape(dk, dk)


def _apply_left(mat: np.ndarray, t: np.ndarray, targets: list[int], in_dims: list[int], out_dims: list[int]) -> np.ndarray:
    """Contract ``mat`` (out x in) into the tensor axes ``targets``."""
    k = len(targets)
    t = np.moveaxis(t, targets, list(range(k)))
    rest = t.shape[k:]
    t = t.reshape(int(np.prod(in_dims)), -1)
    t = (mat @ t).reshape(list(out_dims) + list(rest))
    return np.moveaxis(t, list(range(k)), targets)


def apply_kraus(kraus: Sequence[np.ndarray], state: np.ndarray, dims: Sequence[int], targets: Sequence[int]) -> tuple[np.ndarray, list[int]]:
    """``sum_k K_k rho K_k^dag`` with each ``K_k`` acting on subsystems ``targets``.

    Returns the new operator and its subsystem dims. Non-square Kraus
    operators are only accepted on a single target subsystem.
    """
    dims = _check_dims(state, dims)
    targets = [int(t) for t in targets]
    n = len(dims)
    in_dims = [dims[t] for t in targets]
    d_in = int(np.prod(in_dims))
    k0 = np.asarray(kraus[0])
    if k0.shape[1] != d_in:
        raise ValidationError(f"operator input dim {k0.shape[1]} != target dim {d_in}")
    if len(targets) == 1:
        out_dims = [k0.shape[0]]
    elif k0.shape[0] == d_in:
        out_dims = in_dims
    else:
        raise ValidationError("non-square operators are only supported on a single subsystem")
    new_dims = list(dims)
    for t, d in zip(targets, out_dims):
        new_dims[t] = d
    tens = state.reshape(dims + dims)
    acc = None
    for k in kraus:
        k = np.asarray(k, dtype=complex)
        x = _apply_left(k, tens, targets, in_dims, out_dims)
        x = _apply_left(k.conj(), x, [t + n for t in targets], in_dims, out_dims)
        acc = x if acc is None else acc + x
    dn = int(np.prod(new_dims))
    return acc.reshape(dn, dn), new_dims


def apply_local(op: np.ndarray, state: np.ndarray, dims: Sequence[int], targets: Sequence[int]) -> np.ndarray:
    """``op`` applied to ``state`` from the left only (``op (x) I`` times ``state``)."""
    dims = _check_dims(state, dims)
    targets = [int(t) for t in targets]
    in_dims = [dims[t] for t in targets]
    tens = state.reshape(dims + dims)
    x = _apply_left(np.asarray(op, dtype=complex), tens, targets, in_dims, in_dims)
    return x.reshape(state.shape)


def embed(op: np.ndarray, dims: Sequence[int], targets: Sequence[int]) -> np.ndarray:
    """Full matrix of ``op`` acting on ``targets`` and identity elsewhere."""
    d = int(np.prod(dims))
    return apply_local(op, np.eye(d, dtype=complex), dims, targets)


@dataclass(frozen=True)
class QuantumChannel:
    """CPTP map given by Kraus operators of shape ``(dim_out, dim_in)``."""

    kraus: tuple[np.ndarray, ...]

    def __post_init__(self):
        ks = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        if not ks:
            raise ValidationError("a channel needs at least one Kraus operator")
        shape = ks[0].shape
        if any(k.ndim != 2 or k.shape != shape for k in ks):
            raise ValidationError("Kraus operators must share one 2-D shape")
        total = sum(k.conj().T @ k for k in ks)
        err = _max_abs(total - np.eye(shape[1]))
        if err > CPTP_TOL:
            raise ValidationError(f"Kraus family is not trace preserving (error {err:.3g})")
        object.__setattr__(self, "kraus", ks)

    @property
    def dim_in(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.kraus[0].shape[0]

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return sum(k @ rho @ k.conj().T for k in self.kraus)


def identity_channel(dim: int) -> QuantumChannel:
    return QuantumChannel((np.eye(dim, dtype=complex),))


def depolarizing_channel(dim: int, p: float) -> QuantumChannel:
    """``rho -> (1-p) rho + p I/d`` via the generalized Pauli (Weyl) Kraus set."""
    if not 0.0 <= p <= 1.0 + 1.0 / (dim * dim - 1):
        raise ValidationError(f"depolarizing parameter {p} out of range")
    omega = np.exp(2j * np.pi / dim)
    shift = np.roll(np.eye(dim), 1, axis=0)
    clock = np.diag(omega ** np.arange(dim))
    weyl = [np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
            for a in range(dim) for b in range(dim)]
    w0 = 1.0 - p + p / dim**2
    wk = p / dim**2
    kraus = [np.sqrt(w0) * weyl[0]] + [np.sqrt(wk) * w for w in weyl[1:]]
    return QuantumChannel(tuple(kraus))


def completely_depolarizing_channel(dim: int) -> QuantumChannel:
    kraus = []
    for i in range(dim):
        for j in range(dim):
            k = np.zeros((dim, dim), dtype=complex)
            k[i, j] = 1.0 / np.sqrt(dim)
            kraus.append(k)
    return QuantumChannel(tuple(kraus))


def amplitude_damping_channel(gamma: float) -> QuantumChannel:
    k0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex)
    k1 = np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex)
    return QuantumChannel((k0, k1))


def apply_channel(ch: QuantumChannel, state, subsystem: int = 0, dims: Sequence[int] | None = None) -> np.ndarray:
    """Apply ``ch`` to one subsystem of ``state``; returns the output density operator."""
    state = as_density(state)
    if dims is None:
        dims = [state.shape[0]]
    dims = _check_dims(state, dims)
    if not 0 <= subsystem < len(dims):
        raise ValidationError(f"subsystem {subsystem} out of range")
    if dims[subsystem] != ch.dim_in:
        raise ValidationError(
            f"channel input dim {ch.dim_in} does not match subsystem dim {dims[subsystem]}"
        )
    out, _ = apply_kraus(ch.kraus, state, dims, [subsystem])
    return 0.5 * (out + out.conj().T)


def max_entangled(dim: int) -> np.ndarray:
    """``|Phi+> = sum_i |ii>/sqrt(d)`` as a vector on ``d*d``."""
    v = np.zeros(dim * dim, dtype=complex)
    v[:: dim + 1] = 1.0 / np.sqrt(dim)
    return v
