"""Seeded random instance generators.

Every randomized campaign derives one independent counter-based stream per
trial from a master seed, so results do not depend on evaluation order or
thread count.
"""

from __future__ import annotations

import numpy as np

from .operators import QuantumChannel, ValidationError


def rng_for(master_seed: int, *stream: int) -> np.random.Generator:
    """Philox generator keyed by ``(master_seed, *stream)``."""
    ss = np.random.SeedSequence([int(master_seed), *[int(s) for s in stream]])
    return np.random.Generator(np.random.Philox(ss))


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return rng_for(int(seed))


def ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def haar_unitary(dim: int, seed) -> np.ndarray:
    rng = _as_rng(seed)
    q, r = np.linalg.qr(ginibre(rng, dim, dim))
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_pure_state(dim: int, seed) -> np.ndarray:
    rng = _as_rng(seed)
    v = ginibre(rng, dim, 1).reshape(-1)
    return v / np.linalg.norm(v)


def random_density(dim: int, rank: int, seed) -> np.ndarray:
    """Normalized ``G G^dag`` with ``G`` a ``dim x rank`` complex Gaussian."""
    if not 1 <= rank <= dim:
        raise ValidationError(f"rank {rank} must lie in [1, {dim}]")
    rng = _as_rng(seed)
    g = ginibre(rng, dim, rank)
    rho = g @ g.conj().T
    rho = rho / np.trace(rho).real
    return 0.5 * (rho + rho.conj().T)


def random_projector(dim: int, rank: int, seed) -> np.ndarray:
    """Projector onto the first ``rank`` columns of a Haar unitary."""
    if not 0 <= rank <= dim:
        raise ValidationError(f"rank {rank} must lie in [0, {dim}]")
    u = haar_unitary(dim, seed)
    v = u[:, :rank]
    return v @ v.conj().T


def random_measurement(dim: int, seed) -> np.ndarray:
    """``U diag(w) U^dag`` with ``w`` uniform on ``[0, 1]``."""
    rng = _as_rng(seed)
    u = haar_unitary(dim, rng)
    w = rng.uniform(0.0, 1.0, size=dim)
    return (u * w) @ u.conj().T


def random_channel(dim_in: int, dim_out: int, num_kraus: int, seed) -> QuantumChannel:
    """Kraus blocks of a random isometry ``dim_in -> num_kraus * dim_out``."""
    if num_kraus < 1 or num_kraus * dim_out < dim_in:
        raise ValidationError(
            f"need num_kraus * dim_out >= dim_in, got {num_kraus} * {dim_out} < {dim_in}"
        )
    rng = _as_rng(seed)
    g = ginibre(rng, num_kraus * dim_out, dim_in)
    q, r = np.linalg.qr(g)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    kraus = tuple(q[k * dim_out : (k + 1) * dim_out, :] for k in range(num_kraus))
    return QuantumChannel(kraus)


def random_commuting_pair(dim: int, seed, conjugate: bool = True):
    """A commuting pair of full-rank states, optionally rotated by a common unitary.

    Returns ``(rho, sigma, lam, mu)`` where ``lam`` and ``mu`` are the common
    eigenbasis spectra.
    """
    rng = _as_rng(seed)
    lam = rng.dirichlet(np.ones(dim))
    mu = rng.dirichlet(np.ones(dim))
    rho = np.diag(lam).astype(complex)
    sigma = np.diag(mu).astype(complex)
    if conjugate:
        u = haar_unitary(dim, rng)
        rho = u @ rho @ u.conj().T
        sigma = u @ sigma @ u.conj().T
    return rho, sigma, lam, mu
