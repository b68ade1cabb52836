"""Deterministic pseudorandom test matrices."""

from __future__ import annotations

import numpy as np

KINDS = ("gaussian", "hermitian", "tridiagonal", "jordan")


def _as_rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def random_gaussian(n: int, rng) -> np.ndarray:
    """Standard complex Gaussian entries, variance 1 per entry."""
    rng = _as_rng(rng)
    return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)


def random_unitary(n: int, rng) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    rng = _as_rng(rng)
    q, r = np.linalg.qr(random_gaussian(n, rng))
    # fix the phase ambiguity of QR so the distribution is Haar
    return q * (np.diag(r) / np.abs(np.diag(r)))


def jordan_block(n: int) -> np.ndarray:
    """The nilpotent single Jordan block: ones on the superdiagonal."""
    return np.diag(np.ones(n - 1, dtype=complex), 1) if n > 1 else np.zeros((1, 1), dtype=complex)


def make_matrix(kind: str, n: int, seed) -> np.ndarray:
    """Matrix of the requested kind; same (kind, n, seed) gives identical output."""
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}; expected one of {KINDS}")
    rng = _as_rng(seed)
    if kind == "jordan":
        return jordan_block(n)
    a = random_gaussian(n, rng)
    if kind == "hermitian":
        return (a + np.conj(a).T) / 2.0
    if kind == "tridiagonal":
        mask = np.abs(np.subtract.outer(np.arange(n), np.arange(n))) <= 1
        return a * mask
    return a
