"""Dense complex linear algebra over multi-subsystem Hilbert spaces.

Operators are plain complex ndarrays; the subsystem structure is carried
separately as a sequence of dimensions whose product equals the side length.
All functions are pure and never mutate their inputs.
"""

import math
from functools import reduce

import numpy as np

HERMITIAN_ATOL = 1e-12
EIG_RECON_ATOL = 1e-10

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def dag(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return m.conj().T


def kron(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more operators, left to right."""
    if not ops:
        raise ValueError("kron needs at least one operator")
    return reduce(np.kron, ops)


def pauli_string(letters: str) -> np.ndarray:
    """Tensor product of single-qubit Paulis, e.g. ``pauli_string("XZI")``."""
    try:
        mats = [PAULI[ch] for ch in letters]
    except KeyError as exc:
        raise ValueError(f"unknown Pauli letter {exc.args[0]!r} in {letters!r}") from exc
    return kron(*mats)


def _as_dims(dims) -> tuple[int, ...]:
    out = tuple(int(d) for d in dims)
    if not out or any(d < 1 for d in out):
        raise ValueError(f"invalid subsystem dimensions {dims!r}")
    return out


def _check_square(m: np.ndarray, dims: tuple[int, ...]) -> None:
    side = math.prod(dims)
    if m.shape != (side, side):
        raise ValueError(f"matrix shape {m.shape} does not match dims {dims} (side {side})")


def is_hermitian(m: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    return bool(np.max(np.abs(m - dag(m))) <= atol)


def partial_trace(m: np.ndarray, dims, keep) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    ``keep`` is a set of subsystem indices; the kept subsystems stay in their
    original relative order, so the result acts on ``[dims[k] for k in sorted(keep)]``.
    """
    dims = _as_dims(dims)
    m = np.asarray(m, dtype=complex)
    _check_square(m, dims)
    n = len(dims)
    keep = sorted({int(k) for k in (keep if np.iterable(keep) else [keep])})
    if keep and (keep[0] < 0 or keep[-1] >= n):
        raise IndexError(f"keep indices {keep} out of range for {n} subsystems")
    t = m.reshape(dims + dims)
    for ax in sorted((i for i in range(n) if i not in keep), reverse=True):
        t = np.trace(t, axis1=ax, axis2=ax + t.ndim // 2)
    side = math.prod(dims[k] for k in keep) if keep else 1
    return t.reshape(side, side)


def partial_transpose(m: np.ndarray, dims, subsystems) -> np.ndarray:
    """Transpose the listed subsystems in place of the composite operator."""
    dims = _as_dims(dims)
    m = np.asarray(m, dtype=complex)
    _check_square(m, dims)
    n = len(dims)
    subs = sorted({int(s) for s in (subsystems if np.iterable(subsystems) else [subsystems])})
    if subs and (subs[0] < 0 or subs[-1] >= n):
        raise IndexError(f"subsystem indices {subs} out of range for {n} subsystems")
    t = m.reshape(dims + dims)
    axes = list(range(2 * n))
    for s in subs:
        axes[s], axes[n + s] = axes[n + s], axes[s]
    return t.transpose(axes).reshape(m.shape)


def permute_subsystems(m: np.ndarray, dims, perm) -> np.ndarray:
    """Reorder subsystems so that the result's k-th subsystem is input subsystem ``perm[k]``.

    Rows and columns are permuted simultaneously, so the spectrum is unchanged.
    """
    dims = _as_dims(dims)
    m = np.asarray(m, dtype=complex)
    _check_square(m, dims)
    n = len(dims)
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{perm} is not a permutation of 0..{n - 1}")
    t = m.reshape(dims + dims)
    axes = perm + [p + n for p in perm]
    return t.transpose(axes).reshape(m.shape)


def max_entangled(d: int) -> np.ndarray:
    """Maximally entangled bipartite state (1/sqrt(d)) sum_k |k>|k> as a flat vector."""
    d = int(d)
    if d < 2:
        raise ValueError(f"maximally entangled state needs dimension >= 2, got {d}")
    v = np.zeros(d * d, dtype=complex)
    v[:: d + 1] = 1.0 / np.sqrt(d)
    return v


def hermitian_eig(m: np.ndarray, atol: float = EIG_RECON_ATOL):
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and
    eigenvectors as orthonormal columns. Rejects inputs whose deviation from
    Hermiticity exceeds ``atol``.
    """
    m = np.asarray(m, dtype=complex)
    dev = float(np.max(np.abs(m - dag(m))))
    if dev > atol:
        raise ValueError(f"matrix is not Hermitian within {atol} (deviation {dev:.3e})")
    w, v = np.linalg.eigh((m + dag(m)) / 2)
    return w, v


def as_rng(seed) -> np.random.Generator:
    """Coerce an integer seed (or pass through a Generator) to a numpy Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def haar_unitary(d: int, seed) -> np.ndarray:
    """Haar-distributed random unitary via QR of a complex Gaussian matrix.

    The diagonal of R is phase-corrected so the distribution is exactly Haar,
    not merely unitary. Deterministic for a fixed integer seed.
    """
    d = int(d)
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    rng = as_rng(seed)
    a = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(a)
    ph = np.diagonal(r).copy()
    ph /= np.abs(ph)
    return q * ph
