"""Dense reference matrices for the generalized qudit gates.

These are oracles for tests and tiny systems; the simulator never builds a
full operator. ``omega = exp(2*pi*i/d)`` throughout.
"""
from __future__ import annotations

import numpy as np

MAX_OPERATOR_DIM = 4096


class DomainError(ValueError):
    pass


class ResourceError(RuntimeError):
    pass


def _check_dim(d: int) -> None:
    if d < 2:
        raise DomainError(f"dimension must be >= 2, got {d}")


def omega(d: int) -> complex:
    return np.exp(2j * np.pi / d)


def build_x(d: int) -> np.ndarray:
    """Cyclic shift ``|k> -> |k+1 mod d>``."""
    _check_dim(d)
    return np.roll(np.eye(d, dtype=complex), 1, axis=0)


def build_z(d: int) -> np.ndarray:
    _check_dim(d)
    return np.diag(omega(d) ** np.arange(d))


def build_f(d: int) -> np.ndarray:
    """Generalized Hadamard, entry ``(j, k) = omega^(j*k) / sqrt(d)``."""
    _check_dim(d)
    j = np.arange(d)
    # exponent reduced mod d before exponentiating to keep entries exact-ish
    return np.exp(2j * np.pi * (np.outer(j, j) % d) / d) / np.sqrt(d)


def embed(u: np.ndarray, dim: int) -> np.ndarray:
    """Block-diagonal extension of ``u`` by identity up to ``dim`` levels."""
    m = u.shape[0]
    if m > dim:
        raise DomainError(f"cannot embed {m}x{m} block in dimension {dim}")
    out = np.eye(dim, dtype=complex)
    out[:m, :m] = u
    return out


def single_matrix(kind: str, modulus: int, dim: int | None = None) -> np.ndarray:
    """Matrix of a ``Single`` op kind on ``modulus`` levels, optionally embedded."""
    base = {
        "x": build_x,
        "xinv": lambda m: build_x(m).conj().T,
        "z": build_z,
        "f": build_f,
        "finv": lambda m: build_f(m).conj().T,
    }
    if kind not in base:
        raise DomainError(f"unknown single-qudit kind {kind!r}")
    u = base[kind](modulus)
    return u if dim is None else embed(u, dim)


def build_cinc(phys: int, v: int, m: int, delta: int = 1) -> np.ndarray:
    """Two-wire controlled increment on ``phys x phys`` levels, control first."""
    if not 0 <= v < phys:
        raise DomainError(f"control value {v} outside [0, {phys})")
    if not 2 <= m <= phys:
        raise DomainError(f"modulus {m} outside [2, {phys}]")
    if delta not in (1, -1):
        raise DomainError("delta must be +1 or -1")
    dim = phys * phys
    u = np.zeros((dim, dim), dtype=complex)
    for c in range(phys):
        for t in range(phys):
            t_new = (t + delta) % m if (c == v and t < m) else t
            u[c * phys + t_new, c * phys + t] = 1
    return u


def build_multi_toffoli(n: int, d: int) -> np.ndarray:
    """n-qudit Toffoli on ``d**n`` levels: X_d on the last wire iff all controls are d-1."""
    _check_dim(d)
    if n < 2:
        raise DomainError(f"need at least 2 qudits, got {n}")
    if n > 12 or d**n > MAX_OPERATOR_DIM:
        raise ResourceError(f"d**n = {d}**{n} exceeds the dense-operator guard {MAX_OPERATOR_DIM}")
    size = d**n
    u = np.eye(size, dtype=complex)
    u[size - d:, size - d:] = build_x(d)
    return u


def build_diffusion(n: int, d: int) -> np.ndarray:
    """Grover diffusion with ``2/d**n - 1`` on the diagonal and ``2/d**n`` elsewhere."""
    _check_dim(d)
    size = d**n
    if size > MAX_OPERATOR_DIM:
        raise ResourceError(f"d**n = {size} exceeds the dense-operator guard {MAX_OPERATOR_DIM}")
    return np.full((size, size), 2.0 / size, dtype=complex) - np.eye(size)


def kron_all(mats) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def is_unitary(u: np.ndarray, atol: float = 1e-10) -> bool:
    return u.shape[0] == u.shape[1] and np.allclose(u @ u.conj().T, np.eye(u.shape[0]), atol=atol, rtol=0)


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = 1e-9) -> bool:
    """Compare after dividing each matrix by the phase of its first nonzero entry."""
    if a.shape != b.shape:
        return False

    def normalize(m: np.ndarray) -> np.ndarray:
        flat = m.ravel()
        nz = np.flatnonzero(np.abs(flat) > atol)
        if nz.size == 0:
            return m
        ref = flat[nz[0]]
        return m * (abs(ref) / ref)

    return bool(np.allclose(normalize(a), normalize(b), atol=atol, rtol=0))
