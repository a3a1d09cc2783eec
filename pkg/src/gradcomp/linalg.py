"""Dense linear-algebra kernels for small control and optimization problems.

Everything here operates on plain ``numpy.float64`` arrays.  Problem sizes in
this package are tiny (n <= ~10), so the solvers favor simple, verifiable
fixed-point iterations with explicit residual checks over factorization-based
methods.  All randomized constructors are pure functions of the generator
state, so a fixed seed reproduces matrices bit-for-bit.
"""

from __future__ import annotations

import numpy as np


class NotConverged(RuntimeError):
    """An iterative solver exhausted its iteration budget."""


class SpectralRadiusError(RuntimeError):
    """A fixed-point iteration diverged (closed loop not stable)."""


class NotStabilizable(RuntimeError):
    """The Riccati solution does not yield a stabilizing feedback gain."""


def make_rng(seed: int) -> np.random.Generator:
    """Seeded deterministic generator (NumPy PCG64).

    Identical seeds produce identical streams on every platform for a given
    NumPy version; all randomized constructors in this package draw from a
    generator built here.
    """
    return np.random.Generator(np.random.PCG64(seed))


def gaussian_matrix(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """Matrix with i.i.d. standard-normal entries, advancing ``rng``."""
    if rows < 1 or cols < 1:
        raise ValueError(f"matrix shape must be positive, got ({rows}, {cols})")
    return rng.standard_normal((rows, cols))


def random_spd(rng: np.random.Generator, n: int, min_eig: float = 1e-8,
               max_attempts: int = 100) -> np.ndarray:
    """Random symmetric positive definite matrix P = M^T M with Gaussian M.

    The Gram construction guarantees symmetry and positive semidefiniteness;
    draws are rejected until the smallest eigenvalue exceeds ``min_eig`` so
    the result is strictly positive definite.
    """
    for _ in range(max_attempts):
        m = gaussian_matrix(rng, n, n)
        p = m.T @ m
        p = 0.5 * (p + p.T)  # remove round-off asymmetry from the product
        if np.linalg.eigvalsh(p).min() > min_eig:
            return p
    raise RuntimeError(f"no positive definite draw in {max_attempts} attempts")


def random_spd_with_spectral_radius(rng: np.random.Generator, n: int,
                                    radius: float) -> np.ndarray:
    """Random SPD matrix whose largest eigenvalue equals ``radius`` exactly.

    Built from a random orthogonal basis (QR factor of a Gaussian matrix) and
    eigenvalues drawn uniformly from (0, radius], with the largest one then
    pinned to ``radius``.
    """
    if n < 1:
        raise ValueError(f"dimension must be positive, got {n}")
    if radius <= 0:
        raise ValueError(f"spectral radius must be positive, got {radius}")
    v, _ = np.linalg.qr(gaussian_matrix(rng, n, n))
    lam = radius * (1.0 - rng.random(n))  # uniform on (0, radius]
    lam[np.argmax(lam)] = radius
    q = (v * lam) @ v.T
    return 0.5 * (q + q.T)


def solve_discrete_lyapunov(acl: np.ndarray, w: np.ndarray, tol: float = 1e-12,
                            max_iter: int = 100_000) -> np.ndarray:
    """Solve acl^T X acl - X + w = 0 for stable ``acl`` and symmetric ``w``.

    Uses the doubling-accelerated fixed-point iteration for
    X = sum_k (acl^T)^k w acl^k, stopping once the residual Frobenius norm is
    at most ``tol``.  The state-covariance equation X = w + acl X acl^T is the
    same problem with ``acl`` transposed.

    Raises ``SpectralRadiusError`` if the iterates blow up (spectral radius of
    ``acl`` not below one) and ``NotConverged`` if the budget runs out.
    """
    w = np.asarray(w, dtype=float)
    x = 0.5 * (w + w.T)
    m = np.asarray(acl, dtype=float).copy()
    blowup = 1e6 * max(1.0, np.linalg.norm(w, "fro"))
    for _ in range(max_iter):
        residual = np.linalg.norm(acl.T @ x @ acl - x + w, "fro")
        if residual <= tol:
            return x
        x = x + m.T @ x @ m
        x = 0.5 * (x + x.T)
        m = m @ m
        if np.linalg.norm(x, "fro") > blowup:
            raise SpectralRadiusError(
                "discrete Lyapunov iteration diverged; closed loop is not stable")
    raise NotConverged(f"discrete Lyapunov residual above {tol} after {max_iter} steps")


def solve_dare(a: np.ndarray, b: np.ndarray, q: np.ndarray, r: np.ndarray,
               tol: float = 1e-10, max_iter: int = 100_000) -> tuple[np.ndarray, np.ndarray]:
    """Discrete algebraic Riccati equation via fixed-point (value) iteration.

    Iterates P <- Q + A^T P A - A^T P B (R + B^T P B)^{-1} B^T P A from
    P0 = Q until the successive-iterate change has Frobenius norm <= tol,
    then returns (P, K) with K = (R + B^T P B)^{-1} B^T P A.  The closed loop
    A - B K is verified to be stable.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    p = 0.5 * (q + q.T)
    for _ in range(max_iter):
        btp = b.T @ p
        k = np.linalg.solve(r + btp @ b, btp @ a)
        p_next = q + a.T @ p @ a - a.T @ p @ b @ k
        p_next = 0.5 * (p_next + p_next.T)
        change = np.linalg.norm(p_next - p, "fro")
        p = p_next
        if change <= tol:
            btp = b.T @ p
            k = np.linalg.solve(r + btp @ b, btp @ a)
            if spectral_radius(a - b @ k) >= 1.0:
                raise NotStabilizable("Riccati gain does not stabilize the closed loop")
            return p, k
    raise NotConverged(f"Riccati iteration change above {tol} after {max_iter} steps")


def spectral_radius(m: np.ndarray, tol: float = 1e-10) -> float:
    """Largest eigenvalue magnitude of a square matrix.

    Computed from the dense (complex) eigenvalue spectrum, which is accurate
    to machine precision for the matrix sizes used here; ``tol`` is kept in
    the signature for interface stability and is not consulted.
    """
    del tol
    m = np.asarray(m, dtype=float)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix must be square, got shape {m.shape}")
    return float(np.abs(np.linalg.eigvals(m)).max())
