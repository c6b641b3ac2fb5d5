"""Directional bases, projectors, frame-rotated gains and split interaction powers.

Wrenches and twists are plain 6-vectors in the world frame: force/linear part
first, moment/angular part second.  A directional basis selects the
force-controlled directions (C-space); its kernel is the motion/impedance
space (U-space).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ROTATION_TOL = 1e-10
SVD_CUTOFF = 1e-10


class InvalidRotationError(ValueError):
    """Raised when a 3x3 matrix is not a proper rotation."""


def check_rotation(R: np.ndarray) -> np.ndarray:
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise InvalidRotationError(f"rotation must be 3x3, got {R.shape}")
    if np.linalg.norm(R.T @ R - np.eye(3)) > 1e-8:
        raise InvalidRotationError("matrix is not orthonormal")
    if abs(np.linalg.det(R) - 1.0) > 1e-8:
        raise InvalidRotationError("matrix determinant is not +1")
    return R


def block_rotation(R: np.ndarray) -> np.ndarray:
    """blockdiag(R, R), the 6x6 rotation acting on wrenches and twists."""
    B = np.zeros((6, 6))
    B[:3, :3] = R
    B[3:, 3:] = R
    return B


def pattern_from_vector(v: np.ndarray, tol: float = 0.0) -> np.ndarray:
    """Binary selection pattern from the nonzero components of a 6-vector."""
    v = np.asarray(v, dtype=float)
    return (np.abs(v) > tol).astype(float)


@dataclass(frozen=True)
class DirectionalBasis:
    """A 6x6 directional matrix with its span and kernel projectors.

    ``span`` projects onto the controlled directions, ``kernel = I - span``
    onto their complement.  ``rank`` is the number of selected directions.
    """

    D: np.ndarray
    span: np.ndarray
    kernel: np.ndarray
    rank: int


def build_directional_basis(R: np.ndarray, pattern: np.ndarray) -> DirectionalBasis:
    """Build the directional matrix from a frame rotation and a binary pattern.

    Column i of D is the i-th frame axis embedded in the force (first three
    slots) or moment (last three slots) block, zeroed where the pattern is 0.
    The span projector is D (D^T D)^+ D^T with a rank-revealing pseudoinverse.
    """
    R = check_rotation(R)
    pattern = np.asarray(pattern, dtype=float)
    if pattern.shape != (6,) or not np.all((pattern == 0.0) | (pattern == 1.0)):
        raise ValueError("pattern must be a 6-vector with entries in {0, 1}")

    D = np.zeros((6, 6))
    D[:3, :3] = R
    D[3:, 3:] = R
    D = D @ np.diag(pattern)

    # span = D (D^T D)^+ D^T via SVD with relative singular-value cutoff
    U, s, _ = np.linalg.svd(D)
    if s[0] > 0.0:
        keep = s > SVD_CUTOFF * s[0]
    else:
        keep = np.zeros_like(s, dtype=bool)
    Uk = U[:, keep]
    span = Uk @ Uk.T
    span = 0.5 * (span + span.T)
    kernel = np.eye(6) - span
    return DirectionalBasis(D=D, span=span, kernel=kernel, rank=int(pattern.sum()))


_BASIS_CACHE: dict[tuple[bytes, bytes], DirectionalBasis] = {}


def directional_basis_cached(R: np.ndarray, pattern: np.ndarray) -> DirectionalBasis:
    """Memoized build_directional_basis (bases are constant within a scenario)."""
    key = (np.asarray(R, float).tobytes(), np.asarray(pattern, float).tobytes())
    basis = _BASIS_CACHE.get(key)
    if basis is None:
        basis = build_directional_basis(R, pattern)
        if len(_BASIS_CACHE) > 256:
            _BASIS_CACHE.clear()
        _BASIS_CACHE[key] = basis
    return basis


def interaction_powers(
    v: np.ndarray, f: np.ndarray, basis: DirectionalBasis
) -> tuple[float, float]:
    """Split the interaction power v^T f into C-space and U-space parts."""
    v = np.asarray(v, dtype=float)
    f = np.asarray(f, dtype=float)
    p_c = float(v @ (basis.span @ f))
    p_u = float(v @ (basis.kernel @ f))
    return p_c, p_u


def rotate_gain(K_frame: np.ndarray, R: np.ndarray) -> np.ndarray:
    """Express a force-frame gain matrix in the world frame.

    K = blockdiag(R, R) K_frame blockdiag(R, R)^T; symmetric with the same
    spectrum as K_frame.
    """
    R = check_rotation(R)
    B = block_rotation(R)
    K = B @ np.asarray(K_frame, dtype=float) @ B.T
    return 0.5 * (K + K.T)
