"""Hyperbolic toral automorphisms and volume-preserving shear perturbations.

The perturbed map is f = S_n o ... o S_1 o f_A, an integer hyperbolic matrix
followed by explicit sine shears.  Shears have closed-form inverses and unit
Jacobian determinant, so f is an exactly volume-preserving diffeomorphism with
an exact inverse f^{-1} = f_A^{-1} o S_1^{-1} o ... o S_n^{-1}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "IntMatrix2",
    "HyperbolicData",
    "ShearStep",
    "PerturbedCatMap",
    "ARNOLD",
    "analyze_matrix",
    "map_forward",
    "map_inverse",
    "jacobian_forward",
    "jacobian_inverse_sup",
    "cone_preservation_ratio",
]

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class IntMatrix2:
    """Integer 2x2 matrix (a b; c d)."""

    a: int
    b: int
    c: int
    d: int

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> int:
        return self.a + self.d

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=float)

    def inverse(self) -> "IntMatrix2":
        det = self.det
        if det not in (1, -1):
            raise ValueError("only unimodular matrices have integer inverses")
        return IntMatrix2(self.d * det, -self.b * det, -self.c * det, self.a * det)

    def inv_transpose(self) -> "IntMatrix2":
        inv = self.inverse()
        return IntMatrix2(inv.a, inv.c, inv.b, inv.d)

    def is_hyperbolic(self) -> bool:
        # exact integer test: no eigenvalue on the unit circle
        if self.det == 1:
            return abs(self.trace) > 2
        if self.det == -1:
            return self.trace != 0
        return False

    def apply_int(self, k: tuple[int, int]) -> tuple[int, int]:
        """Exact integer action, usable far beyond int64 ranges."""
        return (self.a * k[0] + self.b * k[1], self.c * k[0] + self.d * k[1])


ARNOLD = IntMatrix2(2, 1, 1, 1)


@dataclass(frozen=True)
class HyperbolicData:
    """Spectral data of a hyperbolic matrix: expanding eigenvalue magnitude,
    unit eigenvectors of A and A^T, and the inverse-Jacobian exponent
    Lambda = log ||A^{-1}||_2."""

    lambda_: float
    v_u: np.ndarray
    v_s: np.ndarray
    v_uT: np.ndarray
    v_sT: np.ndarray
    Lambda: float


def _unit_eigvecs(M: np.ndarray):
    """(expanding, contracting) unit eigenvectors with a deterministic sign."""
    w, V = np.linalg.eig(M)
    order = np.argsort(np.abs(w))  # contracting first
    vecs = []
    for idx in (order[1], order[0]):
        v = np.real_if_close(V[:, idx]).astype(float)
        v = v / np.linalg.norm(v)
        j = int(np.argmax(np.abs(v)))
        if v[j] < 0:
            v = -v
        vecs.append(v)
    return vecs[0], vecs[1]


def analyze_matrix(m: IntMatrix2) -> HyperbolicData:
    """Eigen-structure and Lambda for a hyperbolic unimodular matrix."""
    if m.det not in (1, -1):
        raise ValueError(f"matrix must have determinant +-1, got {m.det}")
    if not m.is_hyperbolic():
        raise ValueError("matrix has an eigenvalue on the unit circle (not hyperbolic)")
    A = m.as_array()
    w = np.linalg.eigvals(A)
    lam = float(np.max(np.abs(w)))
    v_u, v_s = _unit_eigvecs(A)
    v_uT, v_sT = _unit_eigvecs(A.T)
    Ainv = np.linalg.inv(A)
    Lambda = float(np.log(np.linalg.norm(Ainv, 2)))
    for vec, sign_lam in ((v_u, lam),):
        resid = np.linalg.norm(A @ vec - np.sign((A @ vec) @ vec) * sign_lam * vec)
        if resid > 1e-9:
            raise ValueError("eigenvector solve failed consistency check")
    return HyperbolicData(lam, v_u, v_s, v_uT, v_sT, Lambda)


@dataclass(frozen=True)
class ShearStep:
    """Sine shear along one axis: horizontal is (x, y) -> (x + a sin(2 pi m y), y)."""

    axis: str
    amplitude: float
    frequency: int = 1

    def __post_init__(self):
        if self.axis not in ("horizontal", "vertical"):
            raise ValueError("axis must be 'horizontal' or 'vertical'")
        if self.frequency < 1:
            raise ValueError("frequency must be a positive integer")

    def forward(self, pts: np.ndarray) -> np.ndarray:
        out = pts.copy()
        a, m = self.amplitude, self.frequency
        if self.axis == "horizontal":
            out[..., 0] = (pts[..., 0] + a * np.sin(TWO_PI * m * pts[..., 1])) % 1.0
        else:
            out[..., 1] = (pts[..., 1] + a * np.sin(TWO_PI * m * pts[..., 0])) % 1.0
        return out

    def inverse(self, pts: np.ndarray) -> np.ndarray:
        out = pts.copy()
        a, m = self.amplitude, self.frequency
        if self.axis == "horizontal":
            out[..., 0] = (pts[..., 0] - a * np.sin(TWO_PI * m * pts[..., 1])) % 1.0
        else:
            out[..., 1] = (pts[..., 1] - a * np.sin(TWO_PI * m * pts[..., 0])) % 1.0
        return out

    def jac(self, pts: np.ndarray) -> np.ndarray:
        """Jacobian DS at each point, shape (..., 2, 2); unit determinant."""
        a, m = self.amplitude, self.frequency
        J = np.zeros(pts.shape[:-1] + (2, 2))
        J[..., 0, 0] = 1.0
        J[..., 1, 1] = 1.0
        g = TWO_PI * m * a
        if self.axis == "horizontal":
            J[..., 0, 1] = g * np.cos(TWO_PI * m * pts[..., 1])
        else:
            J[..., 1, 0] = g * np.cos(TWO_PI * m * pts[..., 0])
        return J


@dataclass(frozen=True)
class PerturbedCatMap:
    """f = S_n o ... o S_1 o f_A with eps = sum |amplitude_i| as the size proxy."""

    matrix: IntMatrix2
    shears: tuple[ShearStep, ...] = ()

    def __post_init__(self):
        if not self.matrix.is_hyperbolic() or self.matrix.det not in (1, -1):
            raise ValueError("base matrix must be hyperbolic with determinant +-1")

    @property
    def eps(self) -> float:
        return float(sum(abs(s.amplitude) for s in self.shears))

    @property
    def is_pure(self) -> bool:
        return all(s.amplitude == 0.0 for s in self.shears)

    @staticmethod
    def pure(matrix: IntMatrix2 = ARNOLD) -> "PerturbedCatMap":
        return PerturbedCatMap(matrix, ())


def map_forward(pcm: PerturbedCatMap, pts: np.ndarray) -> np.ndarray:
    """f(x) for points in [0,1)^2 (vectorized over leading axes)."""
    x = np.asarray(pts, dtype=float)
    A = pcm.matrix.as_array()
    y = (x @ A.T) % 1.0
    for s in pcm.shears:
        y = s.forward(y)
    return y


def map_inverse(pcm: PerturbedCatMap, pts: np.ndarray) -> np.ndarray:
    """f^{-1}(x); exact by construction, f(f^{-1}(x)) = x mod 1."""
    y = np.asarray(pts, dtype=float)
    for s in reversed(pcm.shears):
        y = s.inverse(y)
    Ainv = pcm.matrix.inverse().as_array()
    return (y @ Ainv.T) % 1.0


def jacobian_forward(pcm: PerturbedCatMap, pts: np.ndarray) -> np.ndarray:
    """Df at each point via the chain rule through the shear stack."""
    x = np.asarray(pts, dtype=float)
    A = pcm.matrix.as_array()
    J = np.broadcast_to(A, x.shape[:-1] + (2, 2)).copy()
    y = (x @ A.T) % 1.0
    for s in pcm.shears:
        J = s.jac(y) @ J
        y = s.forward(y)
    return J


def _specnorm_2x2(M: np.ndarray) -> np.ndarray:
    """Largest singular value of a stack of 2x2 matrices, closed form."""
    t = np.sum(M * M, axis=(-2, -1))
    d = M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0]
    disc = np.sqrt(np.maximum(t * t - 4.0 * d * d, 0.0))
    return np.sqrt((t + disc) / 2.0)


def _grid_points(n: int) -> np.ndarray:
    u = (np.arange(n) + 0.5) / n
    X, Y = np.meshgrid(u, u, indexing="ij")
    return np.stack([X, Y], axis=-1).reshape(-1, 2)


def jacobian_inverse_sup(pcm: PerturbedCatMap, grid: int = 256, tol: float = 1e-6,
                         max_grid: int = 2048) -> float:
    """Lambda estimate: log of the grid-sampled sup of ||(Df_x)^{-1}||_2.

    The grid doubles until the estimate moves by less than tol.
    """
    if grid < 64:
        raise ValueError("grid must be at least 64")

    def estimate(n: int) -> float:
        pts = _grid_points(n)
        J = jacobian_forward(pcm, pts)
        Jinv = np.linalg.inv(J)
        return float(np.log(np.max(_specnorm_2x2(Jinv))))

    last = estimate(grid)
    n = grid
    while n < max_grid:
        n *= 2
        cur = estimate(n)
        if abs(cur - last) < tol:
            return cur
        last = cur
    return last


def cone_preservation_ratio(pcm: PerturbedCatMap, hyp: HyperbolicData,
                            grid: int = 48, n_dirs: int = 17) -> float:
    """Worst-case |a_s|/|a_u| of (D_x f^{-1})^T w over boundary directions w of
    the contracting-side cone; > 1 means the cone maps strictly inside itself.
    """
    pts = _grid_points(grid)
    # Df^{-1} at x equals (Df at f^{-1}x)^{-1}
    pre = map_inverse(pcm, pts)
    J = jacobian_forward(pcm, pre)
    JinvT = np.transpose(np.linalg.inv(J), (0, 2, 1))
    ts = np.linspace(-1.0, 1.0, n_dirs)
    basis = np.column_stack([hyp.v_uT, hyp.v_sT])
    binv = np.linalg.inv(basis)
    worst = np.inf
    for t in ts:
        w = hyp.v_sT + t * hyp.v_uT
        img = JinvT @ w
        a = img @ binv.T  # rows (a_u, a_s)
        ratio = np.abs(a[:, 1]) / np.maximum(np.abs(a[:, 0]), 1e-300)
        worst = min(worst, float(np.min(ratio)))
    return worst
