"""Numeric witnesses: orthonormal frames and orthogonal hyperplane arrangements.

Frames are found by damped Gauss-Newton on the Stiefel manifold.  Each step
solves the linearised residual over the tangent space (minimum-norm least
squares) and is pulled back to the manifold by the polar factor.

Measures are weighted point clouds.  Orthant masses of a cloud are piecewise
constant in the hyperplane parameters, so the equipartition search optimises
a sigmoid-smoothed surrogate with a shrinking bandwidth and then evaluates
the exact atomic masses.

A failed search is never a refutation, only an absence of evidence.
"""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import least_squares
from scipy.special import expit

log = logging.getLogger(__name__)

GRAM_TOL = 1e-10


class WitnessError(ValueError):
    pass


# ---------------------------------------------------------------------------
# odd symmetric functions


@dataclass(frozen=True)
class OddSymFunction:
    """f(x, y) = x^T A y * (1 + sum_j c_j (x^T B_j x)(y^T B_j y)).

    Odd in each argument and symmetric under swapping them for any symmetric
    ``A`` and ``B_j``.
    """

    bilinear: np.ndarray
    modulations: tuple[tuple[np.ndarray, float], ...] = ()

    @property
    def n(self) -> int:
        return self.bilinear.shape[0]

    def __call__(self, x: np.ndarray, y: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        scale = 1.0
        for b, c in self.modulations:
            scale += c * float(x @ b @ x) * float(y @ b @ y)
        return float(x @ self.bilinear @ y) * scale

    def pair_matrix(self, frame: np.ndarray) -> np.ndarray:
        """Matrix of values f(e_i, e_j) for the rows e_i of ``frame``."""
        g = frame @ self.bilinear @ frame.T
        scale = np.ones_like(g)
        for b, c in self.modulations:
            q = np.einsum("ij,jk,ik->i", frame, b, frame)
            scale += c * np.outer(q, q)
        return g * scale

    def pair_gradients(self, frame: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """d f(e_i, e_j) / d e_i and d f(e_i, e_j) / d e_j, shape (k, k, n) each."""
        a = self.bilinear
        g = frame @ a @ frame.T
        ay = frame @ a  # row j is A e_j
        scale = np.ones_like(g)
        dscale_x = np.zeros(g.shape + (self.n,))
        for b, c in self.modulations:
            q = np.einsum("ij,jk,ik->i", frame, b, frame)
            bx = frame @ b
            scale += c * np.outer(q, q)
            # d/dx_i of q_i q_j = 2 B e_i q_j
            dscale_x += c * 2.0 * bx[:, None, :] * q[None, :, None]
        dx = ay[None, :, :] * scale[:, :, None] + g[:, :, None] * dscale_x
        # symmetry: d/dy_j f(e_i, e_j) = d/dx f(e_j, e_i)
        dy = np.transpose(dx, (1, 0, 2))
        return dx, dy


def random_odd_sym(n: int, seed: int, n_modulations: int = 0, modulation_scale: float = 0.5) -> OddSymFunction:
    if n < 2:
        raise WitnessError("n must be >= 2")
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    mods = []
    for _ in range(n_modulations):
        b = rng.standard_normal((n, n))
        c = modulation_scale * rng.uniform(-1.0, 1.0)
        mods.append(((b + b.T) / 2.0, float(c)))
    return OddSymFunction((a + a.T) / 2.0, tuple(mods))


def inner_product(n: int) -> OddSymFunction:
    return OddSymFunction(np.eye(n))


# ---------------------------------------------------------------------------
# frames


@dataclass
class FrameResult:
    found: bool
    frame: np.ndarray
    residual: np.ndarray
    restarts: int
    iterations: int

    @property
    def residual_norm(self) -> float:
        return float(np.max(np.abs(self.residual))) if self.residual.size else 0.0

    def to_dict(self) -> dict:
        return {
            "found": self.found,
            "frame": self.frame.tolist(),
            "residual": self.residual.tolist(),
            "residual_inf": self.residual_norm,
            "restarts": self.restarts,
            "iterations": self.iterations,
        }


def gram_defect(frame: np.ndarray) -> float:
    k = frame.shape[0]
    return float(np.max(np.abs(frame @ frame.T - np.eye(k))))


def polar_retract(z: np.ndarray) -> np.ndarray:
    """Nearest matrix with orthonormal rows (polar factor)."""
    u, _, vt = np.linalg.svd(z, full_matrices=False)
    return u @ vt


def frame_residual(funcs: list[OddSymFunction], frame: np.ndarray) -> np.ndarray:
    """Values f_l(e_i, e_j), i < j, grouped by function."""
    frame = np.asarray(frame, dtype=float)
    k = frame.shape[0]
    if funcs and frame.shape[1] != funcs[0].n:
        raise WitnessError(f"frame dimension {frame.shape[1]} does not match functions ({funcs[0].n})")
    iu = np.triu_indices(k, 1)
    if not funcs:
        return np.zeros(0)
    return np.concatenate([f.pair_matrix(frame)[iu] for f in funcs])


def _residual_jacobian(funcs: list[OddSymFunction], frame: np.ndarray) -> np.ndarray:
    k, n = frame.shape
    iu, ju = np.triu_indices(k, 1)
    rows = []
    for f in funcs:
        dx, dy = f.pair_gradients(frame)
        for i, j in zip(iu, ju):
            row = np.zeros((k, n))
            row[i] += dx[i, j]
            row[j] += dy[i, j]
            rows.append(row.ravel())
    return np.array(rows).reshape(len(rows), k * n)


def _tangent_basis(frame: np.ndarray) -> np.ndarray:
    """Columns span the tangent space of the Stiefel manifold at ``frame`` (rows orthonormal)."""
    k, n = frame.shape
    q, _ = np.linalg.qr(frame.T, mode="complete")
    perp = q[:, k:].T  # (n - k, n)
    vecs = []
    for a, b in itertools.combinations(range(k), 2):
        d = np.zeros((k, n))
        d[a] += frame[b]
        d[b] -= frame[a]
        vecs.append(d.ravel() / np.sqrt(2.0))
    for a in range(k):
        for p in perp:
            d = np.zeros((k, n))
            d[a] = p
            vecs.append(d.ravel())
    return np.array(vecs).T


def _gauss_newton(funcs, frame, tol, max_iter=60):
    r = frame_residual(funcs, frame)
    it = 0
    for it in range(1, max_iter + 1):
        cost = float(np.max(np.abs(r)))
        if cost <= tol:
            return frame, r, it
        basis = _tangent_basis(frame)
        jac = _residual_jacobian(funcs, frame) @ basis
        step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        delta = (basis @ step).reshape(frame.shape)
        alpha = 1.0
        norm0 = float(r @ r)
        while alpha > 1e-6:
            cand = polar_retract(frame + alpha * delta)
            rc = frame_residual(funcs, cand)
            if float(rc @ rc) < norm0:
                frame, r = cand, rc
                break
            alpha *= 0.5
        else:
            break
    return frame, r, it


def _restart_rng(seed: int, restart: int) -> np.random.Generator:
    return np.random.default_rng([seed, restart])


def random_frame(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    return polar_retract(rng.standard_normal((k, n)))


def _one_restart(funcs, n, k, tol, seed, restart):
    frame0 = random_frame(n, k, _restart_rng(seed, restart))
    return _gauss_newton(funcs, frame0, tol)


def search_frame(
    funcs: list[OddSymFunction],
    n: int,
    k: int,
    tol: float = 1e-10,
    max_restarts: int = 200,
    seed: int = 0,
    workers: int = 1,
) -> FrameResult:
    """Multi-start search for an orthonormal k-frame zeroing every f_l(e_i, e_j)."""
    if tol <= 0:
        raise WitnessError("tol must be positive")
    if k > n:
        raise WitnessError("need k <= n")
    for f in funcs:
        if f.n != n:
            raise WitnessError(f"function dimension {f.n} does not match n={n}")
    best = None
    batch = max(1, workers)
    with ThreadPoolExecutor(max_workers=batch) if batch > 1 else _Serial() as pool:
        for start in range(0, max_restarts, batch):
            idx = range(start, min(start + batch, max_restarts))
            results = list(pool.map(lambda i: _one_restart(funcs, n, k, tol, seed, i), idx))
            for i, (frame, r, iters) in zip(idx, results):
                res = FrameResult(False, frame, r, i + 1, iters)
                if res.residual_norm <= tol and gram_defect(frame) <= GRAM_TOL:
                    res.found = True
                    return res
                if best is None or res.residual_norm < best.residual_norm:
                    best = res
    best.restarts = max_restarts
    log.info("no frame found; best residual %.3g", best.residual_norm)
    return best


class _Serial:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False

    def map(self, fn, items):
        return map(fn, items)


# ---------------------------------------------------------------------------
# measures and hyperplanes


@dataclass
class SampledMeasure:
    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != (self.points.shape[0],):
            raise WitnessError("one weight per point required")
        if np.any(self.weights <= 0):
            raise WitnessError("weights must be positive")
        self.weights = self.weights / self.weights.sum()

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @classmethod
    def uniform(cls, points: np.ndarray) -> SampledMeasure:
        points = np.asarray(points, dtype=float)
        return cls(points, np.full(len(points), 1.0 / len(points)))

    @classmethod
    def gaussian(cls, n: int, size: int, seed: int = 0, mean=None, cov=None) -> SampledMeasure:
        rng = np.random.default_rng(seed)
        pts = rng.standard_normal((size, n))
        if cov is not None:
            pts = pts @ np.linalg.cholesky(np.asarray(cov, dtype=float)).T
        if mean is not None:
            pts = pts + np.asarray(mean, dtype=float)
        return cls.uniform(pts)

    @classmethod
    def load(cls, path: str | Path) -> SampledMeasure:
        """Read one point per line: coordinates followed by the weight."""
        try:
            data = np.loadtxt(path, ndmin=2, comments="#", delimiter=None)
        except ValueError as exc:
            raise WitnessError(f"malformed measure file {path}: {exc}") from exc
        if data.shape[1] < 2:
            raise WitnessError(f"measure file {path} needs coordinates and a weight per line")
        return cls(data[:, :-1], data[:, -1])

    def save(self, path: str | Path) -> None:
        np.savetxt(path, np.column_stack([self.points, self.weights]), fmt="%.17g")


@dataclass
class HyperplaneArrangement:
    normals: np.ndarray
    offsets: np.ndarray
    orth: bool = False

    def __post_init__(self) -> None:
        self.normals = np.atleast_2d(np.asarray(self.normals, dtype=float))
        self.offsets = np.asarray(self.offsets, dtype=float).reshape(-1)
        norms = np.linalg.norm(self.normals, axis=1)
        if np.any(norms == 0):
            raise WitnessError("hyperplane normals must be nonzero")
        self.offsets = self.offsets / norms
        self.normals = self.normals / norms[:, None]
        if self.orth and gram_defect(self.normals) > GRAM_TOL:
            raise WitnessError("normals are not orthonormal")

    @property
    def k(self) -> int:
        return self.normals.shape[0]

    def to_dict(self) -> dict:
        return {"normals": self.normals.tolist(), "offsets": self.offsets.tolist(), "orth": self.orth}


def halving_offset(measure: SampledMeasure, direction: np.ndarray) -> float:
    """Offset of the hyperplane orthogonal to ``direction`` that halves the measure.

    Weighted median of the projections; when the cumulative weight hits 1/2
    exactly between two atoms, the midpoint is returned.
    """
    direction = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(direction)
    if norm == 0:
        raise WitnessError("direction must be nonzero")
    proj = measure.points @ (direction / norm)
    order = np.argsort(proj, kind="stable")
    p, w = proj[order], measure.weights[order]
    cum = np.cumsum(w)
    i = int(np.searchsorted(cum, 0.5 - 1e-12))
    if i >= len(p) - 1:
        return float(p[-1])
    if abs(cum[i] - 0.5) <= 1e-12:
        return float((p[i] + p[i + 1]) / 2.0)
    return float(p[i])


def _side_signs(measure: SampledMeasure, arrangement: HyperplaneArrangement) -> np.ndarray:
    return measure.points @ arrangement.normals.T - arrangement.offsets


def orthant_masses(measure: SampledMeasure, arrangement: HyperplaneArrangement) -> np.ndarray:
    """Masses of the 2^k open orthants.

    Orthant ``s`` has bit ``i`` set when it lies on the negative side of
    hyperplane ``i``.  Atoms on a hyperplane belong to no orthant.
    """
    vals = _side_signs(measure, arrangement)
    interior = np.all(vals != 0, axis=1)
    bits = (vals < 0).astype(np.int64) @ (1 << np.arange(arrangement.k))
    return np.bincount(bits[interior], weights=measure.weights[interior], minlength=1 << arrangement.k)


def subset_orthant_masses(measure: SampledMeasure, arrangement: HyperplaneArrangement, subset) -> np.ndarray:
    sub = HyperplaneArrangement(arrangement.normals[list(subset)], arrangement.offsets[list(subset)])
    return orthant_masses(measure, sub)


def equipartition_error(measures, arrangement: HyperplaneArrangement, l: int) -> float:
    """Largest deviation from 2^-l over all l-subsets, measures and orthants."""
    worst = 0.0
    for subset in itertools.combinations(range(arrangement.k), l):
        for mu in measures:
            masses = subset_orthant_masses(mu, arrangement, subset)
            worst = max(worst, float(np.max(np.abs(masses - 2.0**-l))))
    return worst


@dataclass
class EquipartitionResult:
    found: bool
    arrangement: HyperplaneArrangement
    error: float
    mode: str
    restarts: int
    attempts: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "found": self.found,
            "arrangement": self.arrangement.to_dict(),
            "max_deviation": self.error,
            "mode": self.mode,
            "restarts": self.restarts,
            "attempts": list(self.attempts),
        }


def _smooth_masses(points, weights, normals, offsets, l_subsets, h):
    # sigmoid-smoothed orthant masses for every subset, flattened
    s = (points @ normals.T - offsets) / h
    pos = expit(s)
    neg = 1.0 - pos
    out = []
    for subset in l_subsets:
        for signs in itertools.product((0, 1), repeat=len(subset)):
            prod = weights.copy()
            for i, neg_side in zip(subset, signs):
                prod = prod * (neg[:, i] if neg_side else pos[:, i])
            out.append(prod.sum())
    return np.array(out)


def _smooth_halving(points, weights, normal, h, start):
    # solve sum w * sigmoid((p - a)/h) = 1/2 for a by Newton steps
    proj = points @ normal
    a = start
    for _ in range(30):
        z = expit((proj - a) / h)
        f = float(weights @ z) - 0.5
        df = -float(weights @ (z * (1 - z))) / h
        if df == 0:
            break
        step = f / df
        a -= step
        if abs(step) < 1e-12:
            break
    return a


def search_equipartition(
    measures: list[SampledMeasure],
    n: int,
    k: int,
    l: int,
    orth: bool = True,
    tol: float = 5e-3,
    max_restarts: int = 20,
    seed: int = 0,
    mode: str = "auto",
    subsample: int = 20000,
) -> EquipartitionResult:
    """Search k hyperplanes (mutually orthogonal if ``orth``) such that any l equipart every measure.

    ``mode`` selects how offsets are parameterised for orthogonal searches:
    ``"halving"`` ties every offset to the halving hyperplane of the first
    measure, ``"free"`` optimises offsets directly and ``"auto"`` tries
    halving first.
    """
    if not 1 <= l <= k:
        raise WitnessError("need 1 <= l <= k")
    if not measures:
        raise WitnessError("at least one measure is required")
    for mu in measures:
        if mu.dim != n:
            raise WitnessError(f"measure dimension {mu.dim} does not match n={n}")
    if orth and k > n:
        raise WitnessError("cannot fit more than n orthogonal hyperplanes")
    if mode not in ("auto", "halving", "free"):
        raise WitnessError(f"unknown mode {mode!r}")
    modes = ["free"] if not orth else (["halving", "free"] if mode == "auto" else [mode])

    subsets = list(itertools.combinations(range(k), l))
    target = 2.0**-l
    attempts = []
    best = None
    restarts = 0
    for md in modes:
        for restart in range(max_restarts):
            restarts += 1
            rng = _restart_rng(seed, restart)
            arrangement = _equipartition_restart(measures, n, k, subsets, target, orth, md, rng, subsample)
            err = equipartition_error(measures, arrangement, l)
            attempts.append({"mode": md, "restart": restart, "max_deviation": err})
            res = EquipartitionResult(err <= tol, arrangement, err, md, restarts, attempts)
            if res.found:
                return res
            if best is None or err < best.error:
                best = res
    best.restarts = restarts
    best.attempts = attempts
    return best


def _equipartition_restart(measures, n, k, subsets, target, orth, mode, rng, subsample):
    clouds = []
    for mu in measures:
        if len(mu.weights) > subsample:
            idx = rng.choice(len(mu.weights), size=subsample, replace=False)
            pts, w = mu.points[idx], mu.weights[idx]
            clouds.append((pts, w / w.sum()))
        else:
            clouds.append((mu.points, mu.weights))
    first_pts, first_w = clouds[0]
    spread = float(np.sqrt(np.average(np.sum((first_pts - first_w @ first_pts) ** 2, axis=1), weights=first_w) / n))
    halving = orth and mode == "halving"

    z0 = rng.standard_normal((k, n))
    normals0 = polar_retract(z0) if orth else z0 / np.linalg.norm(z0, axis=1, keepdims=True)
    offsets0 = np.array([halving_offset(SampledMeasure(first_pts, first_w), v) for v in normals0])

    def unpack(x, h):
        z = x[: k * n].reshape(k, n)
        normals = polar_retract(z) if orth else z / np.linalg.norm(z, axis=1, keepdims=True)
        if halving:
            offsets = np.array(
                [_smooth_halving(first_pts, first_w, v, h, float(first_w @ (first_pts @ v))) for v in normals]
            )
        else:
            offsets = x[k * n :]
        return normals, offsets

    x = normals0.ravel() if halving else np.concatenate([normals0.ravel(), offsets0])
    for h in (0.2 * spread, 0.05 * spread, 0.01 * spread):

        def resid(xv, h=h):
            normals, offsets = unpack(xv, h)
            return np.concatenate(
                [_smooth_masses(pts, w, normals, offsets, subsets, h) - target for pts, w in clouds]
            )

        sol = least_squares(resid, x, method="trf", diff_step=1e-6, xtol=1e-12, ftol=1e-12, max_nfev=200)
        x = sol.x

    normals, offsets = unpack(x, 0.01 * spread)
    if halving:
        full = measures[0]
        offsets = np.array([halving_offset(full, v) for v in normals])
    return HyperplaneArrangement(normals, offsets, orth=orth)
