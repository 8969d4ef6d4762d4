"""Problem generators: box-simplex games, distributed ridge regression under
similarity, and a synthetic affine family with a known solution.

All generators draw from ``numpy.random.default_rng(seed)`` so regenerating
with the same seed reproduces bit-identical data.
"""

import dataclasses
import json
from dataclasses import dataclass, field

import numpy as np

from .core import VIProblem
from .errors import InfeasibleError
from .geometry import BoxSimplexGeometry, EuclideanGeometry, QuadraticGeometry
from .kernels import QuadraticFormBallKernel
from .linalg import power_iteration_norm
from .sets import Box, EuclideanBall, Product, Simplex

__all__ = ["BoxSimplexInstance", "ErmInstance", "SyntheticAffineVI", "make_box_simplex",
           "box_simplex_problem", "erm_problem", "synthetic_problem",
           "eval_box_simplex_operator", "box_simplex_start", "make_erm", "eval_erm_gradient",
           "estimate_similarity", "erm_start", "erm_reference_solution",
           "make_synthetic_affine", "with_radial_noise", "save_instance", "load_instance"]

CAUCHY_CLAMP = 1e6
CAUCHY_GAMMA = 1e-2


# -- box-simplex games --------------------------------------------------------

@dataclass(eq=False)
class BoxSimplexInstance:
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    mu_y: float
    mu_z: float
    seed: int
    entropy_scale: float = None

    def __post_init__(self):
        self.abs_A = np.abs(self.A)
        self.inf_norm_A = float(np.max(self.abs_A.sum(axis=1)))
        if self.entropy_scale is None:
            self.entropy_scale = 10.0 * self.inf_norm_A

    @property
    def n(self):
        return self.b.shape[0]


def eval_box_simplex_operator(instance, x, floor=1e-300, tol=1e-9):
    """Regularized game operator

        g(y, z) = (A^T z + c + mu_y grad_y d,  b - A y + mu_z grad_z d)

    with grad_y d = 2 y (|A|^T z) and grad_z d = |A| y^2 + s (ln z + 1).
    """
    n = instance.n
    x = np.asarray(x, dtype=float)
    y, z = x[:n], x[n:]
    if (x.shape != (2 * n,) or np.any(np.abs(y) > 1 + tol) or np.any(z < -tol)
            or abs(z.sum() - 1.0) > tol * n):
        raise InfeasibleError("box-simplex operator needs y in [-1, 1]^n, z in the simplex")
    A, absA = instance.A, instance.abs_A
    gy = A.T @ z + instance.c
    gz = instance.b - A @ y
    if instance.mu_y:
        gy = gy + instance.mu_y * 2.0 * y * (absA.T @ z)
    if instance.mu_z:
        gz = gz + instance.mu_z * (absA @ (y * y)
                                   + instance.entropy_scale * (np.log(np.maximum(z, floor)) + 1.0))
    return np.concatenate([gy, gz])


def make_box_simplex(n, mu_y, mu_z, seed, entropy_scale=None, A=None):
    """Random game with A = B B^T, B_ij ~ U[0, 0.001] and b, c ~ U[0, 1].

    Passing ``A`` overrides the generated matrix (b and c are still drawn).
    Returns ``(instance, problem)``; the problem's mu is min(mu_y, mu_z).
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    rng = np.random.default_rng(seed)
    B = rng.uniform(0.0, 1e-3, size=(n, n))
    b = rng.uniform(0.0, 1.0, size=n)
    c = rng.uniform(0.0, 1.0, size=n)
    notes = {}
    if A is None:
        A = B @ B.T
        A = 0.5 * (A + A.T)
    A = np.asarray(A, dtype=float)
    inst = BoxSimplexInstance(A, b, c, float(mu_y), float(mu_z), int(seed), entropy_scale)
    if not inst.entropy_scale > 0:
        inst.entropy_scale = 1.0
        notes["entropy_scale_fallback"] = "||A||_inf = 0, entropy scale set to 1"
    return inst, box_simplex_problem(inst, notes)


def box_simplex_problem(inst, notes=None):
    """VI of a box-simplex instance: regularized operator, its geometry, mu = min(mu_y, mu_z)."""
    n, A = inst.n, inst.A
    Q = Product((Box.cube(n), Simplex(n)))
    geometry = BoxSimplexGeometry(A, scale=inst.entropy_scale)
    linear_part = np.block([[np.zeros((n, n)), A.T], [-A, np.zeros((n, n))]])
    return VIProblem(
        operator=lambda x: eval_box_simplex_operator(inst, x),
        Q=Q, geometry=geometry, mu=min(inst.mu_y, inst.mu_z),
        linear_part=linear_part, name="box_simplex", notes=dict(notes or {}), instance=inst)


def box_simplex_start(n, seed):
    """Shared random starting point: U[0, 1] entries, y kept in the box, z normalized."""
    rng = np.random.default_rng([int(seed), 1])
    y = np.clip(rng.uniform(0.0, 1.0, size=n), -1.0, 1.0)
    z = rng.uniform(0.0, 1.0, size=n)
    return np.concatenate([y, z / z.sum()])


# -- distributed ridge regression ----------------------------------------------

@dataclass(eq=False)
class ErmInstance:
    """Worker data ``A[j]`` (s x n) and ``b[j]`` (s,) for j = 1..m."""

    A: np.ndarray
    b: np.ndarray
    lam: float
    gamma: float
    seed: int
    distribution: str
    clamped_entries: int = 0
    communication_rounds: int = field(default=0, compare=False)

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def s(self):
        return self.A.shape[1]

    @property
    def n(self):
        return self.A.shape[2]

    def hessian(self):
        """Constant Hessian of F."""
        G = np.einsum("jsn,jsk->nk", self.A, self.A) / (self.m * self.s)
        return G + 2.0 * self.lam * np.eye(self.n)

    def prox_hessian(self):
        """Hessian of d = f_1 + (gamma / 2) ||x||^2."""
        A1 = self.A[0]
        return A1.T @ A1 / self.s + (2.0 * self.lam + self.gamma) * np.eye(self.n)


def eval_erm_gradient(instance, x):
    """grad F(x) = (1/m) sum_j [(1/s) A_j^T (A_j x - b_j) + 2 lam x]; one communication round."""
    instance.communication_rounds += 1
    r = np.einsum("jsn,n->js", instance.A, x) - instance.b
    worker = np.einsum("jsn,js->jn", instance.A, r) / instance.s + 2.0 * instance.lam * x
    return worker.mean(axis=0)


def estimate_similarity(instance, max_iter=200, tol=1e-10):
    """Spectral norm of (1/s)(A_1^T A_1 - (1/m) sum_j A_j^T A_j) by power iteration.

    Hessians of ridge losses are constant, so this is the exact similarity
    constant between f_1 and F.
    """
    if instance.m == 1:
        return 0.0
    A1 = instance.A[0]
    S = (A1.T @ A1 - np.einsum("jsn,jsk->nk", instance.A, instance.A) / instance.m) / instance.s
    S = 0.5 * (S + S.T)
    return power_iteration_norm(lambda v: S @ v, instance.n, max_iter=max_iter, tol=tol)


def make_erm(n, s, m, lam, distribution="exponential", seed=0, gamma=None, mu_mode="relative"):
    """Ridge regression split over m workers, posed as the VI with g = grad F.

    Q is the unit Euclidean ball and the geometry is d = f_1 + (gamma/2)||x||^2.
    ``gamma`` defaults to the estimated similarity for exponential data and to
    1e-2 for Cauchy data.  ``mu_mode`` selects the constant handed to solvers:
    ``"relative"`` gives 2 lam / (2 lam + 2 gamma), ``"euclidean"`` gives 2 lam.
    """
    if min(n, s, m) < 1:
        raise ValueError("dimensions must be positive")
    rng = np.random.default_rng(seed)
    notes = {}
    if distribution == "exponential":
        A = rng.exponential(1.0, size=(m, s, n))
        clamped = 0
    elif distribution == "cauchy":
        A = rng.standard_cauchy(size=(m, s, n))
        clamped = int(np.count_nonzero(np.abs(A) > CAUCHY_CLAMP))
        A = np.clip(A, -CAUCHY_CLAMP, CAUCHY_CLAMP)
        if clamped:
            notes["cauchy_clamped_entries"] = clamped
    else:
        raise ValueError(f"unknown distribution {distribution!r}")
    b = rng.uniform(0.0, 1.0, size=(m, s))
    inst = ErmInstance(A, b, float(lam), 0.0, int(seed), distribution, clamped)
    if gamma is None:
        gamma = estimate_similarity(inst) if distribution == "exponential" else CAUCHY_GAMMA
        if distribution == "exponential" and gamma <= 0:
            gamma = 1e-12
            notes["gamma_floor"] = "similarity estimate is 0; gamma set to 1e-12"
    else:
        notes["gamma_override"] = float(gamma)
    inst.gamma = float(gamma)
    notes["gamma"] = inst.gamma

    return inst, erm_problem(inst, mu_mode, notes)


def erm_problem(inst, mu_mode="relative", notes=None):
    """VI with g = grad F over the unit ball, geometry d = f_1 + (gamma/2)||x||^2."""
    notes = dict(notes or {})
    A1, b1 = inst.A[0], inst.b[0]
    n, s = inst.n, inst.s
    geometry = QuadraticGeometry(inst.prox_hessian(), h=-A1.T @ b1 / s, c0=b1 @ b1 / (2 * s))
    mu_euc = 2.0 * inst.lam
    if mu_mode == "relative":
        mu = mu_euc / (mu_euc + 2.0 * inst.gamma)
    elif mu_mode == "euclidean":
        mu = mu_euc
        notes["mu_mode"] = "euclidean"
    else:
        raise ValueError(f"unknown mu_mode {mu_mode!r}")
    # with hess F <= hess d (in the Loewner order) the operator is relatively
    # 1-smooth by Cauchy-Schwarz in the d-norm; check it rather than assume it
    gap_min = np.linalg.eigvalsh(geometry.H - inst.hessian())[0]
    L_rel = 1.0 if gap_min >= -1e-10 * np.linalg.norm(geometry.H, 2) else None
    if L_rel is None:
        notes["hessian_dominated"] = False
    return VIProblem(
        operator=lambda x: eval_erm_gradient(inst, x),
        Q=EuclideanBall(np.zeros(n), 1.0), geometry=geometry, mu=mu,
        gradient_field=True, linear_part=inst.hessian(), relative_smoothness=L_rel,
        name="erm", notes=notes, instance=inst)


def erm_start(n):
    """x_0 = (1/sqrt(n), ..., 1/sqrt(n))."""
    return np.full(n, 1.0 / np.sqrt(n))


def erm_reference_solution(instance):
    """Exact minimizer of F over the unit ball (F is a strongly convex quadratic)."""
    r = np.einsum("jsn,js->n", instance.A, instance.b) / (instance.m * instance.s)
    kernel = QuadraticFormBallKernel(instance.hessian())
    return kernel.mirror(EuclideanBall(np.zeros(instance.n), 1.0), r)


# -- synthetic affine VIs with a known solution -----------------------------------

@dataclass(eq=False)
class SyntheticAffineVI:
    M: np.ndarray
    z_star: np.ndarray
    Q: EuclideanBall
    mu: float
    L: float
    seed: int


def make_synthetic_affine(n, mu, L, seed=0):
    """g(x) = M (x - z*) with M = U^T diag(lam) U, lam log-uniform on [mu, L].

    Both endpoints of the spectrum are attained; Q is the Euclidean ball
    centred at 0 with radius 2 ||z*|| + 1 and the geometry is Euclidean.
    """
    if not 0 < mu <= L:
        raise ValueError("need 0 < mu <= L")
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((n, n))
    U, R = np.linalg.qr(G)
    U = U * np.sign(np.diag(R))
    t = rng.random(n)
    t[0] = 0.0
    if n > 1:
        t[-1] = 1.0
    lam = np.exp(np.log(mu) + t * (np.log(L) - np.log(mu)))
    M = U @ np.diag(lam) @ U.T
    M = 0.5 * (M + M.T)
    z_star = rng.standard_normal(n)
    Q = EuclideanBall(np.zeros(n), 2.0 * np.linalg.norm(z_star) + 1.0)
    inst = SyntheticAffineVI(M, z_star, Q, float(mu), float(L), int(seed))
    return inst, synthetic_problem(inst)


def synthetic_problem(inst):
    """Euclidean VI with g(x) = M (x - z*), a gradient field with known solution z*."""
    M, z_star = inst.M, inst.z_star
    return VIProblem(
        operator=lambda x: M @ (x - z_star), Q=inst.Q, geometry=EuclideanGeometry(),
        mu=inst.mu, known_solution=z_star, gradient_field=True, linear_part=M,
        relative_smoothness=inst.L, name="synthetic", instance=inst)


def with_radial_noise(problem, amplitude, seed=0):
    """Copy of ``problem`` whose oracle adds a bounded random radial perturbation

        e(x) = amplitude * U * (x - z*) / ||x - z*||,   U ~ U[0, 1] per call.

    The perturbation is at most ``amplitude`` in norm, points away from the
    solution (so z* still solves the VI and strong monotonicity towards z*
    survives) and is discontinuous at z*, so the operator is only smooth up to
    an additive slack.
    """
    z_star = problem.known_solution
    if z_star is None:
        raise ValueError("radial noise needs a problem with a known solution")
    base = problem.operator
    rng = np.random.default_rng(seed)

    def noisy(x):
        diff = x - z_star
        nrm = np.linalg.norm(diff)
        u = rng.random()
        if nrm == 0.0:
            return base(x)
        return base(x) + (amplitude * u / nrm) * diff

    notes = dict(problem.notes, noise_amplitude=float(amplitude), noise_seed=int(seed))
    return dataclasses.replace(problem, operator=noisy, notes=notes, oracle_counter=0,
                               relative_smoothness=None, gradient_field=False)


# -- archives ---------------------------------------------------------------

_FORMAT = 1


def save_instance(instance, path):
    """Write an instance to a self-describing ``.npz`` archive.

    Arrays are stored row-major as little-endian float64; a JSON header holds
    the kind, dimensions, seed and scalar parameters.
    """
    f8 = np.dtype("<f8")
    if isinstance(instance, BoxSimplexInstance):
        header = {"kind": "box_simplex", "n": instance.n, "seed": instance.seed,
                  "mu_y": instance.mu_y, "mu_z": instance.mu_z,
                  "entropy_scale": instance.entropy_scale}
        arrays = {"A": instance.A, "b": instance.b, "c": instance.c}
    elif isinstance(instance, ErmInstance):
        header = {"kind": "erm", "m": instance.m, "s": instance.s, "n": instance.n,
                  "seed": instance.seed, "lam": instance.lam, "gamma": instance.gamma,
                  "distribution": instance.distribution,
                  "clamped_entries": instance.clamped_entries}
        arrays = {"A": instance.A, "b": instance.b}
    elif isinstance(instance, SyntheticAffineVI):
        header = {"kind": "synthetic", "n": len(instance.z_star), "seed": instance.seed,
                  "mu": instance.mu, "L": instance.L, "radius": instance.Q.radius}
        arrays = {"M": instance.M, "z_star": instance.z_star}
    else:
        raise TypeError(f"cannot serialize {type(instance).__name__}")
    header["format"] = _FORMAT
    header["dtype"] = "<f8"
    header["order"] = "C"
    payload = {k: np.ascontiguousarray(v, dtype=f8) for k, v in arrays.items()}
    with open(path, "wb") as fh:
        np.savez(fh, header=np.array(json.dumps(header, sort_keys=True)), **payload)


def load_instance(path):
    with np.load(path, allow_pickle=False) as data:
        header = json.loads(str(data["header"]))
        arrays = {k: np.array(data[k], dtype=np.float64) for k in data.files if k != "header"}
    kind = header["kind"]
    if kind == "box_simplex":
        return BoxSimplexInstance(arrays["A"], arrays["b"], arrays["c"], header["mu_y"],
                                  header["mu_z"], header["seed"], header["entropy_scale"])
    if kind == "erm":
        return ErmInstance(arrays["A"], arrays["b"], header["lam"], header["gamma"],
                           header["seed"], header["distribution"], header["clamped_entries"])
    if kind == "synthetic":
        z_star = arrays["z_star"]
        Q = EuclideanBall(np.zeros(len(z_star)), header["radius"])
        return SyntheticAffineVI(arrays["M"], z_star, Q, header["mu"], header["L"], header["seed"])
    raise ValueError(f"unknown instance kind {kind!r}")
