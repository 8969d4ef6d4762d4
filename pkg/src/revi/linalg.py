import numpy as np


def power_iteration_norm(matvec, dim, max_iter=200, tol=1e-10, seed=0):
    """Spectral norm of a symmetric linear map given only its action.

    Iterates ``v <- S v / ||S v||`` and returns ``||S v||``; for symmetric
    ``S`` this converges to ``max |lambda|`` even when eigenvalues of both
    signs share the top modulus.
    """
    if dim == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(max_iter):
        sv = matvec(v)
        nrm = np.linalg.norm(sv)
        if nrm == 0.0:
            return 0.0
        if abs(nrm - est) <= tol * nrm:
            return float(nrm)
        est = nrm
        v = sv / nrm
    return float(est)


def operator_norm(M, max_iter=200, tol=1e-10, seed=0):
    """Largest singular value of a (not necessarily symmetric) matrix."""
    M = np.asarray(M, dtype=float)
    return np.sqrt(power_iteration_norm(lambda v: M.T @ (M @ v), M.shape[1],
                                        max_iter, tol, seed))
