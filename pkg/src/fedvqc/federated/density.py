"""Averaging of density matrices: Hilbert-Schmidt barycenter and Schatten-q medians.

These are standalone tools; the training loop aggregates classical circuit
parameters instead.
"""

from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-9
SUPPORTED_Q = (1, 2)
METRICS = ("hilbert_schmidt",)


def density_violations(rho):
    rho = np.asarray(rho)
    problems = []
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return [f"not square: shape {rho.shape}"]
    d = rho.shape[0]
    if d < 1 or d & (d - 1):
        problems.append(f"dimension {d} is not a power of two")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm >= HERMITIAN_TOL:
        problems.append(f"not Hermitian (max deviation {herm:.3g})")
    tr = np.trace(rho)
    if abs(tr - 1) >= TRACE_TOL:
        problems.append(f"trace {tr:.12g} != 1")
    lam = np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0]
    if lam < -PSD_TOL:
        problems.append(f"negative eigenvalue {lam:.3g}")
    return problems


def is_density(rho):
    return not density_violations(rho)


@dataclass(frozen=True)
class DensityMatrix:
    entries: np.ndarray

    def __post_init__(self):
        rho = np.array(self.entries, dtype=complex)
        problems = density_violations(rho)
        if problems:
            raise ValueError("invalid density matrix: " + "; ".join(problems))
        rho.setflags(write=False)
        object.__setattr__(self, "entries", rho)

    @classmethod
    def from_pure(cls, psi):
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @property
    def dim(self):
        return self.entries.shape[0]


def _as_array(state):
    return state.entries if isinstance(state, DensityMatrix) else np.asarray(state, dtype=complex)


def _hermitize(a):
    return (a + a.conj().T) / 2


def project_clip(a):
    """Clip negative eigenvalues to zero and renormalise the trace."""
    lam, vec = np.linalg.eigh(_hermitize(a))
    lam = np.clip(lam, 0.0, None)
    if lam.sum() <= 0:
        lam = np.full_like(lam, 1.0 / lam.size)
    lam = lam / lam.sum()
    return _hermitize((vec * lam) @ vec.conj().T)


def project_simplex(v):
    """Euclidean projection of a real vector onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    tau = css[rho] / (rho + 1)
    return np.maximum(v - tau, 0.0)


def project_density(a):
    """Frobenius-nearest density matrix to the Hermitian part of ``a``."""
    lam, vec = np.linalg.eigh(_hermitize(a))
    lam = project_simplex(lam)
    return _hermitize((vec * lam) @ vec.conj().T)


def schatten_norm(a, q):
    """(sum_i s_i**q)**(1/q) over the singular values s_i of ``a``."""
    s = np.linalg.svd(np.asarray(a), compute_uv=False)
    if np.isinf(q):
        return float(s.max())
    return float(np.sum(s**q) ** (1.0 / q))


def _stack(states):
    if not states:
        raise ValueError("need at least one density matrix")
    mats = [_as_array(s) for s in states]
    shape = mats[0].shape
    if any(m.shape != shape for m in mats):
        raise ValueError(f"dimension mismatch: {[m.shape for m in mats]}")
    for m in mats:
        problems = density_violations(m)
        if problems:
            raise ValueError("input is not a density matrix: " + "; ".join(problems))
    return np.array(mats)


def riemannian_average(states, metric="hilbert_schmidt"):
    """argmin_rho sum_i d(rho, rho_i)**2 over density matrices.

    Under the Hilbert-Schmidt distance this is the arithmetic mean, which is
    already a density matrix; the clip-and-renormalise projection only absorbs
    rounding drift.
    """
    if metric not in METRICS:
        raise ValueError(f"unsupported metric {metric!r}; available: {METRICS}")
    mats = _stack(states)
    return DensityMatrix(project_clip(mats.mean(axis=0)))


def schatten_objective(rho, states, q):
    rho = _as_array(rho)
    return float(sum(schatten_norm(rho - _as_array(s), q) for s in states))


def _subgradient(rho, mats, q):
    g = np.zeros_like(rho)
    for m in mats:
        diff = _hermitize(rho - m)
        if q == 2:
            nrm = np.linalg.norm(diff)
            if nrm > 1e-15:
                g += diff / nrm
        else:
            lam, vec = np.linalg.eigh(diff)
            sgn = np.where(np.abs(lam) > 1e-15, np.sign(lam), 0.0)
            g += (vec * sgn) @ vec.conj().T
    return g


def _smoothed(rho, mats, q, mu):
    """Objective with |x| replaced by sqrt(x**2 + mu**2), and its gradient."""
    f = 0.0
    g = np.zeros_like(rho)
    for m in mats:
        diff = _hermitize(rho - m)
        if q == 2:
            r = np.sqrt(np.vdot(diff, diff).real + mu * mu)
            f += r
            g += diff / r
        else:
            lam, vec = np.linalg.eigh(diff)
            r = np.sqrt(lam**2 + mu * mu)
            f += r.sum()
            g += (vec * (lam / r)) @ vec.conj().T
    return f, g


@dataclass
class SolverInfo:
    iterations: int = 0
    objective: float = float("nan")
    converged: bool = False


def schatten_average(states, q=2, mu_start=1e-1, mu_stop=1e-10, stage_iter=3000, tol=1e-14, info=None):
    """argmin_rho sum_i ||rho - rho_i||_q over density matrices, q in {1, 2}.

    Starts from the Hilbert-Schmidt mean and returns it directly when a zero
    subgradient certifies it optimal. Otherwise runs projected gradient descent
    (backtracking step, projection onto the density set) on the smoothed
    objective, shrinking the smoothing ``mu`` tenfold per stage. The best
    iterate under the exact objective is returned.
    """
    if q not in SUPPORTED_Q:
        raise ValueError(f"Schatten q={q} not supported; use one of {SUPPORTED_Q}")
    mats = _stack(states)
    rho = project_clip(mats.mean(axis=0))
    best, best_obj = rho, schatten_objective(rho, mats, q)
    iterations = 0
    converged = np.linalg.norm(_subgradient(rho, mats, q)) < 1e-12
    mu = mu_start
    while not converged and mu >= mu_stop:
        f, g = _smoothed(rho, mats, q, mu)
        step = 1.0
        for _ in range(stage_iter):
            iterations += 1
            while True:
                nxt = project_density(rho - step * g)
                f_next, g_next = _smoothed(nxt, mats, q, mu)
                # sufficient decrease for projected gradient steps
                if f_next <= f - 0.5 / step * np.linalg.norm(nxt - rho) ** 2 or step < 1e-16:
                    break
                step *= 0.5
            moved = np.linalg.norm(nxt - rho)
            rho, f, g = nxt, f_next, g_next
            step *= 2.0
            obj = schatten_objective(rho, mats, q)
            if obj < best_obj:
                best, best_obj = rho, obj
            if moved < tol:
                break
        mu /= 10.0
    if info is not None:
        info.iterations, info.objective = iterations, best_obj
        info.converged = bool(converged or mu < mu_stop)
    return DensityMatrix(project_clip(best))
