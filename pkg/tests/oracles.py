"""Independent reference implementations the tests check the package against.

Everything here deliberately avoids the package's linear-algebra paths:
inverses come from cofactor expansion, projections from explicit
normal-equation assembly, and the global-optimum search from vectorized
random sampling plus coordinate scans over raw arrays.
"""

import numpy as np


def cofactor_inverse_3x3(m):
    """Inverse of a 3x3 matrix by cofactor expansion (adjugate over determinant)."""
    m = np.asarray(m, dtype=float)
    cof = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            minor = np.delete(np.delete(m, i, axis=0), j, axis=1)
            cof[i, j] = (-1) ** (i + j) * (minor[0, 0] * minor[1, 1] - minor[0, 1] * minor[1, 0])
    det = m[0, 0] * cof[0, 0] + m[0, 1] * cof[0, 1] + m[0, 2] * cof[0, 2]
    return cof.T / det


def projector_by_cofactor(s):
    """Orthogonal projector via explicit Gram inversion by cofactors."""
    s = np.asarray(s, dtype=float)
    return s @ cofactor_inverse_3x3(s.T @ s) @ s.T


def batched_vora(filters, camera, observer):
    """Vora-Value of diag(f) @ camera against observer for each row of ``filters``.

    Independent scoring route: orthonormalizes the observer with its own QR
    and evaluates trace(G^-1 W W^T)/3 slice by slice with stacked solves.
    Rank-deficient slices score -inf.
    """
    basis, _ = np.linalg.qr(np.asarray(observer, dtype=float))
    a = filters[:, :, None] * camera[None, :, :]
    singular = np.linalg.svd(a, compute_uv=False)
    ok = singular[:, -1] > 1e-10 * singular[:, 0]
    gram = a.transpose(0, 2, 1) @ a
    gram[~ok] = np.eye(3)
    w = a.transpose(0, 2, 1) @ basis
    values = np.einsum("kij,kij->k", np.linalg.solve(gram, w), w) / 3.0
    return np.where(ok, values, -np.inf)


def random_search_best(camera, observer, rng, samples=100_000):
    """Best Vora-Value found by dense random search plus coordinate refinement.

    Draws ``samples`` filters uniform in (0, 1], keeps the best, then runs
    cyclic per-wavelength scans with a shrinking radius until no 21-point scan
    improves and the radius is below 1e-7.
    """
    n = camera.shape[0]
    candidates = 1.0 - rng.random((samples, n))
    scores = batched_vora(candidates, camera, observer)
    best_index = int(np.argmax(scores))
    best = candidates[best_index].copy()
    best_score = float(scores[best_index])

    radius = 0.5
    for _ in range(400):
        improved = False
        for i in range(n):
            trials = np.repeat(best[None, :], 21, axis=0)
            trials[:, i] = best[i] + np.linspace(-radius, radius, 21)
            trial_scores = batched_vora(trials, camera, observer)
            j = int(np.argmax(trial_scores))
            if trial_scores[j] > best_score:
                best_score = float(trial_scores[j])
                best = trials[j].copy()
                improved = True
        if not improved:
            radius *= 0.5
            if radius < 1e-7:
                break
    return best_score, best


def central_difference_gradient(objective, f, h=1e-6):
    """Central finite differences of a scalar objective at f, one entry at a time."""
    f = np.asarray(f, dtype=float)
    grad = np.empty_like(f)
    for i in range(f.size):
        up = f.copy()
        down = f.copy()
        up[i] += h
        down[i] -= h
        grad[i] = (objective(up) - objective(down)) / (2.0 * h)
    return grad


def iterations_to_reach(values, target):
    """Index of the first trace entry at or above target, or a huge sentinel."""
    indices = np.nonzero(np.asarray(values) >= target)[0]
    return int(indices[0]) if indices.size else 10**9
