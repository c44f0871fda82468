"""Pure-numpy reference implementations of the hot kernels.

Used when the compiled extension is unavailable (or when PLATOONRISK_PURE=1).
Same contracts as ``_core``; each backend is deterministic on its own, but the
two backends are not bitwise identical to each other (different summation
orders).
"""

import numpy as np

from ..errors import EigenConvergenceError


def sdde_chunk(L, beta, dt, noise_scale, u, v, ubuf, vbuf, noise,
               step0, nsteps, burn_steps, stride, samples, nsamp0,
               d_offset, blow):
    """Advance a block of trajectories by ``nsteps`` Euler-Maruyama steps.

    State arrays ``u`` (position offsets), ``v`` (velocities) have shape
    (n_traj, n) and are updated in place.  ``ubuf``/``vbuf`` are ring buffers
    of shape (n_traj, m, n) holding the delayed state; slot ``s % m`` contains
    the state at step ``s - m`` when step ``s`` is processed (zeros encode the
    constant pre-history).  ``noise`` has shape (n_traj, nsteps, n).

    Inter-vehicle distances ``u[j+1] - u[j] + d_offset`` are recorded into
    ``samples`` (n_traj, S, n-1) at every ``stride``-th step after
    ``burn_steps``.  Returns (next sample index, divergence step or -1).
    """
    m = ubuf.shape[1]
    Lt = np.ascontiguousarray(L.T)
    ns = nsamp0
    for s in range(nsteps):
        gs = step0 + s
        slot = gs % m
        w = vbuf[:, slot, :] + beta * ubuf[:, slot, :]
        acc = w @ Lt
        ubuf[:, slot, :] = u
        vbuf[:, slot, :] = v
        u += dt * v
        v -= dt * acc
        if noise_scale != 0.0:
            v += noise_scale * noise[:, s, :]
        if max(np.abs(u).max(), np.abs(v).max()) > blow:
            return ns, gs
        done = gs + 1
        if done > burn_steps and (done - burn_steps) % stride == 0:
            samples[:, ns, :] = u[:, 1:] - u[:, :-1] + d_offset
            ns += 1
    return ns, -1


def integrand_trapezoid(s1, s2, h, rmax, chunk=4_000_000):
    """Brute-force trapezoid rule for the steady-state variance integral.

    Evaluates 2 * trapz of 1 / ((s1*s2 - r^2 cos r)^2 + r^2 (s1 - r sin r)^2)
    on [0, rmax] with uniform step ``h``.  Partial sums are accumulated per
    chunk and combined with a final pairwise sum, so the result is independent
    of the chunk size.
    """
    npts = int(round(rmax / h))
    partial = []
    for a in range(0, npts + 1, chunk):
        b = min(a + chunk, npts + 1)
        r = np.arange(a, b) * h
        den = (s1 * s2 - r * r * np.cos(r)) ** 2 + r * r * (s1 - r * np.sin(r)) ** 2
        y = 1.0 / den
        if a == 0:
            y[0] *= 0.5
        if b == npts + 1:
            y[-1] *= 0.5
        partial.append(y.sum())
    return 2.0 * h * float(np.sum(partial))


def jacobi_eigh(A, tol=1e-12, max_sweeps=100):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Sweeps row pairs (p, q) until the off-diagonal Frobenius norm drops below
    ``tol * max(1, ||A||_F)``.  Returns (eigenvalues, eigenvectors) unsorted;
    raises EigenConvergenceError after ``max_sweeps`` sweeps.
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    scale = max(1.0, float(np.linalg.norm(A)))
    thresh = tol * scale
    for _ in range(max_sweeps):
        off = np.sqrt(2.0 * np.sum(np.tril(A, -1) ** 2))
        if off <= thresh:
            return np.diag(A).copy(), V
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-30 * scale:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.sign(theta) if theta != 0.0 else 1.0
                t = t / (abs(theta) + np.sqrt(1.0 + theta * theta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = 0.0
                A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    raise EigenConvergenceError(
        f"Jacobi solver did not converge within {max_sweeps} sweeps"
    )
