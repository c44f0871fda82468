# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: SDDE Euler-Maruyama stepping, brute-force trapezoid
quadrature of the variance integrand, and cyclic Jacobi eigendecomposition.

Contracts match ``_ref``; see there for parameter documentation.
"""

from libc.math cimport sin, cos, sqrt, fabs

import numpy as np

from ..errors import EigenConvergenceError


def sdde_chunk(double[:, ::1] L, double beta, double dt, double noise_scale,
               double[:, ::1] u, double[:, ::1] v,
               double[:, :, ::1] ubuf, double[:, :, ::1] vbuf,
               double[:, :, ::1] noise,
               long step0, long nsteps, long burn_steps, long stride,
               double[:, :, ::1] samples, long nsamp0,
               double d_offset, double blow):
    cdef Py_ssize_t T = u.shape[0]
    cdef Py_ssize_t n = u.shape[1]
    cdef Py_ssize_t m = ubuf.shape[1]
    cdef Py_ssize_t t, i, j
    cdef long s, gs, slot, done, ns = nsamp0, div_step = -1
    cdef double ui, vi, mx, a1, a2, lij
    # The whole trajectory block advances one step at a time, with transposed
    # (n, T) work arrays so the feedback accumulation runs unit-stride over
    # trajectories.  The j-summation order is fixed, so results are bitwise
    # identical for any block partition.
    wT_arr = np.empty((n, T), dtype=np.float64)
    accT_arr = np.empty((n, T), dtype=np.float64)
    cdef double[:, ::1] wT = wT_arr
    cdef double[:, ::1] accT = accT_arr

    with nogil:
        for s in range(nsteps):
            gs = step0 + s
            slot = gs % m
            for t in range(T):
                for i in range(n):
                    wT[i, t] = vbuf[t, slot, i] + beta * ubuf[t, slot, i]
                    ubuf[t, slot, i] = u[t, i]
                    vbuf[t, slot, i] = v[t, i]
            for i in range(n):
                for t in range(T):
                    accT[i, t] = 0.0
                for j in range(n):
                    lij = L[i, j]
                    if lij == 0.0:
                        continue
                    for t in range(T):
                        accT[i, t] += lij * wT[j, t]
            mx = 0.0
            for t in range(T):
                for i in range(n):
                    ui = u[t, i] + dt * v[t, i]
                    vi = v[t, i] - dt * accT[i, t] + noise_scale * noise[t, s, i]
                    u[t, i] = ui
                    v[t, i] = vi
                    a1 = fabs(ui)
                    a2 = fabs(vi)
                    if a1 > mx:
                        mx = a1
                    if a2 > mx:
                        mx = a2
            if mx > blow:
                div_step = gs
                break
            done = gs + 1
            if done > burn_steps and (done - burn_steps) % stride == 0:
                for t in range(T):
                    for j in range(n - 1):
                        samples[t, ns, j] = u[t, j + 1] - u[t, j] + d_offset
                ns += 1
    if div_step >= 0:
        return nsamp0, div_step
    return ns, -1


def integrand_trapezoid(double s1, double s2, double h, double rmax,
                        long chunk=4_000_000):
    """Kahan-compensated trapezoid sum of the variance integrand on [0, rmax]."""
    cdef long npts = <long> (rmax / h + 0.5)
    cdef long k
    cdef double r, den, y, total = 0.0, comp = 0.0, yy, tt
    cdef double c_, s_
    with nogil:
        for k in range(npts + 1):
            r = k * h
            c_ = cos(r)
            s_ = sin(r)
            den = (s1 * s2 - r * r * c_) ** 2 + r * r * (s1 - r * s_) ** 2
            y = 1.0 / den
            if k == 0 or k == npts:
                y *= 0.5
            # Kahan summation
            yy = y - comp
            tt = total + yy
            comp = (tt - total) - yy
            total = tt
    return 2.0 * h * total


def jacobi_eigh(A_in, double tol=1e-12, long max_sweeps=100):
    A_arr = np.array(A_in, dtype=np.float64)
    cdef double[:, ::1] A = A_arr
    cdef Py_ssize_t n = A.shape[0]
    V_arr = np.eye(n, dtype=np.float64)
    cdef double[:, ::1] V = V_arr
    cdef Py_ssize_t p, q, k, sweep
    cdef double scale = 0.0, off, apq, theta, t, c, s, xp, xq, thresh
    for p in range(n):
        for q in range(n):
            scale += A[p, q] * A[p, q]
    scale = sqrt(scale)
    if scale < 1.0:
        scale = 1.0
    thresh = tol * scale
    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += 2.0 * A[p, q] * A[p, q]
        off = sqrt(off)
        if off <= thresh:
            return np.asarray(A_arr).diagonal().copy(), V_arr
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if fabs(apq) <= 1e-30 * scale:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = 1.0 if theta >= 0.0 else -1.0
                t = t / (fabs(theta) + sqrt(1.0 + theta * theta))
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    xp = A[k, p]
                    xq = A[k, q]
                    A[k, p] = c * xp - s * xq
                    A[k, q] = s * xp + c * xq
                for k in range(n):
                    xp = A[p, k]
                    xq = A[q, k]
                    A[p, k] = c * xp - s * xq
                    A[q, k] = s * xp + c * xq
                A[p, q] = 0.0
                A[q, p] = 0.0
                for k in range(n):
                    xp = V[k, p]
                    xq = V[k, q]
                    V[k, p] = c * xp - s * xq
                    V[k, q] = s * xp + c * xq
    raise EigenConvergenceError(
        f"Jacobi solver did not converge within {max_sweeps} sweeps"
    )
