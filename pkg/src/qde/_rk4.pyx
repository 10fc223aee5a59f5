# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled fixed-step RK4 for dephasing master equations.

Operators arrive as phased terms: term k contributes
diag(exp(i a_k t)) M_k diag(exp(-i b_k t)) to operator owner[k], where
owner 0 is the Hamiltonian and owner j >= 1 is dissipator j - 1.  Arrays
are C-ordered, so row-major products are issued to column-major BLAS with
the operands swapped.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, fabs
from libc.string cimport memcpy, memset
from scipy.linalg.cython_blas cimport zgemm

ctypedef double complex cplx

cnp.import_array()


cdef inline void mm(cplx* a, cplx* b, cplx* c, int n, cplx alpha, cplx beta) noexcept nogil:
    # c = alpha a b + beta c
    cdef char tn = b'N'
    zgemm(&tn, &tn, &n, &n, &n, &alpha, b, &n, a, &n, &beta, c, &n)


cdef inline void mm_dag(cplx* x, cplx* l, cplx* c, int n, cplx alpha, cplx beta) noexcept nogil:
    # c = alpha x l^dagger + beta c
    cdef char tc = b'C'
    cdef char tn = b'N'
    zgemm(&tc, &tn, &n, &n, &n, &alpha, l, &n, x, &n, &beta, c, &n)


cdef void evaluate(double t, cplx* ms, double* av, double* bv, long* owner, int nterms,
                   unsigned char* dynamic, cplx* out, int nops, int n,
                   cplx* pa, cplx* pb) noexcept nogil:
    cdef int k, i, j, o
    cdef int nn = n * n
    cdef cplx* m
    cdef cplx* dst
    cdef cplx s
    for o in range(nops):
        if dynamic[o]:
            memset(out + o * nn, 0, nn * sizeof(cplx))
    for k in range(nterms):
        o = owner[k]
        if not dynamic[o]:
            continue
        for i in range(n):
            pa[i] = cos(av[k * n + i] * t) + 1j * sin(av[k * n + i] * t)
            pb[i] = cos(bv[k * n + i] * t) - 1j * sin(bv[k * n + i] * t)
        m = ms + k * nn
        dst = out + o * nn
        for i in range(n):
            s = pa[i]
            for j in range(n):
                dst[i * n + j] = dst[i * n + j] + s * m[i * n + j] * pb[j]


cdef void load_static(cplx* ms, long* owner, int nterms, unsigned char* dynamic,
                      cplx* out, int nops, int n) noexcept nogil:
    cdef int k, i, o
    cdef int nn = n * n
    memset(out, 0, nops * nn * sizeof(cplx))
    for k in range(nterms):
        o = owner[k]
        if dynamic[o]:
            continue
        for i in range(nn):
            out[o * nn + i] = out[o * nn + i] + ms[k * nn + i]


cdef void rhs(cplx* rho, cplx* ops, double* rates, int nd, int n, double half_total,
              cplx* out, cplx* tmp) noexcept nogil:
    cdef int j, i
    cdef int nn = n * n
    cdef cplx* l
    mm(ops, rho, out, n, -1j, 0.0)
    mm(rho, ops, out, n, 1j, 1.0)
    for j in range(nd):
        if rates[j] == 0.0:
            continue
        l = ops + (j + 1) * nn
        mm(l, rho, tmp, n, 1.0, 0.0)
        mm_dag(tmp, l, out, n, 0.5 * rates[j], 1.0)
    if half_total != 0.0:
        for i in range(nn):
            out[i] = out[i] - half_total * rho[i]


def rk4_evolve(cnp.ndarray rho0, cnp.ndarray ms, cnp.ndarray a, cnp.ndarray b,
               cnp.ndarray owner, cnp.ndarray rates, double t0, double dt,
               long nsteps, long stride):
    """Integrate nsteps of size dt from t0.

    Returns (final rho, snapshots every ``stride`` steps including the
    initial state, largest |Tr rho - Tr rho0| seen).
    """
    if stride < 1 or nsteps < 0:
        raise ValueError("stride must be positive and nsteps non-negative")
    if not (ms.shape[0] == owner.shape[0] == a.shape[0] == b.shape[0]):
        raise ValueError("term arrays disagree in length")
    if rho0.ndim != 2 or rho0.shape[0] != rho0.shape[1] or ms.shape[1] != rho0.shape[0]:
        raise ValueError("operator and state shapes disagree")
    cdef int n = rho0.shape[0]
    cdef int nn = n * n
    cdef int nterms = ms.shape[0]
    cdef int nd = rates.shape[0]
    cdef int nops = nd + 1
    cdef cnp.ndarray[cplx, ndim=2, mode="c"] rho = np.ascontiguousarray(rho0, dtype=np.complex128).copy()
    cdef cnp.ndarray[cplx, ndim=3, mode="c"] m_arr = np.ascontiguousarray(ms, dtype=np.complex128)
    cdef cnp.ndarray[double, ndim=2, mode="c"] a_arr = np.ascontiguousarray(a, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] b_arr = np.ascontiguousarray(b, dtype=np.float64)
    cdef cnp.ndarray[long, ndim=1, mode="c"] own = np.ascontiguousarray(owner, dtype=np.int64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] rt = np.ascontiguousarray(rates, dtype=np.float64)
    cdef cnp.ndarray[unsigned char, ndim=1, mode="c"] dyn = np.zeros(nops, dtype=np.uint8)
    cdef long nsnap = nsteps // stride + 1
    cdef cnp.ndarray[cplx, ndim=3, mode="c"] snaps = np.empty((nsnap, n, n), dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=3, mode="c"] ops0 = np.empty((nops, n, n), dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=3, mode="c"] opsm = np.empty((nops, n, n), dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=3, mode="c"] ops1 = np.empty((nops, n, n), dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=2, mode="c"] work = np.empty((6, nn), dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=1, mode="c"] phase = np.empty(2 * n, dtype=np.complex128)
    cdef cplx* k1 = &work[0, 0]
    cdef cplx* k2 = &work[1, 0]
    cdef cplx* k3 = &work[2, 0]
    cdef cplx* k4 = &work[3, 0]
    cdef cplx* st = &work[4, 0]
    cdef cplx* tmp = &work[5, 0]
    cdef cplx* r = &rho[0, 0]
    cdef cplx* p0 = &ops0[0, 0, 0]
    cdef cplx* pm = &opsm[0, 0, 0]
    cdef cplx* p1 = &ops1[0, 0, 0]
    cdef cplx* swap
    cdef double half_total = 0.0
    cdef double drift = 0.0
    cdef double tr0, trv, t
    cdef long step, snap = 1
    cdef int i, k
    cdef cplx trc

    if nterms != own.shape[0] or nterms != a_arr.shape[0] or nterms != b_arr.shape[0]:
        raise ValueError("term arrays disagree in length")
    if stride < 1 or nsteps < 0:
        raise ValueError("stride must be positive and nsteps non-negative")
    for k in range(nterms):
        for i in range(n):
            if a_arr[k, i] != 0.0 or b_arr[k, i] != 0.0:
                dyn[own[k]] = 1
    for k in range(nd):
        half_total += 0.5 * rt[k]

    trc = 0.0
    for i in range(n):
        trc = trc + r[i * n + i]
    tr0 = trc.real
    memcpy(&snaps[0, 0, 0], r, nn * sizeof(cplx))

    with nogil:
        load_static(&m_arr[0, 0, 0], &own[0], nterms, &dyn[0], p0, nops, n)
        memcpy(pm, p0, nops * nn * sizeof(cplx))
        memcpy(p1, p0, nops * nn * sizeof(cplx))
        evaluate(t0, &m_arr[0, 0, 0], &a_arr[0, 0], &b_arr[0, 0], &own[0], nterms, &dyn[0],
                 p0, nops, n, &phase[0], &phase[n])
        for step in range(nsteps):
            t = t0 + step * dt
            evaluate(t + 0.5 * dt, &m_arr[0, 0, 0], &a_arr[0, 0], &b_arr[0, 0], &own[0], nterms,
                     &dyn[0], pm, nops, n, &phase[0], &phase[n])
            evaluate(t + dt, &m_arr[0, 0, 0], &a_arr[0, 0], &b_arr[0, 0], &own[0], nterms,
                     &dyn[0], p1, nops, n, &phase[0], &phase[n])
            rhs(r, p0, &rt[0], nd, n, half_total, k1, tmp)
            for i in range(nn):
                st[i] = r[i] + 0.5 * dt * k1[i]
            rhs(st, pm, &rt[0], nd, n, half_total, k2, tmp)
            for i in range(nn):
                st[i] = r[i] + 0.5 * dt * k2[i]
            rhs(st, pm, &rt[0], nd, n, half_total, k3, tmp)
            for i in range(nn):
                st[i] = r[i] + dt * k3[i]
            rhs(st, p1, &rt[0], nd, n, half_total, k4, tmp)
            for i in range(nn):
                r[i] = r[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            trv = 0.0
            for i in range(n):
                trv = trv + r[i * n + i].real
            if fabs(trv - tr0) > drift:
                drift = fabs(trv - tr0)
            # the end-of-step operators start the next step
            swap = p0
            p0 = p1
            p1 = swap
            if (step + 1) % stride == 0:
                memcpy(&snaps[snap, 0, 0], r, nn * sizeof(cplx))
                snap += 1
    return rho, snaps, drift
