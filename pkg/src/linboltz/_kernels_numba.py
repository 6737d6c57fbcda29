"""numba implementations of the batched kernel evaluations.

Mirrors ``_kernels_numpy`` line for line in its arithmetic; see
``kernels`` for the formulas.
"""

import math

import numpy as np

from ._backend import njit, prange

TWO_PI = 2.0 * math.pi


@njit
def frame(a):
    ax, ay, az = abs(a[0]), abs(a[1]), abs(a[2])
    if ax <= ay and ax <= az:
        k = 0
    elif ay <= az:
        k = 1
    else:
        k = 2
    e1 = np.zeros(3)
    e1[k] = 1.0
    d = a[k]
    for c in range(3):
        e1[c] -= d * a[c]
    nrm = math.sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2])
    for c in range(3):
        e1[c] /= nrm
    e2 = np.empty(3)
    e2[0] = a[1] * e1[2] - a[2] * e1[1]
    e2[1] = a[2] * e1[0] - a[0] * e1[2]
    e2[2] = a[0] * e1[1] - a[1] * e1[0]
    return e1, e2


@njit
def sigma_poly_scalar(code, C, gamma, skew, m, dI, phi_i, phi_j, i, j, g):
    """sigma_ij^kl(|g|); zero on closed channels."""
    arg = g * g - 4.0 * dI / m
    if m * g * g <= 4.0 * dI:
        return 0.0
    gp = math.sqrt(max(arg, 0.0))
    f = 1.0 + skew if i < j else 1.0
    if code == 0:
        return f * C * gp / (g * phi_i * phi_j)
    psi = g * gp
    return f * 0.5 * C * (psi + psi ** (0.5 * gamma)) / (g * g * phi_i * phi_j)


@njit
def reduced_poly(code, C, gamma, skew, i, k, gpre, gpost):
    """phi_i phi_k |g_pre| sigma_ik(|g_pre|) / |g_post|, finite as |g_post| -> 0 for HS."""
    f = 1.0 + skew if i < k else 1.0
    if code == 0:
        return f * C
    psi = gpre * gpost
    if psi <= 0.0:
        return 0.0
    return f * 0.5 * C * (1.0 + psi ** (0.5 * gamma - 1.0))


@njit
def sigma_mix_scalar(code, Cab, gamma, skew, a, b, g):
    f = 1.0 + skew if a < b else 1.0
    if code == 2:
        return f * Cab
    return f * 0.5 * Cab * (1.0 + g ** (gamma - 2.0))


@njit
def _poly_pair(xi, xs, m, I, phi, code, C, gamma, skew,
               pr, pcos, psin, pw, snodes, sweights, k1, k2):
    r = I.shape[0]
    g0 = xi[0] - xs[0]
    g1 = xi[1] - xs[1]
    g2 = xi[2] - xs[2]
    gn = math.sqrt(g0 * g0 + g1 * g1 + g2 * g2)
    n = np.empty(3)
    n[0] = g0 / gn
    n[1] = g1 / gn
    n[2] = g2 / gn
    sm0 = xi[0] + xs[0]
    sm1 = xi[1] + xs[1]
    sm2 = xi[2] + xs[2]
    s = 0.5 * (sm0 * n[0] + sm1 * n[1] + sm2 * n[2])
    u = np.empty(3)
    u[0] = 0.5 * sm0 - s * n[0]
    u[1] = 0.5 * sm1 - s * n[1]
    u[2] = 0.5 * sm2 - s * n[2]
    e1, e2 = frame(n)
    u1 = u[0] * e1[0] + u[1] * e1[1] + u[2] * e1[2]
    u2 = u[0] * e2[0] + u[1] * e2[1] + u[2] * e2[2]
    usq = u1 * u1 + u2 * u2
    nr = pr.shape[0]
    na = pcos.shape[0]
    wsq = np.empty((nr, na))
    gw = np.empty((nr, na))
    for p in range(nr):
        er = math.exp(-0.5 * m * pr[p] * pr[p])
        for q in range(na):
            wsq[p, q] = usq - 2.0 * pr[p] * (u1 * pcos[q] + u2 * psin[q]) + pr[p] * pr[p]
            gw[p, q] = pw[p, q] * er
    norm = m ** 1.5 * TWO_PI ** -1.5
    xi2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]
    xs2 = xs[0] * xs[0] + xs[1] * xs[1] + xs[2] * xs[2]
    ns = sweights.shape[0]
    for i in range(r):
        Mi = norm * phi[i] * math.exp(-I[i] - 0.5 * m * xi2)
        for j in range(r):
            Mj = norm * phi[j] * math.exp(-I[j] - 0.5 * m * xs2)
            # loss kernel
            acc1 = 0.0
            for k in range(r):
                for l in range(r):
                    dI = I[k] + I[l] - I[i] - I[j]
                    for q in range(ns):
                        ct = snodes[q, 0] * n[0] + snodes[q, 1] * n[1] + snodes[q, 2] * n[2]
                        acc1 += sweights[q] * (sigma_poly_scalar(code, C, gamma, skew, m, dI,
                                                                 phi[i], phi[j], i, j, gn)
                                               + 0.0 * ct)
            k1[i, j] = math.sqrt(Mi * Mj) * gn * acc1
            # gain kernel
            acc2 = 0.0
            for k in range(r):
                for l in range(r):
                    dI = I[j] + I[l] - I[i] - I[k]
                    chi = dI / (m * gn)
                    gauss = norm * math.exp(-0.5 * (I[k] + I[l]) - 0.5 * m * (s - chi) ** 2
                                            - 0.125 * m * gn * gn)
                    if gauss == 0.0:
                        continue
                    a = (gn + chi) * (gn + chi)
                    b = (gn - chi) * (gn - chi)
                    part = 0.0
                    for p in range(nr):
                        for q in range(na):
                            gt2 = a + wsq[p, q]
                            if m * gt2 <= 4.0 * dI:
                                continue
                            gs2 = b + wsq[p, q]
                            part += gw[p, q] * reduced_poly(code, C, gamma, skew, i, k,
                                                            math.sqrt(gt2), math.sqrt(gs2))
                    acc2 += gauss * part
            k2[i, j] = 8.0 / (math.sqrt(phi[i] * phi[j]) * gn) * acc2


@njit(parallel=True)
def poly_batch(xa, xb, m, I, phi, code, C, gamma, skew, pr, pcos, psin, pw, snodes, sweights):
    P = xa.shape[0]
    r = I.shape[0]
    k1 = np.zeros((P, r, r))
    k2 = np.zeros((P, r, r))
    for p in prange(P):
        _poly_pair(xa[p], xb[p], m, I, phi, code, C, gamma, skew, pr, pcos, psin, pw,
                   snodes, sweights, k1[p], k2[p])
    return k1, k2


@njit
def _mix_pair(xi, xs, masses, dens, code, Cmat, gamma, skew, pr, pcos, psin, pw,
              snodes, sweights, gy, gwy, n_az, loss, same, gain):
    s_ = masses.shape[0]
    g0 = xi[0] - xs[0]
    g1 = xi[1] - xs[1]
    g2 = xi[2] - xs[2]
    gn = math.sqrt(g0 * g0 + g1 * g1 + g2 * g2)
    n = np.empty(3)
    n[0] = g0 / gn
    n[1] = g1 / gn
    n[2] = g2 / gn
    sm0 = xi[0] + xs[0]
    sm1 = xi[1] + xs[1]
    sm2 = xi[2] + xs[2]
    sh = 0.5 * (sm0 * n[0] + sm1 * n[1] + sm2 * n[2])
    u = np.empty(3)
    u[0] = 0.5 * sm0 - sh * n[0]
    u[1] = 0.5 * sm1 - sh * n[1]
    u[2] = 0.5 * sm2 - sh * n[2]
    e1, e2 = frame(n)
    u1 = u[0] * e1[0] + u[1] * e1[1] + u[2] * e1[2]
    u2 = u[0] * e2[0] + u[1] * e2[1] + u[2] * e2[2]
    usq = u1 * u1 + u2 * u2
    nr = pr.shape[0]
    na = pcos.shape[0]
    wsq = np.empty((nr, na))
    for p in range(nr):
        for q in range(na):
            wsq[p, q] = usq - 2.0 * pr[p] * (u1 * pcos[q] + u2 * psin[q]) + pr[p] * pr[p]
    xi2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]
    xs2 = xs[0] * xs[0] + xs[1] * xs[1] + xs[2] * xs[2]
    ns = sweights.shape[0]
    ny = gy.shape[0]
    for al in range(s_):
        ma = masses[al]
        Ma = dens[al] * (ma / TWO_PI) ** 1.5 * math.exp(-0.5 * ma * xi2)
        for be in range(s_):
            mb = masses[be]
            Cab = Cmat[al, be]
            Mb = dens[be] * (mb / TWO_PI) ** 1.5 * math.exp(-0.5 * mb * xs2)
            # loss
            acc = 0.0
            for q in range(ns):
                ct = snodes[q, 0] * n[0] + snodes[q, 1] * n[1] + snodes[q, 2] * n[2]
                acc += sweights[q] * (sigma_mix_scalar(code, Cab, gamma, skew, al, be, gn)
                                      + 0.0 * ct)
            loss[al, be] = math.sqrt(Ma * Mb) * gn * acc
            # same-species-argument gain kernel k_ab^(a)
            chi = (ma - mb) * gn / (2.0 * mb)
            gauss = dens[be] * (mb / TWO_PI) ** 1.5 * math.exp(
                -0.25 * mb * (2.0 * sh * sh + 0.5 * (gn + 2.0 * chi) ** 2))
            a = (gn + chi) * (gn + chi)
            part = 0.0
            for p in range(nr):
                er = math.exp(-0.5 * mb * pr[p] * pr[p])
                for q in range(na):
                    gt = math.sqrt(a + wsq[p, q])
                    part += pw[p, q] * er * sigma_mix_scalar(code, Cab, gamma, skew, al, be, gt)
            same[al, be] = (ma + mb) ** 2 / (mb * mb) / gn * gauss * part
            # cross gain kernel k_ab2^(b)
            if ma == mb:
                gauss = math.sqrt(dens[al] * dens[be]) * (ma / TWO_PI) ** 1.5 * math.exp(
                    -0.25 * ma * (2.0 * sh * sh + 0.5 * gn * gn))
                part = 0.0
                for p in range(nr):
                    er = math.exp(-0.5 * ma * pr[p] * pr[p])
                    for q in range(na):
                        gt = math.sqrt(gn * gn + wsq[p, q])
                        part += pw[p, q] * er * sigma_mix_scalar(code, Cab, gamma, skew, al,
                                                                 be, gt)
                gain[al, be] = 4.0 / gn * gauss * part
            else:
                d = ma - mb
                gab = np.empty(3)
                gab[0] = (ma * xi[0] - mb * xs[0]) / d
                gab[1] = (ma * xi[1] - mb * xs[1]) / d
                gab[2] = (ma * xi[2] - mb * xs[2]) / d
                G = math.sqrt(gab[0] * gab[0] + gab[1] * gab[1] + gab[2] * gab[2])
                pk = np.empty(3)
                if G > 0.0:
                    sgn = -1.0 if d > 0 else 1.0
                    for c in range(3):
                        pk[c] = sgn * gab[c] / G
                else:
                    pk[0] = 0.0
                    pk[1] = 0.0
                    pk[2] = 1.0
                f1, f2 = frame(pk)
                aa = ma * mb * gn * G / abs(d)
                e0 = -0.25 * ((ma + mb) * G * G + ma * mb * (ma + mb) * gn * gn / (d * d))
                if aa > 1e-8:
                    em = math.expm1(-2.0 * aa)
                    jac = -em / aa
                else:
                    em = 0.0
                    jac = 2.0
                part = 0.0
                dphi = TWO_PI / n_az
                for y in range(ny):
                    if aa > 1e-8:
                        t = 1.0 + math.log1p((1.0 - gy[y]) * em) / aa
                    else:
                        t = 2.0 * gy[y] - 1.0
                    t = min(1.0, max(-1.0, t))
                    st = math.sqrt(max(0.0, 1.0 - t * t))
                    for q in range(n_az):
                        ph = (q + 0.5) * dphi
                        cp = math.cos(ph)
                        sp = math.sin(ph)
                        ssum = 0.0
                        for c in range(3):
                            om = t * pk[c] + st * (cp * f1[c] + sp * f2[c])
                            xp = gab[c] + ma * gn * om / d
                            ssum += (xi[c] - xp) ** 2
                        part += gwy[y] * dphi * sigma_mix_scalar(code, Cab, gamma, skew, al,
                                                                 be, math.sqrt(ssum))
                coef = math.sqrt(dens[al] * dens[be]) * (ma * mb) ** 0.75 / TWO_PI ** 1.5
                gain[al, be] = ((ma + mb) ** 2 / (d * d) * gn * coef * math.exp(e0 + aa)
                                * jac * part)


@njit(parallel=True)
def mix_batch(xa, xb, masses, dens, code, Cmat, gamma, skew, pr, pcos, psin, pw,
              snodes, sweights, gy, gwy, n_az):
    P = xa.shape[0]
    s_ = masses.shape[0]
    loss = np.zeros((P, s_, s_))
    same = np.zeros((P, s_, s_))
    gain = np.zeros((P, s_, s_))
    for p in prange(P):
        _mix_pair(xa[p], xb[p], masses, dens, code, Cmat, gamma, skew, pr, pcos, psin, pw,
                  snodes, sweights, gy, gwy, n_az, loss[p], same[p], gain[p])
    return loss, same, gain
