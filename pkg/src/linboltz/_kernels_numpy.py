"""Vectorized numpy fallback for the batched kernel evaluations."""

import numpy as np

TWO_PI = 2.0 * np.pi
CHUNK = 2048


def frame(a):
    """Row-wise version of ``quadrature.orthonormal_frame`` for unit rows ``a``."""
    k = np.argmin(np.abs(a), axis=1)
    ref = np.zeros_like(a)
    ref[np.arange(len(a)), k] = 1.0
    d = a[np.arange(len(a)), k]
    e1 = ref - d[:, None] * a
    e1 /= np.linalg.norm(e1, axis=1)[:, None]
    e2 = np.cross(a, e1)
    return e1, e2


def _geometry(xa, xb):
    g = xa - xb
    gn = np.sqrt(np.sum(g * g, axis=1))
    n = g / gn[:, None]
    sm = xa + xb
    s = 0.5 * np.sum(sm * n, axis=1)
    u = 0.5 * sm - s[:, None] * n
    e1, e2 = frame(n)
    u1 = np.sum(u * e1, axis=1)
    u2 = np.sum(u * e2, axis=1)
    return gn, n, s, u1, u2


def _wsq(u1, u2, pr, pcos, psin):
    usq = u1 * u1 + u2 * u2
    lin = u1[:, None] * pcos[None, :] + u2[:, None] * psin[None, :]
    return usq[:, None, None] - 2.0 * pr[None, :, None] * lin[:, None, :] + (pr * pr)[None, :, None]


def sigma_poly_vec(code, C, gamma, skew, m, dI, phi_i, phi_j, i, j, g):
    f = 1.0 + skew if i < j else 1.0
    open_ = m * g * g > 4.0 * dI
    gp = np.sqrt(np.maximum(g * g - 4.0 * dI / m, 0.0))
    if code == 0:
        val = f * C * gp / (g * phi_i * phi_j)
    else:
        psi = g * gp
        val = f * 0.5 * C * (psi + psi ** (0.5 * gamma)) / (g * g * phi_i * phi_j)
    return np.where(open_, val, 0.0)


def reduced_poly_vec(code, C, gamma, skew, i, k, gpre, gpost):
    f = 1.0 + skew if i < k else 1.0
    if code == 0:
        return np.full(np.shape(gpre), f * C)
    psi = gpre * gpost
    with np.errstate(divide="ignore"):
        val = f * 0.5 * C * (1.0 + np.where(psi > 0, psi, 1.0) ** (0.5 * gamma - 1.0))
    return np.where(psi > 0, val, 0.0)


def sigma_mix_vec(code, Cab, gamma, skew, a, b, g):
    f = 1.0 + skew if a < b else 1.0
    if code == 2:
        return np.full(np.shape(g), f * Cab)
    return f * 0.5 * Cab * (1.0 + g ** (gamma - 2.0))


def _poly_chunk(xa, xb, m, I, phi, code, C, gamma, skew, pr, pcos, psin, pw, snodes, sweights):
    P = len(xa)
    r = len(I)
    gn, n, s, u1, u2 = _geometry(xa, xb)
    wsq = _wsq(u1, u2, pr, pcos, psin)
    gw = pw * np.exp(-0.5 * m * pr * pr)[:, None]
    norm = m**1.5 * TWO_PI**-1.5
    xi2 = np.sum(xa * xa, axis=1)
    xs2 = np.sum(xb * xb, axis=1)
    wsum = np.sum(sweights)
    k1 = np.zeros((P, r, r))
    k2 = np.zeros((P, r, r))
    for i in range(r):
        Mi = norm * phi[i] * np.exp(-I[i] - 0.5 * m * xi2)
        for j in range(r):
            Mj = norm * phi[j] * np.exp(-I[j] - 0.5 * m * xs2)
            acc1 = np.zeros(P)
            for k in range(r):
                for l in range(r):
                    dI = I[k] + I[l] - I[i] - I[j]
                    acc1 += wsum * sigma_poly_vec(code, C, gamma, skew, m, dI, phi[i], phi[j],
                                                  i, j, gn)
            k1[:, i, j] = np.sqrt(Mi * Mj) * gn * acc1
            acc2 = np.zeros(P)
            for k in range(r):
                for l in range(r):
                    dI = I[j] + I[l] - I[i] - I[k]
                    chi = dI / (m * gn)
                    gauss = norm * np.exp(-0.5 * (I[k] + I[l]) - 0.5 * m * (s - chi) ** 2
                                          - 0.125 * m * gn * gn)
                    gt2 = ((gn + chi) ** 2)[:, None, None] + wsq
                    gs2 = ((gn - chi) ** 2)[:, None, None] + wsq
                    ok = m * gt2 > 4.0 * dI
                    red = reduced_poly_vec(code, C, gamma, skew, i, k, np.sqrt(gt2),
                                           np.sqrt(np.maximum(gs2, 0.0)))
                    part = np.sum(np.where(ok, gw[None] * red, 0.0), axis=(1, 2))
                    acc2 += gauss * part
            k2[:, i, j] = 8.0 / (np.sqrt(phi[i] * phi[j]) * gn) * acc2
    return k1, k2


def poly_batch(xa, xb, m, I, phi, code, C, gamma, skew, pr, pcos, psin, pw, snodes, sweights):
    outs = [_poly_chunk(xa[a:a + CHUNK], xb[a:a + CHUNK], m, I, phi, code, C, gamma, skew,
                        pr, pcos, psin, pw, snodes, sweights)
            for a in range(0, len(xa), CHUNK)]
    if not outs:
        r = len(I)
        return np.zeros((0, r, r)), np.zeros((0, r, r))
    return np.concatenate([o[0] for o in outs]), np.concatenate([o[1] for o in outs])


def _mix_chunk(xa, xb, masses, dens, code, Cmat, gamma, skew, pr, pcos, psin, pw,
               snodes, sweights, gy, gwy, n_az):
    P = len(xa)
    s_ = len(masses)
    gn, n, sh, u1, u2 = _geometry(xa, xb)
    wsq = _wsq(u1, u2, pr, pcos, psin)
    xi2 = np.sum(xa * xa, axis=1)
    xs2 = np.sum(xb * xb, axis=1)
    wsum = np.sum(sweights)
    dphi = TWO_PI / n_az
    ph = (np.arange(n_az) + 0.5) * dphi
    cp, sp = np.cos(ph), np.sin(ph)
    loss = np.zeros((P, s_, s_))
    same = np.zeros((P, s_, s_))
    gain = np.zeros((P, s_, s_))
    for al in range(s_):
        ma = masses[al]
        Ma = dens[al] * (ma / TWO_PI) ** 1.5 * np.exp(-0.5 * ma * xi2)
        for be in range(s_):
            mb = masses[be]
            Cab = Cmat[al, be]
            Mb = dens[be] * (mb / TWO_PI) ** 1.5 * np.exp(-0.5 * mb * xs2)
            loss[:, al, be] = (np.sqrt(Ma * Mb) * gn * wsum
                               * sigma_mix_vec(code, Cab, gamma, skew, al, be, gn))
            chi = (ma - mb) * gn / (2.0 * mb)
            gauss = dens[be] * (mb / TWO_PI) ** 1.5 * np.exp(
                -0.25 * mb * (2.0 * sh * sh + 0.5 * (gn + 2.0 * chi) ** 2))
            gt = np.sqrt(((gn + chi) ** 2)[:, None, None] + wsq)
            er = np.exp(-0.5 * mb * pr * pr)[:, None]
            part = np.sum((pw * er)[None] * sigma_mix_vec(code, Cab, gamma, skew, al, be, gt),
                          axis=(1, 2))
            same[:, al, be] = (ma + mb) ** 2 / (mb * mb) / gn * gauss * part
            if ma == mb:
                gauss = np.sqrt(dens[al] * dens[be]) * (ma / TWO_PI) ** 1.5 * np.exp(
                    -0.25 * ma * (2.0 * sh * sh + 0.5 * gn * gn))
                gt = np.sqrt((gn * gn)[:, None, None] + wsq)
                er = np.exp(-0.5 * ma * pr * pr)[:, None]
                part = np.sum((pw * er)[None]
                              * sigma_mix_vec(code, Cab, gamma, skew, al, be, gt), axis=(1, 2))
                gain[:, al, be] = 4.0 / gn * gauss * part
                continue
            d = ma - mb
            gab = (ma * xa - mb * xb) / d
            G = np.sqrt(np.sum(gab * gab, axis=1))
            sgn = -1.0 if d > 0 else 1.0
            pk = np.where((G > 0)[:, None], sgn * gab / np.where(G > 0, G, 1.0)[:, None],
                          np.array([0.0, 0.0, 1.0]))
            f1, f2 = frame(pk)
            aa = ma * mb * gn * G / abs(d)
            e0 = -0.25 * ((ma + mb) * G * G + ma * mb * (ma + mb) * gn * gn / (d * d))
            big = aa > 1e-8
            safe = np.where(big, aa, 1.0)
            em = np.where(big, np.expm1(-2.0 * safe), 0.0)
            jac = np.where(big, -em / safe, 2.0)
            t = np.where(big[:, None], 1.0 + np.log1p((1.0 - gy)[None, :] * em[:, None])
                         / safe[:, None], (2.0 * gy - 1.0)[None, :])
            t = np.clip(t, -1.0, 1.0)
            st = np.sqrt(np.maximum(0.0, 1.0 - t * t))
            om = (t[:, :, None, None] * pk[:, None, None, :]
                  + st[:, :, None, None] * (cp[None, None, :, None] * f1[:, None, None, :]
                                            + sp[None, None, :, None] * f2[:, None, None, :]))
            xp = gab[:, None, None, :] + (ma * gn / d)[:, None, None, None] * om
            dist = np.sqrt(np.sum((xa[:, None, None, :] - xp) ** 2, axis=-1))
            sig = sigma_mix_vec(code, Cab, gamma, skew, al, be, dist)
            part = np.sum(gwy[None, :, None] * dphi * sig, axis=(1, 2))
            coef = np.sqrt(dens[al] * dens[be]) * (ma * mb) ** 0.75 / TWO_PI**1.5
            gain[:, al, be] = (ma + mb) ** 2 / (d * d) * gn * coef * np.exp(e0 + aa) * jac * part
    return loss, same, gain


def mix_batch(xa, xb, masses, dens, code, Cmat, gamma, skew, pr, pcos, psin, pw,
              snodes, sweights, gy, gwy, n_az):
    outs = [_mix_chunk(xa[a:a + CHUNK], xb[a:a + CHUNK], masses, dens, code, Cmat, gamma, skew,
                       pr, pcos, psin, pw, snodes, sweights, gy, gwy, n_az)
            for a in range(0, len(xa), CHUNK)]
    s_ = len(masses)
    if not outs:
        z = np.zeros((0, s_, s_))
        return z, z.copy(), z.copy()
    return tuple(np.concatenate([o[c] for o in outs]) for c in range(3))
