"""Vectorized numpy fallback for the direct collision integrals.

Same signatures and node sets as ``_collision_numba``; loops over points and
channels stay in Python while the quadrature nodes are handled as arrays.
"""

import math

import numpy as np

from ._kernels_numpy import frame

SCHUNK = 16


def feval(c, X, f):
    comp, coef, alpha, center, p0, p1, p2 = f
    out = np.zeros(X.shape[:-1])
    q = np.sum(X * X, axis=-1)
    for t in np.flatnonzero(comp == c):
        d = X - center[t]
        poly = p0[t] + X @ p1[t] + p2[t] * q
        out += coef[t] * poly * np.exp(-alpha[t] * np.sum(d * d, axis=-1))
    return out


def sigma_poly(code, C, gamma, skew, i, j, phi_i, phi_j, g, gp):
    f = 1.0 + skew if i < j else 1.0
    if code == 0:
        return f * C * gp / (g * phi_i * phi_j)
    psi = g * gp
    return f * 0.5 * C * (psi + psi ** (0.5 * gamma)) / (g * g * phi_i * phi_j)


def sigma_mix(code, Cab, gamma, skew, a, b, g):
    f = 1.0 + skew if a < b else 1.0
    if code == 2:
        return np.full(np.shape(g), f * Cab)
    return f * 0.5 * Cab * (1.0 + g ** (gamma - 2.0))


def radial_panels(s_break, s_max, width):
    edges = [0.0]
    pts = [s_break, s_max] if 0.0 < s_break < s_max else [s_max]
    lo = 0.0
    for hi in pts:
        n = max(1, int(math.ceil((hi - lo) / width)))
        edges.extend(lo + (hi - lo) * q / n for q in range(1, n + 1))
        lo = hi
    return edges


def _radial_rule(s_break, s_max, width, ux, uw):
    e = np.asarray(radial_panels(s_break, s_max, width))
    lo, hw = e[:-1], np.diff(e)
    return (lo[:, None] + hw[:, None] * ux[None, :]).ravel(), (hw[:, None] * uw[None, :]).ravel()


def _sphere_nodes(t, st, ca, sa, axes):
    """Product-rule nodes oriented on each row of ``axes``: shape ``(len(axes), nt*na, 3)``."""
    e1, e2 = frame(axes)
    ring = ca[None, :, None] * e1[:, None, :] + sa[None, :, None] * e2[:, None, :]
    nodes = (t[None, :, None, None] * axes[:, None, None, :]
             + st[None, :, None, None] * ring[:, None, :, :])
    return nodes.reshape(len(axes), -1, 3)


def _unit(v):
    """Row-normalize ``(P, 3)``; zero rows map to the z axis."""
    n = np.sqrt(np.sum(v * v, axis=-1))
    out = np.zeros_like(v)
    out[..., 2] = 1.0
    ok = n > 0
    out[ok] = v[ok] / n[ok][:, None]
    return out


def _gain_loss(x, R, wts, ci, cj, fa, fb, sym, gnodes, gw, ot, ost, oca, osa, owt, wo_sum,
               post_a, post_b, cl_a, cl_b):
    """Shared strong-form body for a batch of radii ``R`` at point ``x``."""
    loss = 0.0
    gain = 0.0
    Fa_i = feval(ci, x[None], fa)[0]
    Fb_i = feval(ci, x[None], fb)[0]
    for a0 in range(0, len(R), SCHUNK):
        Rb = R[a0:a0 + SCHUNK]
        wb = wts[a0:a0 + SCHUNK]
        w = wb[:, None] * gw[None, :]
        Y = x - Rb[:, None, None] * gnodes[None, :, :]
        lv = Fa_i * feval(cj, Y, fb)
        if sym:
            lv = lv + Fb_i * feval(cj, Y, fa)
        loss += wo_sum * np.sum(w * lv)
        G = post_a[0] * x + post_a[1] * Y
        Gf = G.reshape(-1, 3)
        om = _sphere_nodes(ot, ost, oca, osa, _unit(Gf))
        ha = (post_b[0] * Rb)[:, None].repeat(len(gw), 1).reshape(-1)
        hb = (post_b[1] * Rb)[:, None].repeat(len(gw), 1).reshape(-1)
        Pa = Gf[:, None, :] + ha[:, None, None] * om
        Pb = Gf[:, None, :] - hb[:, None, None] * om
        v = feval(cl_a, Pa, fa) * feval(cl_b, Pb, fb)
        if sym:
            v = v + feval(cl_a, Pa, fb) * feval(cl_b, Pb, fa)
        gain += np.sum(w.reshape(-1) * (v @ owt))
    return gain, loss


def strong_poly(pts, comps, m, I, phi, code, C, gamma, skew, fa, fb, sym,
                ux, uw, width, rcut, gt, gst, gca, gsa, gwt, ot, ost, oca, osa, owt):
    P = len(pts)
    r = len(I)
    gain = np.zeros(P)
    loss = np.zeros(P)
    owt_full = np.repeat(owt, len(oca))
    wo_sum = np.sum(owt) * len(oca)
    for p in range(P):
        x = pts[p]
        i = comps[p]
        xn = math.sqrt(x @ x)
        axis = x / xn if xn > 0 else np.array([0.0, 0.0, 1.0])
        gnodes = _sphere_nodes(gt, gst, gca, gsa, axis[None])[0]
        gw = np.repeat(gwt, len(gca))
        for j in range(r):
            for k in range(r):
                for l in range(r):
                    dI = I[k] + I[l] - I[i] - I[j]
                    Rth2 = max(4.0 * dI / m, 0.0)
                    Rmax = xn + rcut
                    if Rmax * Rmax <= Rth2:
                        continue
                    smax = math.sqrt(Rmax * Rmax - Rth2)
                    sb = math.sqrt(xn * xn - Rth2) if xn * xn > Rth2 else 0.0
                    s, ws = _radial_rule(sb, smax, width, ux, uw)
                    R = np.sqrt(Rth2 + s * s)
                    gp = s if dI > 0.0 else np.sqrt(R * R - 4.0 * dI / m)
                    sig = sigma_poly(code, C, gamma, skew, i, j, phi[i], phi[j], R, gp)
                    wr = ws * s * R * R * sig
                    keep = wr != 0.0
                    ratio = phi[i] * phi[j] / (phi[k] * phi[l])
                    g_, l_ = _gain_loss_poly(x, R[keep], gp[keep], wr[keep], i, j, k, l, fa, fb,
                                             sym, gnodes, gw, ot, ost, oca, osa, owt_full,
                                             wo_sum)
                    gain[p] += ratio * g_
                    loss[p] += l_
    return gain, loss


def _gain_loss_poly(x, R, gp, wts, i, j, k, l, fa, fb, sym, gnodes, gw, ot, ost, oca, osa,
                    owt, wo_sum):
    loss = 0.0
    gain = 0.0
    Fa_i = feval(i, x[None], fa)[0]
    Fb_i = feval(i, x[None], fb)[0]
    for a0 in range(0, len(R), SCHUNK):
        Rb = R[a0:a0 + SCHUNK]
        hs = 0.5 * gp[a0:a0 + SCHUNK]
        w = wts[a0:a0 + SCHUNK, None] * gw[None, :]
        Y = x - Rb[:, None, None] * gnodes[None, :, :]
        lv = Fa_i * feval(j, Y, fb)
        if sym:
            lv = lv + Fb_i * feval(j, Y, fa)
        loss += wo_sum * np.sum(w * lv)
        Gf = (x - 0.5 * Rb[:, None, None] * gnodes[None, :, :]).reshape(-1, 3)
        om = _sphere_nodes(ot, ost, oca, osa, _unit(Gf))
        hh = np.repeat(hs, len(gw))[:, None, None]
        Pa = Gf[:, None, :] + hh * om
        Pb = Gf[:, None, :] - hh * om
        v = feval(k, Pa, fa) * feval(l, Pb, fb)
        if sym:
            v = v + feval(k, Pa, fb) * feval(l, Pb, fa)
        gain += np.sum(w.reshape(-1) * (v @ owt))
    return gain, loss


def strong_mix(pts, comps, masses, code, Cmat, gamma, skew, fa, fb, sym,
               ux, uw, width, rcut, gt, gst, gca, gsa, gwt, ot, ost, oca, osa, owt):
    P = len(pts)
    s_ = len(masses)
    gain = np.zeros(P)
    loss = np.zeros(P)
    owt_full = np.repeat(owt, len(oca))
    wo_sum = np.sum(owt) * len(oca)
    for p in range(P):
        x = pts[p]
        al = comps[p]
        ma = masses[al]
        xn = math.sqrt(x @ x)
        axis = x / xn if xn > 0 else np.array([0.0, 0.0, 1.0])
        gnodes = _sphere_nodes(gt, gst, gca, gsa, axis[None])[0]
        gw = np.repeat(gwt, len(gca))
        for be in range(s_):
            mb = masses[be]
            M = ma + mb
            R, ws = _radial_rule(xn, xn + rcut, width, ux, uw)
            sig = sigma_mix(code, Cmat[al, be], gamma, skew, al, be, R)
            wr = ws * R**3 * sig
            keep = wr != 0.0
            g_, l_ = _gain_loss(x, R[keep], wr[keep], al, be, fa, fb, sym, gnodes, gw,
                                ot, ost, oca, osa, owt_full, wo_sum, (ma / M, mb / M),
                                (mb / M, ma / M), al, be)
            gain[p] += g_
            loss[p] += l_
    return gain, loss


def _test_value(mode, c, X, f, phi, ta, tb, tc, td):
    if mode == 1:
        v = feval(c, X, f)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(v > 0.0, np.log(np.where(v > 0.0, v, 1.0) / phi[c]), np.nan)
    q = np.sum(X * X, axis=-1)
    return ta[c] + X @ tb + tc * q + td * q * q


def weak_poly(Gpts, Gw, m, I, phi, code, C, gamma, skew, f, mode, ta, tb, tc, td,
              ux, uw, width, rmax, gnodes, gw, onodes, ow):
    NG = len(Gpts)
    r = len(I)
    val = np.zeros(NG)
    scl = np.zeros(NG)
    bad = np.zeros(NG)
    wo_sum = np.sum(ow)
    for i in range(r):
        for j in range(r):
            for k in range(r):
                for l in range(r):
                    dI = I[k] + I[l] - I[i] - I[j]
                    Rth2 = max(4.0 * dI / m, 0.0)
                    if rmax * rmax <= Rth2:
                        continue
                    s, ws = _radial_rule(0.0, math.sqrt(rmax * rmax - Rth2), width, ux, uw)
                    R = np.sqrt(Rth2 + s * s)
                    gp = s if dI > 0.0 else np.sqrt(R * R - 4.0 * dI / m)
                    sig = sigma_poly(code, C, gamma, skew, i, j, phi[i], phi[j], R, gp)
                    wr = ws * s * R * R * sig
                    keep = wr != 0.0
                    R, gp, wr = R[keep], gp[keep], wr[keep]
                    ratio = phi[i] * phi[j] / (phi[k] * phi[l])
                    H = 0.5 * R[:, None, None] * gnodes[None, :, :]
                    K = 0.5 * gp[:, None, None] * onodes[None, :, :]
                    for p in range(NG):
                        Gp = Gpts[p]
                        w = Gw[p] * wr[:, None] * gw[None, :]
                        A, B = Gp + H, Gp - H
                        Phi = feval(i, A, f) * feval(j, B, f)
                        Ti = _test_value(mode, i, A, f, phi, ta, tb, tc, td)
                        Tj = _test_value(mode, j, B, f, phi, ta, tb, tc, td)
                        okij = ~(np.isnan(Ti) | np.isnan(Tj))
                        bad[p] += np.count_nonzero(~okij)
                        Tij = np.where(okij, Ti + Tj, 0.0)
                        scl[p] += wo_sum * np.sum(np.where(okij, w * np.abs(Phi) * np.abs(Ti),
                                                           0.0))
                        Ka, Kb = Gp + K, Gp - K
                        Phip = feval(k, Ka, f) * feval(l, Kb, f) * ratio
                        Tkl = (_test_value(mode, k, Ka, f, phi, ta, tb, tc, td)
                               + _test_value(mode, l, Kb, f, phi, ta, tb, tc, td))
                        okkl = ~np.isnan(Tkl)
                        # rows (R, g-node) excluded entirely when the pre pair is bad
                        full = okij[:, :, None] & okkl[:, None, :]
                        bad[p] += np.count_nonzero(okij[:, :, None] & ~okkl[:, None, :])
                        term = ((Phip[:, None, :] - Phi[:, :, None])
                                * (Tij[:, :, None] - np.where(okkl, Tkl, 0.0)[:, None, :]))
                        val[p] += 0.25 * np.sum(np.where(full, w[:, :, None] * ow[None, None, :]
                                                         * term, 0.0))
    return val, scl, bad
