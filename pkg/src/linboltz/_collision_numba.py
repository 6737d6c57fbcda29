"""numba implementations of the direct collision integrals.

Fields are passed as 7-tuples ``(comp, coef, alpha, center, p0, p1, p2)``
(see ``DistributionField.packed``). Radial integrals run over
``s = sqrt(R^2 - R_th^2)`` so threshold channels stay smooth.
"""

import math

import numpy as np

from ._backend import njit, prange


@njit
def feval(c, x0, x1, x2, f):
    comp, coef, alpha, center, p0, p1, p2 = f
    v = 0.0
    for t in range(comp.shape[0]):
        if comp[t] != c:
            continue
        d0 = x0 - center[t, 0]
        d1 = x1 - center[t, 1]
        d2 = x2 - center[t, 2]
        poly = (p0[t] + p1[t, 0] * x0 + p1[t, 1] * x1 + p1[t, 2] * x2
                + p2[t] * (x0 * x0 + x1 * x1 + x2 * x2))
        v += coef[t] * poly * math.exp(-alpha[t] * (d0 * d0 + d1 * d1 + d2 * d2))
    return v


@njit
def frame6(a0, a1, a2):
    ax, ay, az = abs(a0), abs(a1), abs(a2)
    if ax <= ay and ax <= az:
        d = a0
        e0, e1, e2 = 1.0 - d * a0, -d * a1, -d * a2
    elif ay <= az:
        d = a1
        e0, e1, e2 = -d * a0, 1.0 - d * a1, -d * a2
    else:
        d = a2
        e0, e1, e2 = -d * a0, -d * a1, 1.0 - d * a2
    nrm = math.sqrt(e0 * e0 + e1 * e1 + e2 * e2)
    e0 /= nrm
    e1 /= nrm
    e2 /= nrm
    return e0, e1, e2, a1 * e2 - a2 * e1, a2 * e0 - a0 * e2, a0 * e1 - a1 * e0


@njit
def sigma_poly(code, C, gamma, skew, i, j, phi_i, phi_j, g, gp):
    f = 1.0 + skew if i < j else 1.0
    if code == 0:
        return f * C * gp / (g * phi_i * phi_j)
    psi = g * gp
    return f * 0.5 * C * (psi + psi ** (0.5 * gamma)) / (g * g * phi_i * phi_j)


@njit
def sigma_mix(code, Cab, gamma, skew, a, b, g):
    f = 1.0 + skew if a < b else 1.0
    if code == 2:
        return f * Cab
    return f * 0.5 * Cab * (1.0 + g ** (gamma - 2.0))


@njit
def radial_panels(s_break, s_max, width):
    """Panel edges on [0, s_max] with an extra break and bounded width."""
    edges = [0.0]
    pts = [s_max]
    if 0.0 < s_break < s_max:
        pts = [s_break, s_max]
    lo = 0.0
    for hi in pts:
        n = max(1, int(math.ceil((hi - lo) / width)))
        for q in range(1, n + 1):
            edges.append(lo + (hi - lo) * q / n)
        lo = hi
    return edges


@njit
def _oriented(t, st, ca, sa, a0, a1, a2, fr, q_t, q_a):
    """Node (q_t, q_a) of a product sphere rule with pole on unit (a0, a1, a2)."""
    e0, e1, e2, f0, f1, f2 = fr
    c = ca[q_a]
    s = sa[q_a]
    return (t[q_t] * a0 + st[q_t] * (c * e0 + s * f0),
            t[q_t] * a1 + st[q_t] * (c * e1 + s * f1),
            t[q_t] * a2 + st[q_t] * (c * e2 + s * f2))


@njit(parallel=True)
def strong_poly(pts, comps, m, I, phi, code, C, gamma, skew, fa, fb, sym,
                ux, uw, width, rcut, gt, gst, gca, gsa, gwt, ot, ost, oca, osa, owt):
    P = pts.shape[0]
    r = I.shape[0]
    gain = np.zeros(P)
    loss = np.zeros(P)
    ng_t = gt.shape[0]
    ng_a = gca.shape[0]
    no_t = ot.shape[0]
    no_a = oca.shape[0]
    wo_sum = 0.0
    for q in range(no_t):
        wo_sum += owt[q] * no_a
    for p in prange(P):
        x0, x1, x2 = pts[p, 0], pts[p, 1], pts[p, 2]
        i = comps[p]
        xn = math.sqrt(x0 * x0 + x1 * x1 + x2 * x2)
        if xn > 0.0:
            a0, a1, a2 = x0 / xn, x1 / xn, x2 / xn
        else:
            a0, a1, a2 = 0.0, 0.0, 1.0
        fra = frame6(a0, a1, a2)
        Fa_i = feval(i, x0, x1, x2, fa)
        Fb_i = feval(i, x0, x1, x2, fb)
        g_acc = 0.0
        l_acc = 0.0
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
                    edges = radial_panels(sb, smax, width)
                    ratio = phi[i] * phi[j] / (phi[k] * phi[l])
                    for e in range(len(edges) - 1):
                        lo = edges[e]
                        hw = edges[e + 1] - lo
                        for q in range(ux.shape[0]):
                            s = lo + hw * ux[q]
                            R = math.sqrt(Rth2 + s * s)
                            if dI > 0.0:
                                gp = s
                            else:
                                gp = math.sqrt(R * R - 4.0 * dI / m)
                            sig = sigma_poly(code, C, gamma, skew, i, j, phi[i], phi[j], R, gp)
                            wr = hw * uw[q] * s * R * R * sig
                            if wr == 0.0:
                                continue
                            for qt in range(ng_t):
                                for qa in range(ng_a):
                                    n0, n1, n2 = _oriented(gt, gst, gca, gsa, a0, a1, a2, fra, qt, qa)
                                    w = wr * gwt[qt]
                                    y0 = x0 - R * n0
                                    y1 = x1 - R * n1
                                    y2 = x2 - R * n2
                                    lv = Fa_i * feval(j, y0, y1, y2, fb)
                                    if sym:
                                        lv += Fb_i * feval(j, y0, y1, y2, fa)
                                    l_acc += w * wo_sum * lv
                                    G0 = x0 - 0.5 * R * n0
                                    G1 = x1 - 0.5 * R * n1
                                    G2 = x2 - 0.5 * R * n2
                                    Gn = math.sqrt(G0 * G0 + G1 * G1 + G2 * G2)
                                    if Gn > 0.0:
                                        b0, b1, b2 = G0 / Gn, G1 / Gn, G2 / Gn
                                    else:
                                        b0, b1, b2 = 0.0, 0.0, 1.0
                                    frb = frame6(b0, b1, b2)
                                    hs = 0.5 * gp
                                    gs = 0.0
                                    for ot_ in range(no_t):
                                        for oa in range(no_a):
                                            w0, w1, w2 = _oriented(ot, ost, oca, osa, b0, b1, b2,
                                                                   frb, ot_, oa)
                                            pa0 = G0 + hs * w0
                                            pa1 = G1 + hs * w1
                                            pa2 = G2 + hs * w2
                                            pb0 = G0 - hs * w0
                                            pb1 = G1 - hs * w1
                                            pb2 = G2 - hs * w2
                                            v = (feval(k, pa0, pa1, pa2, fa)
                                                 * feval(l, pb0, pb1, pb2, fb))
                                            if sym:
                                                v += (feval(k, pa0, pa1, pa2, fb)
                                                      * feval(l, pb0, pb1, pb2, fa))
                                            gs += owt[ot_] * v
                                    g_acc += w * ratio * gs
        gain[p] = g_acc
        loss[p] = l_acc
    return gain, loss


@njit(parallel=True)
def strong_mix(pts, comps, masses, code, Cmat, gamma, skew, fa, fb, sym,
               ux, uw, width, rcut, gt, gst, gca, gsa, gwt, ot, ost, oca, osa, owt):
    P = pts.shape[0]
    s_ = masses.shape[0]
    gain = np.zeros(P)
    loss = np.zeros(P)
    ng_t = gt.shape[0]
    ng_a = gca.shape[0]
    no_t = ot.shape[0]
    no_a = oca.shape[0]
    wo_sum = 0.0
    for q in range(no_t):
        wo_sum += owt[q] * no_a
    for p in prange(P):
        x0, x1, x2 = pts[p, 0], pts[p, 1], pts[p, 2]
        al = comps[p]
        ma = masses[al]
        xn = math.sqrt(x0 * x0 + x1 * x1 + x2 * x2)
        if xn > 0.0:
            a0, a1, a2 = x0 / xn, x1 / xn, x2 / xn
        else:
            a0, a1, a2 = 0.0, 0.0, 1.0
        fra = frame6(a0, a1, a2)
        Fa_i = feval(al, x0, x1, x2, fa)
        Fb_i = feval(al, x0, x1, x2, fb)
        g_acc = 0.0
        l_acc = 0.0
        for be in range(s_):
            mb = masses[be]
            M = ma + mb
            Rmax = xn + rcut
            edges = radial_panels(xn, Rmax, width)
            for e in range(len(edges) - 1):
                lo = edges[e]
                hw = edges[e + 1] - lo
                for q in range(ux.shape[0]):
                    R = lo + hw * ux[q]
                    sig = sigma_mix(code, Cmat[al, be], gamma, skew, al, be, R)
                    wr = hw * uw[q] * R * R * R * sig
                    if wr == 0.0:
                        continue
                    for qt in range(ng_t):
                        for qa in range(ng_a):
                            n0, n1, n2 = _oriented(gt, gst, gca, gsa, a0, a1, a2, fra, qt, qa)
                            w = wr * gwt[qt]
                            y0 = x0 - R * n0
                            y1 = x1 - R * n1
                            y2 = x2 - R * n2
                            lv = Fa_i * feval(be, y0, y1, y2, fb)
                            if sym:
                                lv += Fb_i * feval(be, y0, y1, y2, fa)
                            l_acc += w * wo_sum * lv
                            G0 = (ma * x0 + mb * y0) / M
                            G1 = (ma * x1 + mb * y1) / M
                            G2 = (ma * x2 + mb * y2) / M
                            Gn = math.sqrt(G0 * G0 + G1 * G1 + G2 * G2)
                            if Gn > 0.0:
                                b0, b1, b2 = G0 / Gn, G1 / Gn, G2 / Gn
                            else:
                                b0, b1, b2 = 0.0, 0.0, 1.0
                            frb = frame6(b0, b1, b2)
                            ca_ = mb * R / M
                            cb_ = ma * R / M
                            gs = 0.0
                            for ot_ in range(no_t):
                                for oa in range(no_a):
                                    w0, w1, w2 = _oriented(ot, ost, oca, osa, b0, b1, b2, frb, ot_, oa)
                                    pa0 = G0 + ca_ * w0
                                    pa1 = G1 + ca_ * w1
                                    pa2 = G2 + ca_ * w2
                                    pb0 = G0 - cb_ * w0
                                    pb1 = G1 - cb_ * w1
                                    pb2 = G2 - cb_ * w2
                                    v = feval(al, pa0, pa1, pa2, fa) * feval(be, pb0, pb1, pb2, fb)
                                    if sym:
                                        v += (feval(al, pa0, pa1, pa2, fb)
                                              * feval(be, pb0, pb1, pb2, fa))
                                    gs += owt[ot_] * v
                            g_acc += w * gs
        gain[p] = g_acc
        loss[p] = l_acc
    return gain, loss


@njit
def _test_value(mode, c, x0, x1, x2, f, phi, ta, tb, tc, td):
    if mode == 1:
        v = feval(c, x0, x1, x2, f)
        if v <= 0.0:
            return math.nan
        return math.log(v / phi[c])
    q = x0 * x0 + x1 * x1 + x2 * x2
    return ta[c] + tb[0] * x0 + tb[1] * x1 + tb[2] * x2 + tc * q + td * q * q


@njit(parallel=True)
def weak_poly(Gpts, Gw, m, I, phi, code, C, gamma, skew, f, mode, ta, tb, tc, td,
              ux, uw, width, rmax, gnodes, gw, onodes, ow):
    NG = Gpts.shape[0]
    r = I.shape[0]
    val = np.zeros(NG)
    scl = np.zeros(NG)
    bad = np.zeros(NG)
    ng = gw.shape[0]
    no = ow.shape[0]
    wo_sum = 0.0
    for q in range(no):
        wo_sum += ow[q]
    for p in prange(NG):
        G0, G1, G2 = Gpts[p, 0], Gpts[p, 1], Gpts[p, 2]
        v_acc = 0.0
        s_acc = 0.0
        nbad = 0.0
        for i in range(r):
            for j in range(r):
                for k in range(r):
                    for l in range(r):
                        dI = I[k] + I[l] - I[i] - I[j]
                        Rth2 = max(4.0 * dI / m, 0.0)
                        if rmax * rmax <= Rth2:
                            continue
                        smax = math.sqrt(rmax * rmax - Rth2)
                        edges = radial_panels(0.0, smax, width)
                        ratio = phi[i] * phi[j] / (phi[k] * phi[l])
                        for e in range(len(edges) - 1):
                            lo = edges[e]
                            hw = edges[e + 1] - lo
                            for q in range(ux.shape[0]):
                                s = lo + hw * ux[q]
                                R = math.sqrt(Rth2 + s * s)
                                if dI > 0.0:
                                    gp = s
                                else:
                                    gp = math.sqrt(R * R - 4.0 * dI / m)
                                sig = sigma_poly(code, C, gamma, skew, i, j, phi[i], phi[j], R,
                                                 gp)
                                wr = Gw[p] * hw * uw[q] * s * R * R * sig
                                if wr == 0.0:
                                    continue
                                for a in range(ng):
                                    h0 = 0.5 * R * gnodes[a, 0]
                                    h1 = 0.5 * R * gnodes[a, 1]
                                    h2 = 0.5 * R * gnodes[a, 2]
                                    fi = feval(i, G0 + h0, G1 + h1, G2 + h2, f)
                                    fj = feval(j, G0 - h0, G1 - h1, G2 - h2, f)
                                    Phi = fi * fj
                                    Ti = _test_value(mode, i, G0 + h0, G1 + h1, G2 + h2, f, phi,
                                                     ta, tb, tc, td)
                                    Tj = _test_value(mode, j, G0 - h0, G1 - h1, G2 - h2, f, phi,
                                                     ta, tb, tc, td)
                                    w = wr * gw[a]
                                    if math.isnan(Ti) or math.isnan(Tj):
                                        nbad += 1.0
                                        continue
                                    s_acc += w * wo_sum * abs(Phi) * abs(Ti)
                                    for b in range(no):
                                        k0 = 0.5 * gp * onodes[b, 0]
                                        k1 = 0.5 * gp * onodes[b, 1]
                                        k2 = 0.5 * gp * onodes[b, 2]
                                        fk = feval(k, G0 + k0, G1 + k1, G2 + k2, f)
                                        fl = feval(l, G0 - k0, G1 - k1, G2 - k2, f)
                                        Tk = _test_value(mode, k, G0 + k0, G1 + k1, G2 + k2, f,
                                                         phi, ta, tb, tc, td)
                                        Tl = _test_value(mode, l, G0 - k0, G1 - k1, G2 - k2, f,
                                                         phi, ta, tb, tc, td)
                                        if math.isnan(Tk) or math.isnan(Tl):
                                            nbad += 1.0
                                            continue
                                        Phip = fk * fl * ratio
                                        v_acc += 0.25 * w * ow[b] * (Phip - Phi) * (
                                            Ti + Tj - Tk - Tl)
        val[p] = v_acc
        scl[p] = s_acc
        bad[p] = nbad
    return val, scl, bad
