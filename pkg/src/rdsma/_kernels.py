"""Compiled inner loops: degree-preserving edge-swap chains and the
recruitment process.  All randomness is consumed from buffers that the
caller pre-draws from its own generator, so results are reproducible and
independent of threading."""
from __future__ import annotations

import math

import numpy as np
from numba import njit

MODE_MH = 0
MODE_ANNEAL = 1
MODE_POLISH = 2


@njit(cache=True, inline="always")
def _xdiff(z, u, v):
    return 1 if z[u] != z[v] else 0


@njit(cache=True)
def swap_chain(adj, edges, z, mode, eta, target, stop_at, t0, t_ratio, t_floor,
               g0, re1, re2, rorient, racc):
    """Run one batch of two-edge swap proposals in place.

    Each proposal picks the edge pair (a,b),(c,d) indexed by re1/re2,
    orients it by rorient, and, if the rewired pair (a,d),(c,b) is
    admissible (four distinct nodes, both new edges absent), accepts it
    by Metropolis-Hastings on exp(eta * g) (mode 0), by an annealing
    rule on |g - target| with geometric temperature decay per proposal
    (mode 1), or only when |g - target| does not grow (mode 2, which
    mixes the graph while pinning g).  Returns (g, proposals consumed,
    temperature).  Mode 1 stops as soon as |g - target| < stop_at.
    """
    g = g0
    temp = t0
    nprop = re1.shape[0]
    for t in range(nprop):
        if mode == MODE_ANNEAL and abs(g - target) < stop_at:
            return g, t, temp
        e1 = re1[t]
        e2 = re2[t]
        ok = False
        dg = 0
        a = edges[e1, 0]
        b = edges[e1, 1]
        c = edges[e2, 0]
        d = edges[e2, 1]
        if rorient[t] == 1:
            c, d = d, c
        if e1 != e2 and a != c and a != d and b != c and b != d \
                and adj[a, d] == 0 and adj[c, b] == 0:
            dg = _xdiff(z, a, d) + _xdiff(z, c, b) - _xdiff(z, a, b) - _xdiff(z, c, d)
            if mode == MODE_MH:
                val = eta * dg
                ok = val >= 0.0 or racc[t] < math.exp(val)
            elif mode == MODE_POLISH:
                ok = abs(g + dg - target) <= abs(g - target)
            else:
                dobj = abs(g + dg - target) - abs(g - target)
                ok = dobj <= 0.0 or racc[t] < math.exp(-dobj / temp)
        if ok:
            adj[a, b] = 0
            adj[b, a] = 0
            adj[c, d] = 0
            adj[d, c] = 0
            adj[a, d] = 1
            adj[d, a] = 1
            adj[c, b] = 1
            adj[b, c] = 1
            if a < d:
                edges[e1, 0] = a
                edges[e1, 1] = d
            else:
                edges[e1, 0] = d
                edges[e1, 1] = a
            if c < b:
                edges[e2, 0] = c
                edges[e2, 1] = b
            else:
                edges[e2, 0] = b
                edges[e2, 1] = c
            g += dg
        if mode == MODE_ANNEAL:
            temp *= t_ratio
            if temp < t_floor:
                temp = t_floor
    return g, nprop, temp


@njit(cache=True)
def tetrad_batch(adj, edges, z, re1, re2, rorient, rflip, out_delta, out_label):
    """Collect (change statistic, observed-side indicator) pairs from
    candidate tetrads.  Candidates failing the admissibility checks are
    skipped; rflip mirrors the tetrad onto its swapped configuration so
    both sides appear in the sample.  Returns the number collected."""
    cnt = 0
    cap = out_delta.shape[0]
    for t in range(re1.shape[0]):
        if cnt >= cap:
            break
        e1 = re1[t]
        e2 = re2[t]
        if e1 == e2:
            continue
        a = edges[e1, 0]
        b = edges[e1, 1]
        c = edges[e2, 0]
        d = edges[e2, 1]
        if rorient[t] == 1:
            c, d = d, c
        if a == c or a == d or b == c or b == d:
            continue
        if adj[a, d] == 1 or adj[c, b] == 1:
            continue
        delta = _xdiff(z, a, b) + _xdiff(z, c, d) - _xdiff(z, a, d) - _xdiff(z, c, b)
        if rflip[t] == 1:
            out_delta[cnt] = -delta
            out_label[cnt] = 0
        else:
            out_delta[cnt] = delta
            out_label[cnt] = 1
        cnt += 1
    return cnt


@njit(cache=True)
def rds_run(nbr_flat, nbr_off, z, degrees, seeds, n_target,
            mode_table, coupons, off_cum, referral_w, reseed, randbuf,
            out_nodes, out_wave, out_recruiter):
    """Simulate one recruitment chain over the CSR graph.

    Respondents are processed through a single FIFO queue (seeds first,
    in order).  Fixed-coupon mode recruits min(coupons, available);
    table mode draws the coupon count from the cumulative offspring
    table off_cum[min(wave, W-1), status] and reassigns unfulfilled
    recruitments to the next queued respondent of the same status
    holding fewer than 3 assignments, capping anyone's total at 3.
    Recruits are drawn without replacement from the respondent's
    unsampled alters, infected alters weighted by referral_w.
    Enrollment stops the moment n_target is reached.  On an empty queue
    either one replacement seed is drawn proportional to degree from
    the unsampled nodes (reseed) or the run ends short.

    Returns (number sampled, died_out flag, random numbers consumed).
    """
    n = z.shape[0]
    w_max = off_cum.shape[0]
    sampled = np.zeros(n, dtype=np.uint8)
    wave = np.zeros(n, dtype=np.int64)
    extras = np.zeros(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    elig = np.empty(n, dtype=np.int64)
    head = 0
    tail = 0
    cnt = 0
    used = 0
    died = 0

    for si in range(seeds.shape[0]):
        if cnt >= n_target:
            break
        s = seeds[si]
        sampled[s] = 1
        wave[s] = 0
        out_nodes[cnt] = s
        out_wave[cnt] = 0
        out_recruiter[cnt] = -1
        queue[tail] = s
        tail += 1
        cnt += 1

    while cnt < n_target:
        if head == tail:
            if reseed:
                total = 0.0
                for i in range(n):
                    if sampled[i] == 0 and degrees[i] > 0:
                        total += degrees[i]
                if total <= 0.0:
                    died = 1
                    break
                r = randbuf[used] * total
                used += 1
                acc = 0.0
                pick = -1
                for i in range(n):
                    if sampled[i] == 0 and degrees[i] > 0:
                        acc += degrees[i]
                        if r < acc:
                            pick = i
                            break
                if pick < 0:
                    died = 1
                    break
                sampled[pick] = 1
                wave[pick] = 0
                out_nodes[cnt] = pick
                out_wave[cnt] = 0
                out_recruiter[cnt] = -1
                queue[tail] = pick
                tail += 1
                cnt += 1
                continue
            died = 1
            break

        u = queue[head]
        head += 1
        w = wave[u]
        if mode_table:
            wi = w if w < w_max else w_max - 1
            r = randbuf[used]
            used += 1
            row = off_cum[wi, z[u]]
            c = 0
            while c < row.shape[0] - 1 and r >= row[c]:
                c += 1
            c += extras[u]
            if c > 3:
                c = 3
        else:
            c = coupons

        m = 0
        for idx in range(nbr_off[u], nbr_off[u + 1]):
            v = nbr_flat[idx]
            if sampled[v] == 0:
                elig[m] = v
                m += 1

        fulfilled = 0
        for _ in range(c):
            if cnt >= n_target or m == 0:
                break
            tot = 0.0
            for t in range(m):
                tot += referral_w if z[elig[t]] == 1 else 1.0
            r = randbuf[used] * tot
            used += 1
            acc = 0.0
            pick = m - 1
            for t in range(m):
                acc += referral_w if z[elig[t]] == 1 else 1.0
                if r < acc:
                    pick = t
                    break
            v = elig[pick]
            elig[pick] = elig[m - 1]
            m -= 1
            sampled[v] = 1
            wave[v] = w + 1
            out_nodes[cnt] = v
            out_wave[cnt] = w + 1
            out_recruiter[cnt] = u
            queue[tail] = v
            tail += 1
            cnt += 1
            fulfilled += 1

        if mode_table and fulfilled < c and cnt < n_target:
            for _ in range(c - fulfilled):
                for qi in range(head, tail):
                    v = queue[qi]
                    if z[v] == z[u] and extras[v] < 3:
                        extras[v] += 1
                        break

    return cnt, died, used
