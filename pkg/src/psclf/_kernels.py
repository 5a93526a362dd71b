"""Compiled SC / SCL inner loops.

Tree memory layout: stage ``s`` (node size ``2**s``) lives at offsets
``[2**s, 2**(s+1))`` of a length-``2N`` row. Alpha (LLR) rows hold stages
``0..n-1`` (stage ``n`` is the channel, shared by every path); beta
(partial sum) rows hold the completed left child of each stage, and stage
``n`` receives the re-encoded codeword when the last bit is decided.

SCL paths reference one physical row per stage (``aptr``/``bptr``) with
reference counts. A stage row is only ever written in full, so a shared row
is never copied: the writer just detaches to a free row.

Decisions are not stored per path; ``dec[i, slot]`` / ``par[i, slot]`` form
a backpointer forest walked by :func:`traceback`.
"""

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _f(a, b):
    s = 1.0
    if a < 0:
        s = -s
    if b < 0:
        s = -s
    aa = abs(a)
    bb = abs(b)
    return s * (aa if aa < bb else bb)


@njit(cache=True, inline="always")
def ctz(i):
    t = 0
    while (i & 1) == 0:
        i >>= 1
        t += 1
    return t


@njit(cache=True, inline="always")
def pm_update(pm, llr, bit):
    """Path metric after deciding ``bit`` on a leaf with LLR ``llr``."""
    hd = 1 if llr < 0 else 0
    if bit != hd:
        return pm + abs(llr)
    return pm


@njit(cache=True, inline="always")
def _stable_order(cand_pm, order):
    """Insertion sort of candidate indices by metric; equal metrics keep index order."""
    m = cand_pm.shape[0]
    for k in range(m):
        order[k] = k
    for k in range(1, m):
        c = order[k]
        v = cand_pm[c]
        j = k - 1
        while j >= 0 and cand_pm[order[j]] > v:
            order[j + 1] = order[j]
            j -= 1
        order[j + 1] = c


@njit(cache=True)
def scl_step_sort(cand_pm, L, flip):
    """Stable selection of L of 2L candidates.

    Returns ``(kept, pm_best, pm_lth)``; ``kept`` lists candidate indices in
    ascending PM order. ``flip`` keeps the L largest instead.
    """
    order = np.empty(2 * L, dtype=np.int64)
    _stable_order(cand_pm, order)
    if flip:
        kept = order[L:2 * L].copy()
    else:
        kept = order[:L].copy()
    return kept, cand_pm[order[0]], cand_pm[order[L]]


# --------------------------------------------------------------------------
# single-path SC

@njit(cache=True)
def sc_decode_kernel(channel, frozen, flip_index, u_hat, leaf):
    """Min-sum SC. Inverts the decision at ``flip_index`` (if >= 0).

    Fills ``u_hat`` and the leaf LLRs ``leaf``; returns the final codeword
    estimate (partial sums at the root).
    """
    N = channel.shape[0]
    n = 0
    while (1 << n) < N:
        n += 1
    alpha = np.zeros(2 * N)
    beta = np.zeros(2 * N, dtype=np.uint8)
    for i in range(N):
        if i == 0:
            top = n
        else:
            top = ctz(i) + 1
        for s in range(top - 1, -1, -1):
            h = 1 << s
            if s == top - 1 and i != 0:
                # g: right child of stage s+1
                if s + 1 == n:
                    for j in range(h):
                        if beta[h + j]:
                            alpha[h + j] = channel[h + j] - channel[j]
                        else:
                            alpha[h + j] = channel[h + j] + channel[j]
                else:
                    po = 2 * h
                    for j in range(h):
                        if beta[h + j]:
                            alpha[h + j] = alpha[po + h + j] - alpha[po + j]
                        else:
                            alpha[h + j] = alpha[po + h + j] + alpha[po + j]
            else:
                if s + 1 == n:
                    for j in range(h):
                        alpha[h + j] = _f(channel[j], channel[h + j])
                else:
                    po = 2 * h
                    for j in range(h):
                        alpha[h + j] = _f(alpha[po + j], alpha[po + h + j])
        llr = alpha[1]
        leaf[i] = llr
        if frozen[i]:
            b = 0
        else:
            b = 1 if llr < 0 else 0
            if i == flip_index:
                b ^= 1
        u_hat[i] = b
        _propagate(beta, beta, i, b, n)
    return beta[N:2 * N].copy()


@njit(cache=True, inline="always")
def _propagate(src, dst, i, b, n):
    """Write the partial sums completed by bit ``i`` into stage ctz(i+1) of ``dst``.

    ``src`` supplies the stored left siblings of the lower stages.
    """
    N = 1 << n
    if i == N - 1:
        sp = n
    else:
        sp = ctz(i + 1)
    size = 1 << sp
    base = size  # offset of stage sp
    dst[base + size - 1] = b
    for s in range(sp):
        h = 1 << s
        lo = base + size - 2 * h
        for j in range(h):
            dst[lo + j] = src[h + j] ^ dst[lo + h + j]


# --------------------------------------------------------------------------
# SCL state

@njit(cache=True)
def init_state(L, N, n, aptr, bptr, arefc, brefc, pm, active, onpath, meta):
    aptr[:, :] = 0
    bptr[:, :] = 0
    arefc[:, :] = 0
    brefc[:, :] = 0
    arefc[:, 0] = 1
    brefc[:, 0] = 1
    pm[:] = 0.0
    active[:] = False
    active[0] = True
    onpath[:] = False
    onpath[0] = True
    meta[0] = 0   # next index to decode
    meta[1] = 1   # number of active paths
    meta[2] = -1  # first index where every path left the genie path


@njit(cache=True, inline="always")
def _clone(src, dst, aptr, bptr, arefc, brefc, n):
    for s in range(n + 1):
        a = aptr[src, s]
        aptr[dst, s] = a
        arefc[s, a] += 1
        b = bptr[src, s]
        bptr[dst, s] = b
        brefc[s, b] += 1


@njit(cache=True, inline="always")
def _kill(l, aptr, bptr, arefc, brefc, n):
    for s in range(n + 1):
        arefc[s, aptr[l, s]] -= 1
        brefc[s, bptr[l, s]] -= 1


@njit(cache=True, inline="always")
def _leaf_llr(l, i, channel, alpha, beta, aptr, bptr, arefc, L, n):
    if i == 0:
        top = n
    else:
        top = ctz(i) + 1
    # detach shared rows before they are overwritten
    for s in range(top):
        a = aptr[l, s]
        if arefc[s, a] > 1:
            arefc[s, a] -= 1
            b = 0
            while arefc[s, b] != 0:
                b += 1
            arefc[s, b] = 1
            aptr[l, s] = b
    for s in range(top - 1, -1, -1):
        h = 1 << s
        row = aptr[l, s]
        if s == top - 1 and i != 0:
            brow = bptr[l, s]
            if s + 1 == n:
                for j in range(h):
                    if beta[brow, h + j]:
                        alpha[row, h + j] = channel[h + j] - channel[j]
                    else:
                        alpha[row, h + j] = channel[h + j] + channel[j]
            else:
                prow = aptr[l, s + 1]
                po = 2 * h
                for j in range(h):
                    if beta[brow, h + j]:
                        alpha[row, h + j] = alpha[prow, po + h + j] - alpha[prow, po + j]
                    else:
                        alpha[row, h + j] = alpha[prow, po + h + j] + alpha[prow, po + j]
        else:
            if s + 1 == n:
                for j in range(h):
                    alpha[row, h + j] = _f(channel[j], channel[h + j])
            else:
                prow = aptr[l, s + 1]
                po = 2 * h
                for j in range(h):
                    alpha[row, h + j] = _f(alpha[prow, po + j], alpha[prow, po + h + j])
    return alpha[aptr[l, 0], 1]


@njit(cache=True, inline="always")
def _store_bit(l, i, b, beta, bptr, brefc, L, n):
    N = 1 << n
    if i == N - 1:
        sp = n
    else:
        sp = ctz(i + 1)
    row = bptr[l, sp]
    if brefc[sp, row] > 1:
        brefc[sp, row] -= 1
        row = 0
        while brefc[sp, row] != 0:
            row += 1
        brefc[sp, row] = 1
        bptr[l, sp] = row
    size = 1 << sp
    base = size
    beta[row, base + size - 1] = b
    for s in range(sp):
        h = 1 << s
        srow = bptr[l, s]
        lo = base + size - 2 * h
        for j in range(h):
            beta[row, lo + j] = beta[srow, h + j] ^ beta[row, lo + h + j]


@njit(cache=True)
def scl_run(channel, frozen, stop, L, flip_index, genie, use_genie, stop_on_divergence,
            alpha, beta, aptr, bptr, arefc, brefc, pm, active, onpath, meta, dec, par,
            rec_best, rec_lth):
    """Decode from ``meta[0]`` through ``stop`` inclusive.

    Sort records for index i go to ``rec_best[i]``/``rec_lth[i]`` (NaN where
    no 2L -> L sort happens). A sort at ``flip_index`` keeps the L worst
    candidates. With ``use_genie``, ``meta[2]`` receives the first index at
    which no path agrees with ``genie``; ``stop_on_divergence`` then returns
    right after it.
    """
    n = aptr.shape[1] - 1
    start = meta[0]
    llrs = np.empty(L)
    cand = np.empty(2 * L)
    keep0 = np.zeros(L, dtype=np.bool_)
    keep1 = np.zeros(L, dtype=np.bool_)
    order = np.empty(2 * L, dtype=np.int64)
    src = np.empty(L, dtype=np.int64)
    old_on = np.empty(L, dtype=np.bool_)
    for i in range(start, stop + 1):
        rec_best[i] = np.nan
        rec_lth[i] = np.nan
        for l in range(L):
            if active[l]:
                llrs[l] = _leaf_llr(l, i, channel, alpha, beta, aptr, bptr, arefc, L, n)
        n_act = meta[1]
        if frozen[i]:
            for l in range(L):
                if active[l]:
                    pm[l] = pm_update(pm[l], llrs[l], 0)
                    dec[i, l] = 0
                    par[i, l] = l
                    if use_genie:
                        onpath[l] = onpath[l] and genie[i] == 0
                    _store_bit(l, i, 0, beta, bptr, brefc, L, n)
        elif 2 * n_act <= L:
            # path doubling before the list is full; no sort
            k = 0
            for l in range(L):
                if active[l]:
                    src[k] = l
                    k += 1
            for k in range(n_act):
                l = src[k]
                q = 0
                while active[q]:
                    q += 1
                active[q] = True
                _clone(l, q, aptr, bptr, arefc, brefc, n)
                base_pm = pm[l]
                pm[l] = pm_update(base_pm, llrs[l], 0)
                pm[q] = pm_update(base_pm, llrs[l], 1)
                dec[i, l] = 0
                par[i, l] = l
                dec[i, q] = 1
                par[i, q] = l
                if use_genie:
                    on = onpath[l]
                    onpath[l] = on and genie[i] == 0
                    onpath[q] = on and genie[i] == 1
                _store_bit(l, i, 0, beta, bptr, brefc, L, n)
                _store_bit(q, i, 1, beta, bptr, brefc, L, n)
            meta[1] = 2 * n_act
        else:
            # 2L candidates, candidate 2l+b extends slot l with bit b
            for l in range(L):
                cand[2 * l] = pm_update(pm[l], llrs[l], 0)
                cand[2 * l + 1] = pm_update(pm[l], llrs[l], 1)
            _stable_order(cand, order)
            rec_best[i] = cand[order[0]]
            rec_lth[i] = cand[order[L]]
            off = L if i == flip_index else 0
            keep0[:] = False
            keep1[:] = False
            for k in range(L):
                c = order[off + k]
                if c & 1:
                    keep1[c >> 1] = True
                else:
                    keep0[c >> 1] = True
            for l in range(L):
                if not keep0[l] and not keep1[l]:
                    _kill(l, aptr, bptr, arefc, brefc, n)
                    active[l] = False
            old_on[:] = onpath
            for l in range(L):
                if keep0[l] and keep1[l]:
                    q = 0
                    while active[q] or keep0[q] or keep1[q]:
                        q += 1
                    active[q] = True
                    _clone(l, q, aptr, bptr, arefc, brefc, n)
                    pm[q] = cand[2 * l + 1]
                    dec[i, q] = 1
                    par[i, q] = l
                    if use_genie:
                        onpath[q] = old_on[l] and genie[i] == 1
                    _store_bit(q, i, 1, beta, bptr, brefc, L, n)
            for l in range(L):
                if keep0[l] or keep1[l]:
                    b = 0 if keep0[l] else 1
                    pm[l] = cand[2 * l + b]
                    dec[i, l] = b
                    par[i, l] = l
                    if use_genie:
                        onpath[l] = old_on[l] and genie[i] == b
                    _store_bit(l, i, b, beta, bptr, brefc, L, n)
        meta[0] = i + 1
        if use_genie and meta[2] < 0:
            alive = False
            for l in range(L):
                if active[l] and onpath[l]:
                    alive = True
            if not alive:
                meta[2] = i
                if stop_on_divergence:
                    return


@njit(cache=True)
def traceback(dec, par, active, stop):
    """Decisions u_0..u_stop of every slot (rows of inactive slots are zero)."""
    L = active.shape[0]
    out = np.zeros((L, stop + 1), dtype=np.uint8)
    for l in range(L):
        if not active[l]:
            continue
        j = l
        for k in range(stop, -1, -1):
            out[l, k] = dec[k, j]
            j = par[k, j]
    return out
