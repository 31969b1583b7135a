"""Hot numeric kernels, each in a numba flavour and a pure-numpy flavour.

Subsets are int64 bitmasks (bit ``x`` set means element ``x`` is present);
the ground set is capped at 63 elements so every mask is non-negative.
Outcome ``W`` of an enumeration over ``2^X`` is the integer ``W`` itself.

The public names at the bottom dispatch on ``THRESHOLD_LAB_BACKEND`` at call
time, so tests and benchmarks can flip the flag without re-importing.
"""

import numpy as np

from ._backend import njit, requested_backend

# ---------------------------------------------------------------- numba side


@njit
def _minimal_nb(masks):
    # masks sorted by (popcount, value) and deduplicated
    keep = np.zeros(masks.size, dtype=np.bool_)
    kept = np.empty(masks.size, dtype=np.int64)
    nkept = 0
    for i in range(masks.size):
        m = masks[i]
        covered = False
        for j in range(nkept):
            if kept[j] & m == kept[j]:
                covered = True
                break
        if not covered:
            keep[i] = True
            kept[nkept] = m
            nkept += 1
    return keep


@njit
def _outcome_weights_nb(p):
    n = p.size
    w = np.empty(1 << n, dtype=np.float64)
    w[0] = 1.0
    size = 1
    for x in range(n):
        px = p[x]
        for s in range(size):
            v = w[s]
            w[s + size] = v * px
            w[s] = v * (1.0 - px)
        size *= 2
    return w


@njit
def _upset_indicator_nb(members, n):
    out = np.zeros(1 << n, dtype=np.bool_)
    for w in range(1 << n):
        for k in range(members.size):
            m = members[k]
            if w & m == m:
                out[w] = True
                break
    return out


@njit
def _prob_upset_nb(members, p):
    w = _outcome_weights_nb(p)
    total = 0.0
    for s in range(w.size):
        for k in range(members.size):
            m = members[k]
            if s & m == m:
                total += w[s]
                break
    return total


@njit
def _pack_masks_nb(uniforms, p):
    trials, n = uniforms.shape
    out = np.zeros(trials, dtype=np.int64)
    for t in range(trials):
        m = np.int64(0)
        for x in range(n):
            if uniforms[t, x] < p[x]:
                m |= np.int64(1) << x
        out[t] = m
    return out


@njit
def _upset_hits_nb(samples, members):
    out = np.zeros(samples.size, dtype=np.bool_)
    for t in range(samples.size):
        s = samples[t]
        for k in range(members.size):
            m = members[k]
            if s & m == m:
                out[t] = True
                break
    return out


@njit
def _cover_dp_nb(h, cov, cost, ptr, idx, tie_eps):
    size = 1 << h
    dp = np.full(size, np.inf)
    cnt = np.zeros(size, dtype=np.int64)
    choice = np.full(size, -1, dtype=np.int64)
    dp[0] = 0.0
    for s in range(1, size):
        low = 0
        while not (s >> low) & 1:
            low += 1
        best = np.inf
        bestn = 0
        bestc = -1
        for a in range(ptr[low], ptr[low + 1]):
            c = idx[a]
            rest = s & ~cov[c]
            val = cost[c] + dp[rest]
            nsets = 1 + cnt[rest]
            if val < best - tie_eps or (abs(val - best) <= tie_eps and nsets < bestn):
                best = val
                bestn = nsets
                bestc = c
        dp[s] = best
        cnt[s] = bestn
        choice[s] = bestc
    return dp, cnt, choice


# ---------------------------------------------------------------- numpy side


def _minimal_np(masks):
    keep = np.zeros(masks.size, dtype=bool)
    kept = np.empty(0, dtype=np.int64)
    for i, m in enumerate(masks):
        if not np.any((kept & m) == kept):
            keep[i] = True
            kept = np.append(kept, m)
    return keep


def _outcome_weights_np(p):
    w = np.ones(1, dtype=np.float64)
    for px in p:
        w = np.concatenate((w * (1.0 - px), w * px))
    return w


def _upset_indicator_np(members, n):
    outcomes = np.arange(1 << n, dtype=np.int64)
    out = np.zeros(outcomes.size, dtype=bool)
    for m in members:
        out |= (outcomes & m) == m
    return out


def _prob_upset_np(members, p):
    w = _outcome_weights_np(p)
    return float(w[_upset_indicator_np(members, p.size)].sum())


def _pack_masks_np(uniforms, p):
    bits = (uniforms < p).astype(np.int64)
    return bits @ (np.int64(1) << np.arange(p.size, dtype=np.int64))


def _upset_hits_np(samples, members):
    out = np.zeros(samples.size, dtype=bool)
    for m in members:
        out |= (samples & m) == m
    return out


def _layer_tables(h):
    states = np.arange(1 << h, dtype=np.int64)
    pc = np.zeros(states.size, dtype=np.int64)
    low = np.full(states.size, -1, dtype=np.int64)
    for b in reversed(range(h)):
        bit = (states >> b) & 1
        pc += bit
        low[bit == 1] = b
    return states, pc, low


def _cover_dp_np(h, cov, cost, ptr, idx, tie_eps):
    # states of popcount k depend only on states of smaller popcount, so
    # each (popcount, lowest bit) group is solved as one vector operation
    states, pc, low = _layer_tables(h)
    dp = np.full(states.size, np.inf)
    cnt = np.zeros(states.size, dtype=np.int64)
    choice = np.full(states.size, -1, dtype=np.int64)
    dp[0] = 0.0
    for k in range(1, h + 1):
        layer = states[pc == k]
        layer_low = low[layer]
        for i in range(h):
            grp = layer[layer_low == i]
            if grp.size == 0:
                continue
            best = np.full(grp.size, np.inf)
            bestn = np.zeros(grp.size, dtype=np.int64)
            bestc = np.full(grp.size, -1, dtype=np.int64)
            for c in idx[ptr[i]:ptr[i + 1]]:
                rest = grp & ~cov[c]
                val = cost[c] + dp[rest]
                nsets = 1 + cnt[rest]
                better = (val < best - tie_eps) | (
                    (np.abs(val - best) <= tie_eps) & (nsets < bestn)
                )
                best = np.where(better, val, best)
                bestn = np.where(better, nsets, bestn)
                bestc = np.where(better, c, bestc)
            dp[grp] = best
            cnt[grp] = bestn
            choice[grp] = bestc
    return dp, cnt, choice


# ---------------------------------------------------------------- dispatch

IMPLS = {
    "minimal": (_minimal_nb, _minimal_np),
    "outcome_weights": (_outcome_weights_nb, _outcome_weights_np),
    "upset_indicator": (_upset_indicator_nb, _upset_indicator_np),
    "prob_upset": (_prob_upset_nb, _prob_upset_np),
    "pack_masks": (_pack_masks_nb, _pack_masks_np),
    "upset_hits": (_upset_hits_nb, _upset_hits_np),
    "cover_dp": (_cover_dp_nb, _cover_dp_np),
}


def impl(name, backend=None):
    backend = backend or requested_backend()
    nb, np_ = IMPLS[name]
    return nb if backend == "numba" else np_


def _as_masks(members):
    return np.ascontiguousarray(members, dtype=np.int64)


def _as_probs(p):
    return np.ascontiguousarray(p, dtype=np.float64)


def minimal_keep(masks):
    """Boolean keep-vector for inclusion-minimal masks.

    ``masks`` must be deduplicated and sorted by (popcount, value).
    """
    return impl("minimal")(_as_masks(masks))


def outcome_weights(p):
    """``mu_p(W)`` for every ``W`` in ``0 .. 2^n - 1``."""
    return impl("outcome_weights")(_as_probs(p))


def upset_indicator(members, n):
    """``out[W]`` is True iff ``W`` contains some member."""
    return impl("upset_indicator")(_as_masks(members), n)


def prob_upset(members, p):
    return float(impl("prob_upset")(_as_masks(members), _as_probs(p)))


def pack_masks(uniforms, p):
    """Turn a (trials, n) block of uniforms into sampled subset masks."""
    return impl("pack_masks")(np.ascontiguousarray(uniforms, dtype=np.float64), _as_probs(p))


def upset_hits(samples, members):
    return impl("upset_hits")(_as_masks(samples), _as_masks(members))


def cover_dp(h, cov, cost, ptr, idx, tie_eps):
    """Min-cost cover DP over subsets of ``h`` target members.

    ``cov[c]`` is the bitmask of targets candidate ``c`` covers and
    ``idx[ptr[i]:ptr[i+1]]`` lists, in preference order, the candidates
    covering target ``i``. Returns ``(dp, count, choice)`` indexed by the
    bitmask of targets still to cover.
    """
    return impl("cover_dp")(
        int(h),
        _as_masks(cov),
        _as_probs(cost),
        np.ascontiguousarray(ptr, dtype=np.int64),
        np.ascontiguousarray(idx, dtype=np.int64),
        float(tie_eps),
    )
