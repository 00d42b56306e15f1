"""Numba kernels for the event-driven contact process and exact crossing sums."""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def contact_kernel(indptr, indices, birth_cap, deg, deg_max, lam, t_max,
                   schedule, seed, audit_every):
    """Exact-in-law next-event simulation from the all-occupied state.

    Two aggregate channels: deaths (rate = occupied count) and births
    (rate = lam * directed kept edges from an occupied birth-capable vertex to
    a vacant one, tracked incrementally). The birth edge is drawn uniformly
    among those links by degree-capped rejection.

    Returns (schedule counts, extinction time, censored, n_events, audit_ok).
    """
    n = len(indptr) - 1
    np.random.seed(seed)
    occ = np.ones(n, dtype=np.uint8)
    occ_list = np.arange(n)
    occ_pos = np.arange(n)
    n_occ = n
    bc_list = np.empty(n, dtype=np.int64)
    bc_pos = np.full(n, -1, dtype=np.int64)
    n_bc = 0
    for v in range(n):
        if birth_cap[v] and deg[v] > 0:
            bc_list[n_bc] = v
            bc_pos[v] = n_bc
            n_bc += 1
    links = 0  # all occupied: no vacant targets

    ns = len(schedule)
    counts = np.zeros(ns, dtype=np.int64)
    si = 0
    t = 0.0
    events = 0
    audit_ok = True

    while True:
        if n_occ == 0:
            while si < ns:
                counts[si] = 0
                si += 1
            return counts, t, False, events, audit_ok
        total = n_occ + lam * links
        t_next = t + np.random.exponential(1.0 / total)
        while si < ns and schedule[si] < t_next and schedule[si] <= t_max:
            counts[si] = n_occ
            si += 1
        if t_next > t_max:
            while si < ns and schedule[si] <= t_max:
                counts[si] = n_occ
                si += 1
            return counts, t_max, True, events, audit_ok
        t = t_next
        events += 1
        if np.random.random() * total < n_occ:
            # death: uniform occupied vertex
            v = occ_list[np.random.randint(0, n_occ)]
            n_occ -= 1
            last = occ_list[n_occ]
            occ_list[occ_pos[v]] = last
            occ_pos[last] = occ_pos[v]
            occ[v] = 0
            if bc_pos[v] >= 0:
                n_bc -= 1
                lastb = bc_list[n_bc]
                bc_list[bc_pos[v]] = lastb
                bc_pos[lastb] = bc_pos[v]
                bc_pos[v] = -1
            vcap = birth_cap[v]
            for k in range(indptr[v], indptr[v + 1]):
                u = indices[k]
                if occ[u]:
                    if birth_cap[u]:
                        links += 1
                else:
                    if vcap:
                        links -= 1
        else:
            # birth: uniform link via rejection
            while True:
                x = bc_list[np.random.randint(0, n_bc)]
                dx = deg[x]
                if np.random.random() * deg_max >= dx:
                    continue
                y = indices[indptr[x] + np.random.randint(0, dx)]
                if occ[y] == 0:
                    break
            occ[y] = 1
            occ_list[n_occ] = y
            occ_pos[y] = n_occ
            n_occ += 1
            ycap = birth_cap[y]
            if ycap and deg[y] > 0:
                bc_list[n_bc] = y
                bc_pos[y] = n_bc
                n_bc += 1
            for k in range(indptr[y], indptr[y + 1]):
                u = indices[k]
                if occ[u]:
                    if birth_cap[u]:
                        links -= 1
                else:
                    if ycap:
                        links += 1
        if audit_every > 0 and events % audit_every == 0:
            check = 0
            for i in range(n_bc):
                x = bc_list[i]
                for k in range(indptr[x], indptr[x + 1]):
                    if occ[indices[k]] == 0:
                        check += 1
            n_check = 0
            for v in range(n):
                if occ[v]:
                    n_check += 1
            if check != links or n_check != n_occ:
                audit_ok = False
                return counts, t, True, events, audit_ok


@njit(cache=True)
def survival_kernel(indptr, indices, birth_cap, deg, deg_max, lam, t_max,
                    base_seed, reps):
    """Independent replicates with derived seeds base_seed + i."""
    empty = np.empty(0, dtype=np.float64)
    times = np.empty(reps, dtype=np.float64)
    censored = np.zeros(reps, dtype=np.uint8)
    for i in range(reps):
        _, t, cens, _, _ = contact_kernel(indptr, indices, birth_cap, deg, deg_max,
                                          lam, t_max, empty, base_seed + i, 0)
        times[i] = t
        if cens:
            censored[i] = 1
    return times, censored


@njit(cache=True)
def crossing_sum_kernel(eu, ev, left_mask, right_mask, n_vertices, p):
    """Sum of p^open (1-p)^closed over all edge configurations with an LR crossing.

    Vertices are encoded as bits of a 64-bit word; reachability from the left
    side is computed by fixpoint frontier expansion per configuration.
    """
    n_edges = len(eu)
    total = 0.0
    for config in range(1 << n_edges):
        reach = left_mask
        changed = True
        while changed:
            changed = False
            for j in range(n_edges):
                if config & (1 << j):
                    a = np.uint64(1) << np.uint64(eu[j])
                    b = np.uint64(1) << np.uint64(ev[j])
                    ra = reach & a
                    rb = reach & b
                    if ra != 0 and rb == 0:
                        reach |= b
                        changed = True
                    elif rb != 0 and ra == 0:
                        reach |= a
                        changed = True
        if reach & right_mask:
            n_open = 0
            c = config
            while c:
                n_open += 1
                c &= c - 1
            total += p ** n_open * (1.0 - p) ** (n_edges - n_open)
    return total
