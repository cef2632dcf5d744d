"""Exact network simplex for the balanced transportation problem.

Dense bipartite instances: every source may ship to every sink.  The cost is
either an explicit matrix or computed on the fly as the great-circle distance
between unit vectors, which keeps the 10^8-arc instances of fine sphere grids
inside memory.  The basis is a spanning tree maintained with parent/children
arrays; entering arcs come from wrap-around block pricing feeding a candidate
list, with a first-violating-arc (Bland) fallback that engages after long
degenerate stalls so termination is guaranteed.

On-the-fly pricing never evaluates arccos per arc: with cached cos/sin of the
node potentials, ``acos(d) < u + v - eps`` is screened as ``d > cos(u + v)``
up to a conservative margin, and only screened arcs get the exact check.
Returns primal flows on the basic arcs plus dual potentials certifying
optimality (reduced costs >= -eps everywhere, complementary slackness on the
basis by construction).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import SolverError, ValidationError

STATUS_OPTIMAL = 0
STATUS_PIVOT_CAP = 1

DEFAULT_MAX_PIVOTS = 10_000_000
REDUCED_COST_EPS = 1e-11
SCREEN_MARGIN = 1e-9


@njit(cache=True, inline="always")
def _dot(i, j, xs, xt):
    d = xs[i, 0] * xt[j, 0] + xs[i, 1] * xt[j, 1] + xs[i, 2] * xt[j, 2]
    if d > 1.0:
        d = 1.0
    elif d < -1.0:
        d = -1.0
    return d


@njit(cache=True, inline="always")
def _arc_cost(i, j, use_matrix, cost, xs, xt):
    if use_matrix:
        return cost[i, j]
    return math.acos(_dot(i, j, xs, xt))


@njit(cache=True, inline="always")
def _attach(v, p, child, next_sib, prev_sib):
    c = child[p]
    next_sib[v] = c
    prev_sib[v] = -1
    if c >= 0:
        prev_sib[c] = v
    child[p] = v


@njit(cache=True, inline="always")
def _detach(v, p, child, next_sib, prev_sib):
    pr = prev_sib[v]
    nx = next_sib[v]
    if pr >= 0:
        next_sib[pr] = nx
    else:
        child[p] = nx
    if nx >= 0:
        prev_sib[nx] = pr
    next_sib[v] = -1
    prev_sib[v] = -1


@njit(cache=True)
def _uf_find(uf, v):
    root = v
    while uf[root] != root:
        root = uf[root]
    while uf[v] != root:
        nxt = uf[v]
        uf[v] = root
        v = nxt
    return root


@njit(cache=True)
def _greedy_basis(a, b, use_matrix, cost, xs, xt):
    """Row-minimum greedy shipping; returns a forest of <= ns+nt-1 arcs.

    In on-the-fly mode the cheapest sink is the one with the largest dot
    product, so no inverse trigonometry is needed here.
    """
    ns = a.shape[0]
    nt = b.shape[0]
    cap = ns + nt
    arc_i = np.empty(cap, np.int64)
    arc_j = np.empty(cap, np.int64)
    arc_f = np.empty(cap, np.float64)
    n_arcs = 0
    rem_a = a.copy()
    rem_b = b.copy()
    active = np.arange(nt)
    n_active = nt
    for i in range(ns):
        while rem_a[i] > 0.0 and n_active > 0:
            best = 0
            if use_matrix:
                bc = cost[i, active[0]]
                for t in range(1, n_active):
                    cc = cost[i, active[t]]
                    if cc < bc:
                        bc = cc
                        best = t
            else:
                bd = _dot(i, active[0], xs, xt)
                for t in range(1, n_active):
                    dd = _dot(i, active[t], xs, xt)
                    if dd > bd:
                        bd = dd
                        best = t
            j = active[best]
            if rem_a[i] <= rem_b[j]:
                mv = rem_a[i]
                rem_b[j] -= mv
                rem_a[i] = 0.0
                if rem_b[j] <= 0.0:
                    rem_b[j] = 0.0
                    n_active -= 1
                    active[best] = active[n_active]
            else:
                mv = rem_b[j]
                rem_a[i] -= mv
                rem_b[j] = 0.0
                n_active -= 1
                active[best] = active[n_active]
            arc_i[n_arcs] = i
            arc_j[n_arcs] = j
            arc_f[n_arcs] = mv
            n_arcs += 1
    # rounding residues: fold leftover mass into an existing arc at the same
    # node so the arc set stays a forest; brand-new arcs only for nodes that
    # never received one (their residue is at float-drift scale anyway)
    for t in range(n_active):
        j = active[t]
        if rem_b[j] > 0.0:
            merged = False
            for k in range(n_arcs):
                if arc_j[k] == j:
                    arc_f[k] += rem_b[j]
                    merged = True
                    break
            if not merged:
                arc_i[n_arcs] = 0
                arc_j[n_arcs] = j
                arc_f[n_arcs] = rem_b[j]
                n_arcs += 1
    for i in range(ns):
        if rem_a[i] > 0.0:
            merged = False
            for k in range(n_arcs):
                if arc_i[k] == i:
                    arc_f[k] += rem_a[i]
                    merged = True
                    break
            if not merged:
                arc_i[n_arcs] = i
                arc_j[n_arcs] = 0
                arc_f[n_arcs] = rem_a[i]
                n_arcs += 1
    return arc_i[:n_arcs], arc_j[:n_arcs], arc_f[:n_arcs]


@njit(cache=True)
def _solve_kernel(a, b, use_matrix, cost, xs, xt, eps, max_pivots):
    ns = a.shape[0]
    nt = b.shape[0]
    n = ns + nt
    m = np.int64(ns) * np.int64(nt)

    arc_i, arc_j, arc_f = _greedy_basis(a, b, use_matrix, cost, xs, xt)
    n_arcs = arc_i.shape[0]

    # complete the forest into a spanning tree with zero-flow arcs
    uf = np.arange(n)
    for k in range(n_arcs):
        ru = _uf_find(uf, arc_i[k])
        rw = _uf_find(uf, ns + arc_j[k])
        if ru != rw:
            uf[ru] = rw
    root0 = _uf_find(uf, 0)
    j_root = -1
    for j in range(nt):
        if _uf_find(uf, ns + j) == root0:
            j_root = j
            break
    extra_i = np.empty(n, np.int64)
    extra_j = np.empty(n, np.int64)
    n_extra = 0
    for v in range(n):
        rv = _uf_find(uf, v)
        r0 = _uf_find(uf, 0)
        if rv != r0:
            if v < ns:
                extra_i[n_extra] = v
                extra_j[n_extra] = j_root
            else:
                extra_i[n_extra] = 0
                extra_j[n_extra] = v - ns
            n_extra += 1
            uf[rv] = r0
    total_arcs = n_arcs + n_extra

    # CSR adjacency over tree arcs
    deg = np.zeros(n + 1, np.int64)
    for k in range(n_arcs):
        deg[arc_i[k] + 1] += 1
        deg[ns + arc_j[k] + 1] += 1
    for k in range(n_extra):
        deg[extra_i[k] + 1] += 1
        deg[ns + extra_j[k] + 1] += 1
    for v in range(n):
        deg[v + 1] += deg[v]
    adj_node = np.empty(2 * total_arcs, np.int64)
    adj_flow = np.empty(2 * total_arcs, np.float64)
    fill = deg[:n].copy()
    for k in range(n_arcs):
        u = arc_i[k]
        w = ns + arc_j[k]
        adj_node[fill[u]] = w
        adj_flow[fill[u]] = arc_f[k]
        fill[u] += 1
        adj_node[fill[w]] = u
        adj_flow[fill[w]] = arc_f[k]
        fill[w] += 1
    for k in range(n_extra):
        u = extra_i[k]
        w = ns + extra_j[k]
        adj_node[fill[u]] = w
        adj_flow[fill[u]] = 0.0
        fill[u] += 1
        adj_node[fill[w]] = u
        adj_flow[fill[w]] = 0.0
        fill[w] += 1

    parent = np.full(n, -1, np.int64)
    flow = np.zeros(n, np.float64)
    basis_cost = np.zeros(n, np.float64)  # cost of the arc (v, parent[v])
    depth = np.zeros(n, np.int64)
    pot = np.zeros(n, np.float64)
    cpot = np.ones(n, np.float64)   # cos of potential
    spot = np.zeros(n, np.float64)  # sin of potential
    big_pot = np.zeros(n, np.uint8)  # |pot| near pi: identity screen unsafe
    child = np.full(n, -1, np.int64)
    next_sib = np.full(n, -1, np.int64)
    prev_sib = np.full(n, -1, np.int64)
    visited = np.zeros(n, np.uint8)
    stack = np.empty(n, np.int64)

    top = 0
    stack[top] = 0
    top += 1
    visited[0] = 1
    while top > 0:
        top -= 1
        v = stack[top]
        for e in range(deg[v], deg[v + 1]):
            w = adj_node[e]
            if visited[w]:
                continue
            visited[w] = 1
            parent[w] = v
            flow[w] = adj_flow[e]
            depth[w] = depth[v] + 1
            ci = w if w < ns else v
            cj = (v if w < ns else w) - ns
            basis_cost[w] = _arc_cost(ci, cj, use_matrix, cost, xs, xt)
            pot[w] = basis_cost[w] - pot[v]
            cpot[w] = math.cos(pot[w])
            spot[w] = math.sin(pot[w])
            big_pot[w] = 1 if abs(pot[w]) >= 0.99 * math.pi else 0
            _attach(w, v, child, next_sib, prev_sib)
            stack[top] = w
            top += 1

    # pricing: wrap-around block scans refill a candidate list; minor
    # iterations pivot on exactly re-priced candidates
    block = np.int64(math.sqrt(float(m)))
    if block < 128:
        block = np.int64(128)
    if block > 131072:
        block = np.int64(131072)
    if block > m:
        block = m
    max_cand = 1024
    min_fill = 64
    cand = np.empty(max_cand, np.int64)
    n_cand = 0

    pos_i = 0
    pos_j = 0
    pivots = 0
    degen_streak = 0
    bland = False
    status = STATUS_PIVOT_CAP

    while pivots < max_pivots:
        bi = np.int64(-1)
        bj = np.int64(-1)
        if bland:
            done = False
            for i in range(ns):
                for j in range(nt):
                    r = _arc_cost(i, j, use_matrix, cost, xs, xt) - pot[i] - pot[ns + j]
                    if r < -eps:
                        bi = i
                        bj = j
                        done = True
                        break
                if done:
                    break
        else:
            best_r = -eps
            best_k = -1
            w = 0
            for k in range(n_cand):
                idx = cand[k]
                i = idx // nt
                j = idx - i * nt
                r = _arc_cost(i, j, use_matrix, cost, xs, xt) - pot[i] - pot[ns + j]
                if r < -eps:
                    cand[w] = idx
                    if r < best_r:
                        best_r = r
                        best_k = w
                    w += 1
            n_cand = w
            if best_k < 0:
                scanned = np.int64(0)
                i = pos_i
                j = pos_j
                while scanned < m:
                    if use_matrix:
                        r = cost[i, j] - pot[i] - pot[ns + j]
                        if r < -eps and n_cand < max_cand:
                            cand[n_cand] = i * nt + j
                            if r < best_r:
                                best_r = r
                                best_k = n_cand
                            n_cand += 1
                    else:
                        # screen acos(d) < u+v-eps via d > cos(u+v); valid for
                        # u+v in [0, pi], the wrap range (pi, 2pi) is caught by
                        # sin(u+v) < 0, and nodes with |pot| near pi (where
                        # u+v could wrap past 2pi) are always checked exactly
                        d = _dot(i, j, xs, xt)
                        jn = ns + j
                        if big_pot[i] or big_pot[jn]:
                            suspect = True
                        else:
                            uv_cos = cpot[i] * cpot[jn] - spot[i] * spot[jn]
                            uv_sin = spot[i] * cpot[jn] + cpot[i] * spot[jn]
                            suspect = (d > uv_cos - SCREEN_MARGIN) or uv_sin < 0.0
                        if suspect and n_cand < max_cand:
                            r = math.acos(d) - pot[i] - pot[jn]
                            if r < -eps:
                                cand[n_cand] = i * nt + j
                                if r < best_r:
                                    best_r = r
                                    best_k = n_cand
                                n_cand += 1
                    scanned += 1
                    j += 1
                    if j == nt:
                        j = 0
                        i += 1
                        if i == ns:
                            i = 0
                    if scanned % block == 0 and (n_cand >= min_fill
                                                 or n_cand == max_cand):
                        break
                pos_i = i
                pos_j = j
            if best_k >= 0:
                idx = cand[best_k]
                bi = idx // nt
                bj = idx - bi * nt
                n_cand -= 1
                cand[best_k] = cand[n_cand]
        if bi < 0:
            status = STATUS_OPTIMAL
            break

        # --- pivot on entering arc (bi, bj)
        src = bi
        snk = ns + bj
        x = src
        y = snk
        while depth[x] > depth[y]:
            x = parent[x]
        while depth[y] > depth[x]:
            y = parent[y]
        while x != y:
            x = parent[x]
            y = parent[y]
        apex = x

        # leaving arc: strict < on the source side, <= on the sink side, so
        # ties resolve to the blocking arc nearest the apex (strongly
        # feasible discipline, keeps degenerate churn short)
        theta = np.inf
        leave = np.int64(-1)
        on_src_side = True
        v = src
        while v != apex:
            if v < ns and flow[v] < theta:
                theta = flow[v]
                leave = v
                on_src_side = True
            v = parent[v]
        v = snk
        while v != apex:
            if v >= ns and flow[v] <= theta:
                theta = flow[v]
                leave = v
                on_src_side = False
            v = parent[v]

        v = src
        while v != apex:
            if v >= ns:
                flow[v] += theta
            else:
                flow[v] -= theta
            v = parent[v]
        v = snk
        while v != apex:
            if v < ns:
                flow[v] += theta
            else:
                flow[v] -= theta
            v = parent[v]

        p = src if on_src_side else snk
        q = snk if on_src_side else src
        prev = q
        cur = p
        carry = theta
        carry_c = _arc_cost(bi, bj, use_matrix, cost, xs, xt)
        while True:
            nxt = parent[cur]
            oldf = flow[cur]
            oldc = basis_cost[cur]
            _detach(cur, nxt, child, next_sib, prev_sib)
            _attach(cur, prev, child, next_sib, prev_sib)
            parent[cur] = prev
            flow[cur] = carry
            basis_cost[cur] = carry_c
            carry = oldf
            carry_c = oldc
            if cur == leave:
                break
            prev = cur
            cur = nxt

        # refresh depth and potentials inside the re-rooted subtree
        top = 0
        stack[top] = p
        top += 1
        while top > 0:
            top -= 1
            v = stack[top]
            pv = parent[v]
            depth[v] = depth[pv] + 1
            pot[v] = basis_cost[v] - pot[pv]
            cpot[v] = math.cos(pot[v])
            spot[v] = math.sin(pot[v])
            big_pot[v] = 1 if abs(pot[v]) >= 0.99 * math.pi else 0
            w = child[v]
            while w >= 0:
                stack[top] = w
                top += 1
                w = next_sib[w]

        pivots += 1
        if theta == 0.0:
            degen_streak += 1
            if degen_streak > 10 * n:
                bland = True
        else:
            degen_streak = 0
            bland = False

    out_i = np.empty(n, np.int64)
    out_j = np.empty(n, np.int64)
    out_f = np.empty(n, np.float64)
    cnt = 0
    for v in range(n):
        if parent[v] >= 0 and flow[v] > 0.0:
            pv = parent[v]
            out_i[cnt] = v if v < ns else pv
            out_j[cnt] = (pv if v < ns else v) - ns
            out_f[cnt] = flow[v]
            cnt += 1
    return (status, np.int64(pivots), out_i[:cnt], out_j[:cnt], out_f[:cnt],
            pot[:ns].copy(), pot[ns:].copy())


@dataclass(frozen=True)
class TransportSolution:
    src: np.ndarray
    dst: np.ndarray
    mass: np.ndarray
    potential_src: np.ndarray
    potential_dst: np.ndarray
    objective: float
    pivots: int


def solve_transportation(supply, demand, cost_matrix=None,
                         source_points=None, target_points=None, *,
                         eps: float = REDUCED_COST_EPS,
                         max_pivots: int = DEFAULT_MAX_PIVOTS) -> TransportSolution:
    """Solve min sum_ij c_ij x_ij with prescribed positive marginals.

    Either ``cost_matrix`` or both unit-vector arrays must be given; in the
    latter case costs are great-circle distances evaluated on demand.
    """
    a = np.ascontiguousarray(supply, dtype=np.float64)
    b = np.ascontiguousarray(demand, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1 or a.size == 0 or b.size == 0:
        raise ValidationError("marginals must be nonempty 1-d arrays")
    if np.any(a <= 0.0) or np.any(b <= 0.0):
        raise ValidationError("marginals must be strictly positive")
    sa = math.fsum(a)
    sb = math.fsum(b)
    if abs(sa - sb) > 1e-9 * max(1.0, sa):
        raise SolverError(f"infeasible: total masses differ by {abs(sa - sb):.3e}")
    b = b * (sa / sb)
    b[np.argmax(b)] += sa - math.fsum(b)

    if cost_matrix is not None:
        cost = np.ascontiguousarray(cost_matrix, dtype=np.float64)
        if cost.shape != (a.size, b.size):
            raise ValidationError("cost matrix shape mismatch")
        use_matrix = True
        xs = np.zeros((1, 3))
        xt = np.zeros((1, 3))
    else:
        if source_points is None or target_points is None:
            raise ValidationError("need a cost matrix or point coordinates")
        xs = np.ascontiguousarray(source_points, dtype=np.float64)
        xt = np.ascontiguousarray(target_points, dtype=np.float64)
        if xs.shape != (a.size, 3) or xt.shape != (b.size, 3):
            raise ValidationError("point arrays must be (n, 3) unit vectors")
        use_matrix = False
        cost = np.zeros((1, 1))

    status, pivots, src, dst, mass, u, v = _solve_kernel(
        a, b, use_matrix, cost, xs, xt, float(eps), int(max_pivots))
    if status == STATUS_PIVOT_CAP:
        raise SolverError(f"network simplex exceeded {max_pivots} pivots")
    if use_matrix:
        arc_costs = cost[src, dst]
    else:
        dots = np.clip(np.einsum("kd,kd->k", xs[src], xt[dst]), -1.0, 1.0)
        arc_costs = np.arccos(dots)
    objective = math.fsum(mass * arc_costs)
    return TransportSolution(src, dst, mass, u, v, objective, int(pivots))
