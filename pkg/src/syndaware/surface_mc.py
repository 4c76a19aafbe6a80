"""Complementary-gap experiment on rotated surface codes under bit-flip noise.

X errors are decoded from the Z-type checks alone.  Each qubit is an edge
of the matching graph between the (one or two) Z checks it touches; qubits
touching a single check connect to one merged boundary node.  An edge
carries parity 1 when its qubit lies in column 0, i.e. when an X there
anticommutes with logical Z.

For every syndrome the decoder finds the exact minimum correction weight in
each logical class.  Pairings are optimised by dynamic programming over
defect subsets, which gives the same minima as exhaustive enumeration of
pairings.  The complementary gap is the weight difference between the two
classes.
"""

from __future__ import annotations

from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .codes import StabilizerCode, rotated_surface
from .fisher import f_deficit, f_inv_deficit, f_max
from .haar import default_threads

DEFECT_CAP = 12
SHARD_SHOTS = 1 << 16
INF = 1 << 30


@dataclass
class MatchingGraph:
    """Z-check matching graph with parity-resolved shortest paths.

    ``dist[u, v, b]`` is the minimum number of qubits on a path from node
    ``u`` to node ``v`` whose column-0 count has parity ``b``.  Node
    ``num_checks`` is the boundary, which paths may end on but not cross.
    ``logical_weight`` is the lightest odd-parity boundary-to-boundary path.
    """

    code: StabilizerCode
    checks: np.ndarray
    parity_mask: np.ndarray
    dist: np.ndarray
    logical_weight: int

    @property
    def num_checks(self) -> int:
        return len(self.checks)

    @property
    def boundary(self) -> int:
        return self.num_checks


def _bfs(adj, start: int, boundary: int, leave_boundary: bool) -> np.ndarray:
    nn = len(adj)
    dist = np.full((nn, 2), INF, dtype=np.int64)
    dist[start, 0] = 0
    queue = deque([(start, 0)])
    while queue:
        u, b = queue.popleft()
        if u == boundary and not (leave_boundary and u == start and b == 0 and dist[u, b] == 0):
            continue
        for v, par in adj[u]:
            nb = b ^ par
            if dist[v, nb] > dist[u, b] + 1:
                dist[v, nb] = dist[u, b] + 1
                queue.append((v, nb))
    return dist


@lru_cache(maxsize=None)
def matching_graph(d: int) -> MatchingGraph:
    code = rotated_surface(d)
    n = code.n
    checks = np.array([code.generators[a].z_bits for a in code.z_type_generators()], dtype=np.uint8)
    m = len(checks)
    parity = np.array([(code.logical_z[0].z >> q) & 1 for q in range(n)], dtype=np.uint8)
    adj = [[] for _ in range(m + 1)]
    for q in range(n):
        touched = list(np.nonzero(checks[:, q])[0])
        if len(touched) == 1:
            touched.append(m)
        if len(touched) != 2:
            raise ValueError(f"qubit {q} touches {len(touched)} Z checks")
        a, b = touched
        adj[a].append((b, int(parity[q])))
        adj[b].append((a, int(parity[q])))
    dist = np.stack([_bfs(adj, u, m, False) for u in range(m + 1)])
    logical = int(_bfs(adj, m, m, True)[m, 1])
    return MatchingGraph(code, checks, parity, dist, logical)


def _min_weights(graph: MatchingGraph, defects: tuple[int, ...]) -> tuple[int, int]:
    """Minimum correction weight with parity 0 and 1 for the given defects."""
    dist = graph.dist
    B = graph.boundary
    D = len(defects)
    full = (1 << D) - 1
    best = np.full((1 << D, 2), INF, dtype=np.int64)
    best[0, 0] = 0
    for mask in range(1, full + 1):
        a = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << a)
        u = defects[a]
        for b in range(2):
            cand = INF
            for p in range(2):
                prev = best[rest, b ^ p]
                if prev < INF and dist[u, B, p] < INF:
                    cand = min(cand, prev + dist[u, B, p])
            r = rest
            while r:
                c = (r & -r).bit_length() - 1
                r &= r - 1
                sub = rest & ~(1 << c)
                v = defects[c]
                for p in range(2):
                    prev = best[sub, b ^ p]
                    if prev < INF and dist[u, v, p] < INF:
                        cand = min(cand, prev + dist[u, v, p])
            best[mask, b] = cand
    w0, w1 = int(best[full, 0]), int(best[full, 1])
    L = graph.logical_weight
    return min(w0, w1 + L), min(w1, w0 + L)


@dataclass(frozen=True)
class DecodeResult:
    logical_class: int
    gap: int
    weights: tuple[int, int]
    overflow: bool = False


def mwpm_decode(graph: MatchingGraph, syndrome: int, cap: int = DEFECT_CAP) -> DecodeResult:
    """Exact minimum-weight decoding of a Z-check syndrome (bit ``a`` = check ``a``)."""
    defects = tuple(a for a in range(graph.num_checks) if (syndrome >> a) & 1)
    if len(defects) > cap:
        return DecodeResult(0, 0, (INF, INF), True)
    w = _min_weights(graph, defects)
    c = 0 if w[0] <= w[1] else 1
    return DecodeResult(c, w[1 - c] - w[c], w)


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass
class GapGroup:
    gap: int
    shots: int
    failures: int

    @property
    def eps(self) -> float:
        return self.failures / self.shots if self.shots else 0.0


@dataclass
class GapExperiment:
    d: int
    eta: float
    shots: int
    seed: int
    theta: float
    groups: list[GapGroup]
    overflow: int = 0
    merged: list[int] = field(default_factory=list)

    def _cells(self) -> np.ndarray:
        return np.array([[g.shots - g.failures, g.failures] for g in self.groups], dtype=float)

    @staticmethod
    def _stats(cells: np.ndarray, theta: float) -> tuple[float, float]:
        tot = cells.sum()
        p = cells.sum(axis=1) / tot
        eps_g = np.where(cells.sum(axis=1) > 0, cells[:, 1] / np.maximum(cells.sum(axis=1), 1e-300), 0.0)
        eps = float(np.dot(p, eps_g))
        deficit = float(np.dot(p, f_deficit(theta, eps_g)))
        return eps, f_inv_deficit(theta, min(deficit, f_max(theta)))

    @property
    def eps(self) -> float:
        return self._stats(self._cells(), self.theta)[0]

    @property
    def eps_csynd(self) -> float:
        return self._stats(self._cells(), self.theta)[1]

    @property
    def ratio(self) -> float:
        e, c = self._stats(self._cells(), self.theta)
        return c / e if e > 0 else float("nan")

    def ratio_se(self) -> float:
        """Delta-method standard error of the ratio under multinomial sampling."""
        cells = self._cells()
        N = cells.sum()
        pi = (cells / N).ravel()
        base = self.ratio
        grad = np.zeros_like(pi)
        for j in range(len(pi)):
            h = max(1e-7, 1e-4 * pi[j])
            q = pi.copy()
            q[j] += h
            e, c = self._stats(q.reshape(cells.shape), self.theta)
            grad[j] = (c / e - base) / h
        var = (np.dot(pi, grad**2) - np.dot(pi, grad) ** 2) / N
        return float(np.sqrt(max(var, 0.0)))

    def eps_se(self) -> float:
        e = self.eps
        return float(np.sqrt(e * (1 - e) / self.shots))

    def rows(self) -> list[dict]:
        out = []
        for g in self.groups:
            p_hat = g.shots / self.shots
            se = np.sqrt(g.eps * (1 - g.eps) / g.shots) if g.shots else float("nan")
            out.append({"d": self.d, "eta": self.eta, "gap": g.gap, "p_hat": p_hat, "eps_hat": g.eps, "se": float(se)})
        return out

    def summary(self) -> dict:
        return {"d": self.d, "eta": self.eta, "shots": self.shots, "seed": self.seed, "eps": self.eps,
                "eps_csynd": self.eps_csynd, "ratio": self.ratio, "ratio_se": self.ratio_se(),
                "overflow": self.overflow, "merged": ",".join(map(str, self.merged))}


def _shard(graph: MatchingGraph, q: float, shots: int, rng: np.random.Generator, cache: dict) -> dict:
    n = graph.code.n
    err = (rng.random((shots, n)) < q).astype(np.uint8)
    synd_bits = (err @ graph.checks.T.astype(np.int64)) & 1
    weights = 1 << np.arange(graph.num_checks, dtype=np.int64)
    synd = synd_bits @ weights
    truth = (err @ graph.parity_mask.astype(np.int64)) & 1
    hist: dict = {}
    uniq, inv = np.unique(synd, return_inverse=True)
    for u_idx, s in enumerate(uniq):
        s = int(s)
        res = cache.get(s)
        if res is None:
            res = cache[s] = mwpm_decode(graph, s)
        sel = inv.ravel() == u_idx
        cnt = int(sel.sum())
        if res.overflow:
            hist[("overflow",)] = hist.get(("overflow",), 0) + cnt
            continue
        fails = int(np.sum(truth[sel] != res.logical_class))
        tot, fl = hist.get(res.gap, (0, 0))
        hist[res.gap] = (tot + cnt, fl + fails)
    return hist


def run_gap_experiment(
    d: int, eta: float, shots: int, seed: int = 0, theta: float = 0.0,
    min_group_shots: int = 0, threads: int | None = None,
) -> GapExperiment:
    """Sample bit-flip marginals of depolarising noise and group shots by gap.

    Shots are drawn in fixed shards of ``SHARD_SHOTS`` with child seeds of
    ``SeedSequence(seed)``, so the result does not depend on ``threads``.
    Groups with fewer than ``min_group_shots`` shots are merged into the
    neighbouring lower gap (or the next higher one for the lowest gap).
    """
    graph = matching_graph(d)
    q = 2.0 * eta / 3.0
    sizes = [SHARD_SHOTS] * (shots // SHARD_SHOTS)
    if shots % SHARD_SHOTS:
        sizes.append(shots % SHARD_SHOTS)
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    cache: dict = {}
    threads = threads or default_threads()

    def run(args):
        size, ss = args
        return _shard(graph, q, size, np.random.default_rng(ss), cache)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(run, zip(sizes, seqs)))
    else:
        parts = [run(a) for a in zip(sizes, seqs)]
    total: dict = {}
    overflow = 0
    for part in parts:
        for key, val in part.items():
            if key == ("overflow",):
                overflow += val
                continue
            t, f_ = total.get(key, (0, 0))
            total[key] = (t + val[0], f_ + val[1])
    groups = [GapGroup(g, t, fl) for g, (t, fl) in sorted(total.items())]
    merged = []
    j = 0
    while len(groups) > 1 and j < len(groups):
        if groups[j].shots < min_group_shots:
            tgt = j - 1 if j > 0 else j + 1
            groups[tgt] = GapGroup(groups[tgt].gap, groups[tgt].shots + groups[j].shots,
                                   groups[tgt].failures + groups[j].failures)
            merged.append(groups[j].gap)
            del groups[j]
            j = 0
            continue
        j += 1
    return GapExperiment(d, eta, shots - overflow, seed, theta, groups, overflow, merged)


SURFACE_COLUMNS = ["d", "eta", "gap", "p_hat", "eps_hat", "se"]
SUMMARY_COLUMNS = ["d", "eta", "shots", "seed", "eps", "eps_csynd", "ratio", "ratio_se", "overflow", "merged"]
