"""Undirected labeled networks and the statistics computed on them.

A network is a simple undirected graph over nodes 0..N-1 together with a
binary infection label per node.  Construction validates the edge list;
after that the object is treated as immutable and all statistics are pure
functions, safe to call concurrently on a shared instance.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np


class Network:
    """Simple undirected graph with per-node binary infection status.

    Internally keeps a dense adjacency matrix (O(1) edge lookup), a CSR
    neighbor layout (O(d) neighbor iteration) and the edge list with each
    edge stored once as (u, v), u < v.
    """

    __slots__ = ("n", "infection", "edges", "adj", "nbr_flat", "nbr_off", "degrees")

    def __init__(self, n, edges, infection, _trusted=False):
        self.n = int(n)
        infection = np.asarray(infection, dtype=np.int8)
        if infection.shape != (self.n,):
            raise ValueError(f"infection must have length {self.n}")
        if not np.all((infection == 0) | (infection == 1)):
            raise ValueError("infection values must be 0 or 1")
        self.infection = infection

        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.size:
            lo = np.minimum(edges[:, 0], edges[:, 1])
            hi = np.maximum(edges[:, 0], edges[:, 1])
            edges = np.column_stack([lo, hi])
            order = np.lexsort((edges[:, 1], edges[:, 0]))
            edges = edges[order]
            if not _trusted:
                if edges.min() < 0 or edges.max() >= self.n:
                    raise ValueError("edge endpoint out of range")
                if np.any(lo == hi):
                    raise ValueError("self-loops are not allowed")
                dup = (np.diff(edges[:, 0]) == 0) & (np.diff(edges[:, 1]) == 0)
                if np.any(dup):
                    raise ValueError("duplicate edges are not allowed")
        self.edges = edges

        adj = np.zeros((self.n, self.n), dtype=np.uint8)
        if edges.size:
            adj[edges[:, 0], edges[:, 1]] = 1
            adj[edges[:, 1], edges[:, 0]] = 1
        self.adj = adj

        self.degrees = adj.sum(axis=1).astype(np.int64)
        # CSR layout: neighbors of i are nbr_flat[nbr_off[i]:nbr_off[i+1]], sorted
        self.nbr_off = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(self.degrees, out=self.nbr_off[1:])
        self.nbr_flat = np.empty(int(self.degrees.sum()), dtype=np.int64)
        if edges.size:
            both = np.concatenate([edges, edges[:, ::-1]])
            order = np.lexsort((both[:, 1], both[:, 0]))
            self.nbr_flat[:] = both[order][:, 1]

    # -- basic accessors -------------------------------------------------

    @property
    def edge_count(self):
        return self.edges.shape[0]

    def degree(self, i):
        return int(self.degrees[i])

    def neighbors(self, i):
        """Sorted neighbor ids of node i (read-only view)."""
        return self.nbr_flat[self.nbr_off[i]:self.nbr_off[i + 1]]

    def has_edge(self, u, v):
        return bool(self.adj[u, v])

    def prevalence(self):
        return float(self.infection.mean()) if self.n else 0.0

    def __repr__(self):
        return f"Network(n={self.n}, edges={self.edge_count}, infected={int(self.infection.sum())})"


@dataclass
class ClassTable:
    """Node counts (or estimated counts) indexed by (degree, infection) class.

    ``scale`` is "count" for integer census tables and "estimated" for
    real-valued design-based estimates.
    """

    entries: dict = field(default_factory=dict)
    scale: str = "count"

    def total(self):
        return sum(self.entries.values())

    def get(self, k, l, default=0.0):
        return self.entries.get((int(k), int(l)), default)

    def classes(self):
        return sorted(self.entries.keys())

    def copy(self):
        return ClassTable(dict(self.entries), self.scale)


@dataclass
class NetStats:
    """Edge mixing counts plus the summary ratios derived from them."""

    cross_ties: int
    within1_ties: int
    within0_ties: int
    mean_degree: float
    homophily_R: float  # math.inf when there are no cross-group ties
    activity_w: float


def cross_group_ties(net: Network) -> int:
    """Number of edges whose endpoints differ in infection status."""
    if net.edge_count == 0:
        return 0
    z = net.infection
    return int(np.count_nonzero(z[net.edges[:, 0]] != z[net.edges[:, 1]]))


def node_cross_alters(net: Network, i) -> int:
    """Number of infected neighbors of node i."""
    if i < 0 or i >= net.n:
        raise ValueError(f"node id {i} out of range")
    return int(net.infection[net.neighbors(i)].sum())


def cross_alters_all(net: Network) -> np.ndarray:
    """Vector of infected-neighbor counts, one entry per node."""
    x = np.zeros(net.n, dtype=np.int64)
    if net.edge_count:
        z = net.infection
        u, v = net.edges[:, 0], net.edges[:, 1]
        np.add.at(x, u, z[v])
        np.add.at(x, v, z[u])
    return x


def class_table(net: Network) -> ClassTable:
    """Integer table of node counts by (degree, infection) class.

    Degree-0 nodes are recorded under k=0; the table always sums to N.
    """
    entries = {}
    for k, l in zip(net.degrees.tolist(), net.infection.tolist()):
        key = (int(k), int(l))
        entries[key] = entries.get(key, 0) + 1
    return ClassTable(entries, scale="count")


def mixing_and_ratios(net: Network) -> NetStats:
    """Edge mixing counts, mean degree, homophily ratio and activity ratio.

    The homophily ratio compares the within-infected tie density to the
    cross-group tie density; the activity ratio compares mean degrees of
    the infected and uninfected groups.  Requires both groups nonempty
    and at least two infected nodes; zero cross ties yields an infinite
    homophily ratio rather than an error.
    """
    z = net.infection
    n1 = int(z.sum())
    n0 = net.n - n1
    if n1 < 2 or n0 < 1:
        raise ValueError(f"degenerate group sizes: {n1} infected, {n0} uninfected")
    if net.edge_count:
        zu = z[net.edges[:, 0]].astype(np.int64)
        zv = z[net.edges[:, 1]].astype(np.int64)
        within1 = int(np.count_nonzero(zu + zv == 2))
        within0 = int(np.count_nonzero(zu + zv == 0))
        cross = net.edge_count - within1 - within0
    else:
        within1 = within0 = cross = 0
    dens11 = within1 / (n1 * (n1 - 1) / 2.0)
    dens10 = cross / float(n1 * n0)
    homophily = dens11 / dens10 if cross > 0 else math.inf
    deg = net.degrees
    d1 = float(deg[z == 1].mean())
    d0 = float(deg[z == 0].mean())
    if d0 <= 0:
        raise ValueError("uninfected group has zero mean degree")
    return NetStats(
        cross_ties=cross,
        within1_ties=within1,
        within0_ties=within0,
        mean_degree=float(deg.mean()),
        homophily_R=homophily,
        activity_w=d1 / d0,
    )


def edgewise_shared_partners(net: Network) -> np.ndarray:
    """Counts of edges by number of shared partners.

    Entry k is the number of edges whose endpoints have exactly k common
    neighbors; entries sum to the edge count.
    """
    ep = np.zeros(max(net.n - 1, 1), dtype=np.int64)
    adj = net.adj
    for u, v in net.edges:
        shared = int(np.dot(adj[u], adj[v]))
        ep[shared] += 1
    return ep


def gwesp(net: Network, theta) -> float:
    """Geometrically weighted edgewise shared partner statistic.

    Each edge with i >= 1 shared partners contributes
    e^theta * (1 - (1 - e^-theta)^i); edges with no shared partner
    contribute nothing.  theta >= 0 controls how quickly additional
    shared partners stop adding weight.
    """
    theta = float(theta)
    if theta < 0:
        raise ValueError("theta must be >= 0")
    ep = edgewise_shared_partners(net)
    i = np.arange(1, ep.shape[0])
    weights = 1.0 - (1.0 - math.exp(-theta)) ** i
    return float(math.exp(theta) * np.dot(weights, ep[1:]))


# -- file formats ---------------------------------------------------------

def save_network(net: Network, directory):
    """Write nodes.csv (id, infected) and edges.csv (u, v with u < v)."""
    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, "nodes.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["id", "infected"])
        for i in range(net.n):
            w.writerow([i, int(net.infection[i])])
    with open(os.path.join(directory, "edges.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["u", "v"])
        for u, v in net.edges:
            w.writerow([int(u), int(v)])


def load_network(directory) -> Network:
    """Read the nodes.csv/edges.csv pair written by :func:`save_network`.

    Rejects non-contiguous ids, out-of-range endpoints, self-loops and
    duplicate edges.
    """
    nodes_path = os.path.join(directory, "nodes.csv")
    edges_path = os.path.join(directory, "edges.csv")
    ids, infected = [], []
    with open(nodes_path, newline="") as f:
        r = csv.DictReader(f)
        if r.fieldnames != ["id", "infected"]:
            raise ValueError(f"bad nodes header: {r.fieldnames}")
        for row in r:
            ids.append(int(row["id"]))
            val = int(row["infected"])
            if val not in (0, 1):
                raise ValueError(f"infected must be 0 or 1, got {val}")
            infected.append(val)
    n = len(ids)
    if ids != list(range(n)):
        raise ValueError("node ids must be contiguous and 0-based")
    edges = []
    with open(edges_path, newline="") as f:
        r = csv.DictReader(f)
        if r.fieldnames != ["u", "v"]:
            raise ValueError(f"bad edges header: {r.fieldnames}")
        seen = set()
        for row in r:
            u, v = int(row["u"]), int(row["v"])
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) out of range")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"duplicate edge ({u},{v})")
            seen.add(key)
            edges.append(key)
    return Network(n, np.array(edges, dtype=np.int64).reshape(-1, 2), infected)
