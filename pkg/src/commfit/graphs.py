"""Graph representation, file ingestion, and synthetic generators.

Graphs are undirected, unweighted and simple: a node count plus a set of
unordered pairs (i, j) with 0 <= i < j < n. File formats follow the common
edge-list convention (one "u v" pair per line, '#' comments) and the
one-community-per-line label convention.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Graph",
    "CommunityLabels",
    "RecruiterParams",
    "RecruiterSample",
    "load_edge_list",
    "save_edge_list",
    "load_communities",
    "save_communities",
    "load_dataset",
    "adjacency_dense",
    "max_degree",
    "generate_recruiter_graph",
    "sample_recruiter",
    "generate_threshold_graph",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph: node count and canonical edge set.

    Every edge is stored once as (i, j) with i < j; self-loops are not
    representable.
    """

    n: int
    edges: frozenset

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("graph needs at least one node")
        object.__setattr__(self, "edges", frozenset(self.edges))
        for i, j in self.edges:
            if not (0 <= i < j < self.n):
                raise ValueError(f"invalid edge ({i}, {j}) for n={self.n}")

    def sorted_edges(self):
        """Edges in lexicographic order, the canonical on-disk order."""
        return sorted(self.edges)

    @property
    def num_edges(self):
        return len(self.edges)


@dataclass(frozen=True)
class CommunityLabels:
    """Ground-truth (or detected) communities as sets of node ids."""

    k_truth: int
    members: tuple

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(frozenset(m) for m in self.members))
        if self.k_truth != len(self.members):
            raise ValueError("k_truth must equal the number of communities")
        if any(len(m) == 0 for m in self.members):
            raise ValueError("communities must be non-empty")


def _iter_lines(source):
    """Accept raw text or a file-like object; yield its lines."""
    if isinstance(source, str):
        return source.splitlines()
    if hasattr(source, "read"):
        return source.read().splitlines()
    raise TypeError("expected a string or a file-like object")


def _canonical_pairs(raw_pairs):
    """Sort each pair, drop self-loops, deduplicate. Returns (pairs, dropped)."""
    seen = set()
    dropped = 0
    for u, v in raw_pairs:
        if u == v:
            dropped += 1
            continue
        pair = (u, v) if u < v else (v, u)
        if pair in seen:
            dropped += 1
        else:
            seen.add(pair)
    return seen, dropped


def _parse_pairs(source):
    """Parse "u v" lines into raw integer pairs, tracking line numbers."""
    pairs = []
    saw_content = False
    for lineno, line in enumerate(_iter_lines(source), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        saw_content = True
        if stripped.startswith("#"):
            continue
        tokens = stripped.split()
        if len(tokens) != 2:
            raise ValueError(f"line {lineno}: expected two node ids, got {stripped!r}")
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer node id in {stripped!r}") from None
        if u < 0 or v < 0:
            raise ValueError(f"line {lineno}: negative node id in {stripped!r}")
        pairs.append((u, v))
    return pairs, saw_content


def load_edge_list(source, n=None):
    """Parse an edge list into a Graph.

    Duplicate edges, reversed duplicates, and self-loops are dropped
    silently. Node ids are used as-is; n defaults to 1 + the largest id
    seen and can be overridden (e.g. for trailing isolated nodes).

    Args:
        source: the text itself or a file-like object.
        n: optional node-count override; all ids must be < n.

    Raises:
        ValueError: malformed line (with its line number), empty input, or
            an id out of range for the given n.
    """
    pairs, saw_content = _parse_pairs(source)
    if not saw_content:
        raise ValueError("empty input: no edges or comments found")
    if not pairs and n is None:
        raise ValueError("no edges found and no node count given")
    edges, dropped = _canonical_pairs(pairs)
    max_id = max((j for _, j in edges), default=-1)
    if n is None:
        n = max_id + 1
    elif max_id >= n:
        raise ValueError(f"node id {max_id} out of range for n={n}")
    logger.info("loaded %d nodes, %d edges (%d duplicate/self-loop lines dropped)",
                n, len(edges), dropped)
    return Graph(n=n, edges=frozenset(edges))


def save_edge_list(g, target):
    """Write the canonical edge list: header comment, then sorted "u v" lines.

    Args:
        g: the graph.
        target: a file-like object opened for text writing.
    """
    target.write(f"# undirected edge list: n={g.n} m={g.num_edges}\n")
    for i, j in g.sorted_edges():
        target.write(f"{i} {j}\n")


def load_communities(source):
    """Parse one-community-per-line labels (ids deduplicated within a line).

    Raises:
        ValueError: non-integer token (with line number) or no non-empty lines.
    """
    members = []
    for lineno, line in enumerate(_iter_lines(source), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            ids = frozenset(int(tok) for tok in stripped.split())
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer node id") from None
        if any(i < 0 for i in ids):
            raise ValueError(f"line {lineno}: negative node id")
        members.append(ids)
    if not members:
        raise ValueError("no communities found")
    return CommunityLabels(k_truth=len(members), members=tuple(members))


def save_communities(labels, target):
    """Write one community per line, member ids sorted."""
    for community in labels.members:
        target.write(" ".join(str(i) for i in sorted(community)) + "\n")


def load_dataset(edge_source, community_source=None, top_communities=None):
    """Load a real-world dataset, remapping arbitrary node ids to [0, n).

    Real edge lists use sparse, non-contiguous ids; this loader relabels
    them contiguously (sorted raw-id order) and returns the id map. With
    ``top_communities=c`` the dataset is restricted to nodes participating
    in at least one of the c largest communities (ties broken by file
    order); edges with an endpoint outside that set are dropped.

    Args:
        edge_source: text or file-like edge list.
        community_source: optional text or file-like label file.
        top_communities: optional community-count filter (requires labels).

    Returns:
        (graph, labels_or_None, id_map) with id_map from raw id to new id.
    """
    pairs, saw_content = _parse_pairs(edge_source)
    if not saw_content:
        raise ValueError("empty input: no edges or comments found")
    edges, _ = _canonical_pairs(pairs)
    labels = None
    if community_source is not None:
        labels = load_communities(community_source)
    if top_communities is not None:
        if labels is None:
            raise ValueError("top_communities filtering requires a label file")
        ranked = sorted(range(labels.k_truth), key=lambda i: (-len(labels.members[i]), i))
        kept = [labels.members[i] for i in ranked[:top_communities]]
        universe = set().union(*kept) if kept else set()
        edges = {(u, v) for u, v in edges if u in universe and v in universe}
        communities = kept
    else:
        universe = {u for e in edges for u in e}
        communities = list(labels.members) if labels is not None else None
        if communities:
            universe |= set().union(*communities)
    if not universe:
        raise ValueError("dataset has no nodes after filtering")
    id_map = {raw: new for new, raw in enumerate(sorted(universe))}
    graph = Graph(
        n=len(universe),
        edges=frozenset(tuple(sorted((id_map[u], id_map[v]))) for u, v in edges),
    )
    out_labels = None
    if communities is not None:
        remapped = [frozenset(id_map[i] for i in comm if i in id_map) for comm in communities]
        remapped = [m for m in remapped if m]
        if not remapped:
            raise ValueError("no communities left after filtering")
        out_labels = CommunityLabels(k_truth=len(remapped), members=tuple(remapped))
    return graph, out_labels, id_map


def adjacency_dense(g):
    """Dense symmetric 0/1 adjacency matrix with zero diagonal."""
    a = np.zeros((g.n, g.n))
    if g.edges:
        idx = np.array(g.sorted_edges())
        a[idx[:, 0], idx[:, 1]] = 1.0
        a[idx[:, 1], idx[:, 0]] = 1.0
    return a


def max_degree(g):
    """Maximum node degree; 0 for an edgeless graph."""
    if not g.edges:
        return 0
    endpoints = np.array(g.sorted_edges()).ravel()
    return int(np.bincount(endpoints, minlength=g.n).max())


@dataclass
class RecruiterParams:
    """Parameters of the recruiters-and-locations synthetic graph.

    Nodes get a uniform location and a Bernoulli(recruiter_frac) role.
    Same-location cross-role pairs link with the (high) heterophilous
    probability; same-location same-role pairs with a low one; pairs in
    different locations with the lowest.
    """

    n: int = 1000
    n_locations: int = 10
    p_hetero_same_loc: float = 0.8
    p_homo_same_loc: float = 0.05
    p_diff_loc: float = 0.01
    recruiter_frac: float = 0.5
    seed: int = 0

    def validate(self):
        if self.n < 2:
            raise ValueError("need at least two nodes")
        if self.n_locations < 1:
            raise ValueError("need at least one location")
        for name in ("p_hetero_same_loc", "p_homo_same_loc", "p_diff_loc", "recruiter_frac"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} is not a probability")


@dataclass
class RecruiterSample:
    """A drawn recruiter graph plus everything needed to evaluate against it.

    The ground-truth labels are 2L overlapping communities: per location,
    the full location group and its recruiters subgroup. (The disjoint
    (location, role) cells are recoverable as set differences.)
    """

    graph: Graph
    expected: np.ndarray = field(repr=False)
    labels: CommunityLabels
    locations: np.ndarray = field(repr=False)
    roles: np.ndarray = field(repr=False)  # True marks a recruiter


def sample_recruiter(params):
    """Draw a recruiter graph; deterministic given params.seed.

    Returns:
        RecruiterSample. The expected matrix contains the pairwise link
        probabilities for all n x n entries (diagonal included, which keeps
        its rank at most 2 * n_locations); the sampled graph draws each
        upper-triangle entry independently.
    """
    params.validate()
    rng = np.random.default_rng(params.seed)
    n = params.n
    locations = rng.integers(0, params.n_locations, size=n)
    roles = rng.random(n) < params.recruiter_frac
    same_loc = locations[:, None] == locations[None, :]
    cross_role = roles[:, None] != roles[None, :]
    expected = np.where(
        same_loc & cross_role,
        params.p_hetero_same_loc,
        np.where(same_loc, params.p_homo_same_loc, params.p_diff_loc),
    ).astype(np.float64)
    iu, ju = np.triu_indices(n, k=1)
    draws = rng.random(iu.size)
    linked = draws < expected[iu, ju]
    edges = frozenset(zip(iu[linked].tolist(), ju[linked].tolist()))
    graph = Graph(n=n, edges=edges)
    members = []
    for loc in range(params.n_locations):
        group = frozenset(np.flatnonzero(locations == loc).tolist())
        if group:
            members.append(group)
    for loc in range(params.n_locations):
        group = frozenset(np.flatnonzero((locations == loc) & roles).tolist())
        if group:
            members.append(group)
    labels = CommunityLabels(k_truth=len(members), members=tuple(members))
    return RecruiterSample(graph=graph, expected=expected, labels=labels,
                           locations=locations, roles=roles)


def generate_recruiter_graph(params):
    """Sampled recruiter graph and its expected adjacency matrix."""
    sample = sample_recruiter(params)
    return sample.graph, sample.expected


def generate_threshold_graph(b, c, t):
    """Graph with an edge (i, j) iff b_i . b_j - c_i . c_j >= t.

    Args:
        b: n x k_b binary membership matrix (homophilous side).
        c: n x k_c binary membership matrix (heterophilous side); may have
            zero columns or be None.
        t: integer threshold.

    Raises:
        ValueError: non-binary entries or row-count mismatch.
    """
    b = np.asarray(b, dtype=np.float64)
    if b.ndim != 2:
        raise ValueError("b must be 2-d")
    n = b.shape[0]
    c = np.zeros((n, 0)) if c is None else np.asarray(c, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] != n:
        raise ValueError(f"row-count mismatch: b has {n} rows, c has {c.shape[0]}")
    for name, mat in (("b", b), ("c", c)):
        if mat.size and not np.all((mat == 0.0) | (mat == 1.0)):
            raise ValueError(f"{name} must be a binary matrix")
    scores = b @ b.T - c @ c.T
    iu, ju = np.triu_indices(n, k=1)
    linked = scores[iu, ju] >= t
    return Graph(n=n, edges=frozenset(zip(iu[linked].tolist(), ju[linked].tolist())))
