"""The device community: profiles, links, and incentive-driven formation.

Links are symmetric and carry exactly one shared MAC key, installed when
the link forms and destroyed when it is severed. Link formation is a
utility game: same-type neighbors are worth more than cross-type ones,
accumulated trust adds value, and every link has a maintenance cost.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .adversary import Behavior
from .crypto import KeyStore, pair
from .errors import ConfigurationError, UndefinedHomophilyError
from .trust import Ledger, combined_trust

DEFAULT_MAX_DEGREE = 8
SUPERNODE_DEGREE_MULTIPLIER = 4


@dataclass
class NodeProfile:
    id: int
    node_type: str
    age: int = 0
    key_length_bits: int = 256
    behavior: Behavior = Behavior.HONEST
    max_degree: int = DEFAULT_MAX_DEGREE
    is_hub: bool = False
    base_max_degree: int = field(default=0)

    def __post_init__(self) -> None:
        if self.base_max_degree <= 0:
            self.base_max_degree = self.max_degree


@dataclass
class FormationParams:
    beta_same: float = 1.0          # benefit of a same-type link
    beta_diff: float = 0.2          # benefit of a cross-type link
    link_cost: float = 0.5
    trust_weight: float = 0.0
    join_rate: float = 0.0
    leave_rate: float = 0.0
    proposals_per_round: int = 3
    severance_threshold: float = 0.2
    max_degree: int = DEFAULT_MAX_DEGREE
    joiner_key_bits: int = 256
    supernode_count: int = 0
    supernode_multiplier: int = SUPERNODE_DEGREE_MULTIPLIER


class CommunityGraph:
    """Undirected community graph with one pairwise key per edge."""

    def __init__(self) -> None:
        self.nodes: dict[int, NodeProfile] = {}
        self.keystores: dict[int, KeyStore] = {}
        self._adj: dict[int, set[int]] = {}
        self._next_id = 0

    # -- nodes ---------------------------------------------------------

    def add_node(self, profile: NodeProfile) -> NodeProfile:
        if profile.id in self.nodes:
            raise ConfigurationError(f"node {profile.id} already exists")
        self.nodes[profile.id] = profile
        self.keystores[profile.id] = KeyStore()
        self._adj[profile.id] = set()
        self._next_id = max(self._next_id, profile.id + 1)
        return profile

    def allocate_id(self) -> int:
        nid = self._next_id
        self._next_id += 1
        return nid

    def remove_node(self, node: int) -> None:
        for neighbor in sorted(self._adj[node]):
            self.keystores[neighbor].remove(node)
            self._adj[neighbor].discard(node)
        del self._adj[node]
        del self.keystores[node]
        del self.nodes[node]

    def node_ids(self) -> list[int]:
        return sorted(self.nodes)

    def __len__(self) -> int:
        return len(self.nodes)

    # -- edges ---------------------------------------------------------

    def has_edge(self, a: int, b: int) -> bool:
        return b in self._adj.get(a, ())

    def add_edge(self, a: int, b: int, rng: random.Random) -> None:
        """Link two nodes and install their shared key."""
        if a == b:
            raise ConfigurationError("self-links are not allowed")
        if self.has_edge(a, b):
            raise ConfigurationError(f"link {a}-{b} already exists")
        pa, pb = self.nodes[a], self.nodes[b]
        if self.degree(a) >= pa.max_degree or self.degree(b) >= pb.max_degree:
            raise ConfigurationError(f"link {a}-{b} would exceed a degree cap")
        # The shared key can only be as strong as the weaker device allows.
        bits = min(pa.key_length_bits, pb.key_length_bits)
        pair(a, b, self.keystores[a], self.keystores[b], rng, length_bits=bits)
        self._adj[a].add(b)
        self._adj[b].add(a)

    def remove_edge(self, a: int, b: int) -> None:
        self._adj[a].discard(b)
        self._adj[b].discard(a)
        self.keystores[a].remove(b)
        self.keystores[b].remove(a)

    def neighbors(self, node: int) -> list[int]:
        return sorted(self._adj[node])

    def degree(self, node: int) -> int:
        return len(self._adj[node])

    def edges(self) -> list[tuple[int, int]]:
        return sorted((min(a, b), max(a, b))
                      for a in self._adj for b in self._adj[a] if a < b)

    def edge_count(self) -> int:
        return sum(len(s) for s in self._adj.values()) // 2

    def reachable_from(self, start: int, hop_limit: int | None = None) -> list[int]:
        """Nodes reachable from ``start`` (excluded) within the hop limit."""
        seen = {start}
        frontier = [start]
        hops = 0
        out: list[int] = []
        while frontier and (hop_limit is None or hops < hop_limit):
            hops += 1
            nxt: list[int] = []
            for node in frontier:
                for nb in sorted(self._adj[node]):
                    if nb not in seen:
                        seen.add(nb)
                        out.append(nb)
                        nxt.append(nb)
            frontier = nxt
        return sorted(out)

    def edge_list_text(self) -> str:
        """One "id,id,type,type" line per edge, smaller id first."""
        lines = []
        for a, b in self.edges():
            lines.append(f"{a},{b},{self.nodes[a].node_type},{self.nodes[b].node_type}")
        return "\n".join(lines)


# -- formation game ------------------------------------------------------


def marginal_utility(i: NodeProfile, j: NodeProfile, params: FormationParams,
                     ledger: Ledger | None = None) -> float:
    """Value to ``i`` of linking with ``j``: type benefit, plus weighted
    trust, minus the link cost. Strangers read as 0.5 trust."""
    benefit = params.beta_same if i.node_type == j.node_type else params.beta_diff
    tau = combined_trust(ledger, j.id) if ledger is not None else 0.5
    return benefit + params.trust_weight * tau - params.link_cost


def propose_and_approve(graph: CommunityGraph, params: FormationParams,
                        ledgers: dict[int, Ledger], rng: random.Random) -> list[tuple[int, int]]:
    """One formation round. Each node, in seeded random order, offers links
    to its best few strangers; a link forms only if both sides gain and
    neither is at its degree cap. Returns the edges formed."""
    order = graph.node_ids()
    rng.shuffle(order)
    formed: list[tuple[int, int]] = []
    for proposer_id in order:
        proposer = graph.nodes[proposer_id]
        candidates = []
        for other_id in graph.node_ids():
            if other_id == proposer_id or graph.has_edge(proposer_id, other_id):
                continue
            util = marginal_utility(proposer, graph.nodes[other_id], params,
                                    ledgers.get(proposer_id))
            if util > 0.0:
                candidates.append((util, other_id))
        candidates.sort(key=lambda c: (-c[0], c[1]))
        for _, target_id in candidates[:params.proposals_per_round]:
            if graph.degree(proposer_id) >= proposer.max_degree:
                break
            target = graph.nodes[target_id]
            if graph.degree(target_id) >= target.max_degree:
                continue
            back = marginal_utility(target, proposer, params, ledgers.get(target_id))
            if back > 0.0:
                graph.add_edge(proposer_id, target_id, rng)
                formed.append((min(proposer_id, target_id), max(proposer_id, target_id)))
    return formed


@dataclass
class ChurnSummary:
    joined: list[int]
    left: list[int]
    severed: list[tuple[int, int]]


def churn(graph: CommunityGraph, params: FormationParams, rng: random.Random,
          ledgers: dict[int, Ledger] | None = None,
          type_distribution: dict[str, float] | None = None) -> ChurnSummary:
    """Apply one epoch of membership turnover.

    Each node leaves with ``leave_rate``; with ``join_rate`` one new node
    of seeded random type joins. Existing links whose accumulated trust
    fell below the severance threshold are cut (key destroyed with them).
    """
    left = [n for n in graph.node_ids() if rng.random() < params.leave_rate]
    for node in left:
        graph.remove_node(node)

    joined: list[int] = []
    if rng.random() < params.join_rate:
        types = sorted(type_distribution) if type_distribution else ["default"]
        weights = [type_distribution[t] for t in types] if type_distribution else [1.0]
        node_type = rng.choices(types, weights=weights, k=1)[0]
        nid = graph.allocate_id()
        graph.add_node(NodeProfile(id=nid, node_type=node_type,
                                   key_length_bits=params.joiner_key_bits,
                                   max_degree=params.max_degree))
        joined.append(nid)

    severed: list[tuple[int, int]] = []
    if ledgers is not None:
        for a, b in graph.edges():
            la, lb = ledgers.get(a), ledgers.get(b)
            cut = ((la is not None and combined_trust(la, b) < params.severance_threshold)
                   or (lb is not None and combined_trust(lb, a) < params.severance_threshold))
            if cut:
                graph.remove_edge(a, b)
                severed.append((a, b))
    return ChurnSummary(joined=joined, left=left, severed=severed)


def homophily_index(graph: CommunityGraph) -> float:
    """Same-type edge fraction minus its expectation under random mixing.

    Positive values mean devices cluster with their own kind more than
    chance would produce. Undefined without edges.
    """
    edges = graph.edges()
    if not edges:
        raise UndefinedHomophilyError("mixing index needs at least one edge")
    same = sum(1 for a, b in edges
               if graph.nodes[a].node_type == graph.nodes[b].node_type)
    observed = same / len(edges)
    counts: dict[str, int] = {}
    for profile in graph.nodes.values():
        counts[profile.node_type] = counts.get(profile.node_type, 0) + 1
    n = len(graph.nodes)
    total_pairs = math.comb(n, 2)
    expected = sum(math.comb(c, 2) for c in counts.values()) / total_pairs
    return observed - expected


def designate_supernodes(graph: CommunityGraph, count: int,
                         multiplier: int = SUPERNODE_DEGREE_MULTIPLIER) -> list[int]:
    """Mark the ``count`` highest-degree nodes as hubs with a raised cap.

    Ties go to the smaller id. Previously designated hubs that fall out of
    the top set revert to their base cap.
    """
    if count < 0:
        raise ConfigurationError("supernode count cannot be negative")
    ranked = sorted(graph.node_ids(), key=lambda n: (-graph.degree(n), n))
    chosen = ranked[:count]
    chosen_set = set(chosen)
    for nid in graph.node_ids():
        profile = graph.nodes[nid]
        if nid in chosen_set:
            profile.is_hub = True
            profile.max_degree = profile.base_max_degree * multiplier
        elif profile.is_hub:
            profile.is_hub = False
            profile.max_degree = max(profile.base_max_degree, graph.degree(nid))
    return chosen
