"""Reasoning tasks over narrative graphs.

Five read-only queries: action retrieval, dialogue tracing, character
trajectories, timeline reconstruction, and event summarization. All of
them work on raw and normalized graphs alike; only action retrieval
changes behaviour with the normalization mode.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .builder import entity_node_id
from .embedding import HashedNgramProvider, cosine
from .errors import (
    BrokenChain,
    NotAnEventNode,
    NotNormalized,
    ProviderError,
    UnknownEntity,
    UnknownEvent,
    UnknownNode,
    UnknownScope,
)
from .graph import EdgeKind, NarrativeGraph, Node, NodeKind
from .lexicon import SynonymLexicon, fold_label, lexical_key
from .normalize import ACTION_POOL, NormalizationMap

MODES = ("raw", "normalized")
ORDER_KINDS = ("reading", "storytime")

STORY_SCOPE = "story"

_ORDER_EDGE = {
    "reading": EdgeKind.PRECEDES_READING,
    "storytime": EdgeKind.PRECEDES_STORYTIME,
}


@dataclass(frozen=True)
class ActionHit:
    panel_id: str
    action_instance_id: str
    surface_label: str
    canonical_label: str

    def as_dict(self) -> dict:
        return {
            "panel_id": self.panel_id,
            "action_instance_id": self.action_instance_id,
            "surface_label": self.surface_label,
            "canonical_label": self.canonical_label,
        }


@dataclass(frozen=True)
class DialogueTrace:
    event_id: str
    # each entry: (panel_id, dialogue_id, speaker_entity_id or None, text)
    entries: tuple[tuple[str, str, str | None, str], ...] = field(default_factory=tuple)

    def as_dict(self) -> dict:
        return {
            "event_id": self.event_id,
            "entries": [
                {"panel_id": p, "dialogue_id": d, "speaker": s, "text": t}
                for p, d, s, t in self.entries
            ],
        }


@dataclass(frozen=True)
class Trajectory:
    entity_id: str
    panel_ids: tuple[str, ...]
    event_ids: tuple[str, ...]
    macro_event_ids: tuple[str, ...]

    def as_dict(self) -> dict:
        return {
            "entity_id": self.entity_id,
            "panel_ids": list(self.panel_ids),
            "event_ids": list(self.event_ids),
            "macro_event_ids": list(self.macro_event_ids),
        }


@dataclass(frozen=True)
class Timeline:
    scope_id: str
    order_kind: str
    panel_ids: tuple[str, ...]

    def as_dict(self) -> dict:
        return {
            "scope_id": self.scope_id,
            "order_kind": self.order_kind,
            "panel_ids": list(self.panel_ids),
        }


@dataclass(frozen=True)
class EventSummary:
    node_id: str
    children: tuple[tuple[str, str], ...]

    def as_dict(self) -> dict:
        return {
            "node_id": self.node_id,
            "children": [{"id": cid, "label": label} for cid, label in self.children],
        }


def _reading_key(graph: NarrativeGraph, panel_id: str) -> int:
    return int(graph.node(panel_id).attrs["reading_order"])


def _surface(node: Node) -> str:
    return node.attrs.get("surface_label", node.label())


def _provider_from_id(provider_id: str):
    # the hashed provider is reproducible from its id alone
    prefix = "hashed:fnv1a-trigram:"
    if provider_id.startswith(prefix):
        try:
            return HashedNgramProvider(int(provider_id[len(prefix):]))
        except ValueError:
            return None
    return None


def _resolve_canonical(
    graph: NarrativeGraph,
    query: str,
    norm_map: NormalizationMap | None,
    lexicon: SynonymLexicon | None,
    provider,
) -> str:
    """Canonical form a query label should retrieve under.

    Resolution order: exact map member, fold-equal map member, nearest
    cluster under the map's link relation, then the query itself.
    Without a map the graph's own surface/canonical pairs stand in.
    """
    folded = fold_label(query)
    if norm_map is None:
        canonical_by_fold: dict[str, str] = {}
        surface_by_fold: dict[str, str] = {}
        for node in graph.nodes(NodeKind.ACTION):
            canonical_by_fold.setdefault(fold_label(node.label()), node.label())
            surface_by_fold.setdefault(fold_label(_surface(node)), node.label())
        if folded in canonical_by_fold:
            return canonical_by_fold[folded]
        return surface_by_fold.get(folded, query)

    if norm_map.has_label(query, ACTION_POOL):
        return norm_map.lookup(query, ACTION_POOL)
    for member in sorted(norm_map.pool_labels(ACTION_POOL)):
        if fold_label(member) == folded:
            return norm_map.lookup(member, ACTION_POOL)

    lex = lexicon if lexicon is not None else SynonymLexicon.empty()
    prov = provider if provider is not None else _provider_from_id(norm_map.provider_id)
    query_key = lexical_key(query, lex)
    best_sim, best_canonical = -1.0, None
    for cluster in norm_map.clusters:
        if cluster.pool != ACTION_POOL:
            continue
        for member in cluster.members:
            member_key = lexical_key(member, lex)
            if query_key == member_key or lex.same_group(query_key, member_key):
                sim = 1.0
            elif prov is None:
                continue
            else:
                try:
                    sim = cosine(prov.embed(query), prov.embed(member))
                except ProviderError:
                    continue
                if sim < norm_map.threshold:
                    continue
            better = sim > best_sim or (
                sim == best_sim and cluster.canonical < (best_canonical or "")
            )
            if better:
                best_sim, best_canonical = sim, cluster.canonical
    if best_canonical is not None:
        return best_canonical
    return query


def retrieve_actions(
    graph: NarrativeGraph,
    query_label: str,
    mode: str = "raw",
    *,
    norm_map: NormalizationMap | None = None,
    lexicon: SynonymLexicon | None = None,
    provider=None,
) -> list[ActionHit]:
    """All action instances matching a query label.

    Raw mode matches the stored surface label after case and separator
    folding only. Normalized mode requires a normalized graph and matches
    on canonical labels, resolving the query through the normalization
    map when one is supplied.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    folded = fold_label(query_label)
    if mode == "normalized" and not graph.normalized:
        raise NotNormalized("normalized-mode retrieval requires a normalized graph")

    if mode == "raw":
        matched = [
            node
            for node in graph.nodes(NodeKind.ACTION)
            if fold_label(_surface(node)) == folded
        ]
    else:
        target = _resolve_canonical(graph, query_label, norm_map, lexicon, provider)
        matched = [node for node in graph.nodes(NodeKind.ACTION) if node.label() == target]

    matched.sort(key=lambda n: (_reading_key(graph, n.attrs["panel"]), n.id))
    return [
        ActionHit(node.attrs["panel"], node.id, _surface(node), node.label())
        for node in matched
    ]


def trace_dialogue(graph: NarrativeGraph, event_id: str) -> DialogueTrace:
    """Dialogue spans grounded in an event's panels, with resolved speakers."""
    if not graph.has_node(event_id) or graph.node(event_id).kind is not NodeKind.EVENT:
        raise UnknownEvent(f"unknown event: {event_id}")
    keyed = []
    for panel_id in graph.neighbors(event_id, EdgeKind.INSTANTIATES, "in"):
        for dialogue_id in graph.neighbors(panel_id, EdgeKind.GROUNDED_IN, "in"):
            node = graph.node(dialogue_id)
            if node.kind is not NodeKind.DIALOGUE:
                continue
            speaker = None
            instance = node.attrs.get("speaker")
            if instance:
                targets = graph.neighbors(instance, EdgeKind.REFERS_TO, "out")
                if targets:
                    speaker = graph.node(targets[0]).attrs["entity_id"]
            keyed.append(
                (
                    _reading_key(graph, panel_id),
                    int(node.attrs["order"]),
                    (panel_id, dialogue_id, speaker, node.attrs["text"]),
                )
            )
    keyed.sort(key=lambda item: item[:2])
    return DialogueTrace(event_id, tuple(entry for _, _, entry in keyed))


def character_trajectory(graph: NarrativeGraph, entity_id: str) -> Trajectory:
    """Panels, events, and macro-events where a character entity appears."""
    node_id = entity_node_id(entity_id)
    if not graph.has_node(node_id) or graph.node(node_id).kind is not NodeKind.CHARACTER:
        raise UnknownEntity(f"unknown entity: {entity_id}")
    panel_ids = {
        graph.node(instance).attrs["panel"]
        for instance in graph.neighbors(node_id, EdgeKind.REFERS_TO, "in")
    }
    ordered_panels = sorted(panel_ids, key=lambda p: _reading_key(graph, p))
    event_ids: list[str] = []
    for panel_id in ordered_panels:
        for event_id in graph.neighbors(panel_id, EdgeKind.INSTANTIATES, "out"):
            if event_id not in event_ids:
                event_ids.append(event_id)
    macro_ids: list[str] = []
    for event_id in event_ids:
        for macro_id in graph.neighbors(event_id, EdgeKind.SUBEVENT_OF, "out"):
            if macro_id not in macro_ids:
                macro_ids.append(macro_id)
    return Trajectory(entity_id, tuple(ordered_panels), tuple(event_ids), tuple(macro_ids))


def _scope_panels(graph: NarrativeGraph, scope_id: str) -> list[str]:
    if scope_id == STORY_SCOPE:
        return [node.id for node in graph.nodes(NodeKind.PANEL)]
    if not graph.has_node(scope_id):
        raise UnknownScope(f"unknown scope: {scope_id}")
    node = graph.node(scope_id)
    if node.kind is NodeKind.EVENT:
        return list(graph.neighbors(scope_id, EdgeKind.INSTANTIATES, "in"))
    if node.kind is NodeKind.MACRO_EVENT:
        panels: list[str] = []
        for event_id in graph.neighbors(scope_id, EdgeKind.SUBEVENT_OF, "in"):
            panels.extend(graph.neighbors(event_id, EdgeKind.INSTANTIATES, "in"))
        return panels
    raise UnknownScope(f"scope must be an event, macro-event, or {STORY_SCOPE!r}: {scope_id}")


def reconstruct_timeline(
    graph: NarrativeGraph, scope_id: str, order_kind: str = "reading"
) -> Timeline:
    """Panels of a scope in the order given by one of the precedence chains."""
    if order_kind not in ORDER_KINDS:
        raise ValueError(f"order_kind must be one of {ORDER_KINDS}, got {order_kind!r}")
    edge_kind = _ORDER_EDGE[order_kind]
    scope = set(_scope_panels(graph, scope_id))
    if len(scope) <= 1:
        return Timeline(scope_id, order_kind, tuple(scope))

    heads = [
        node.id
        for node in graph.nodes(NodeKind.PANEL)
        if not graph.neighbors(node.id, edge_kind, "in")
    ]
    if len(heads) != 1:
        raise BrokenChain(f"{order_kind} chain has {len(heads)} heads, expected 1")
    ordered: list[str] = []
    current: str | None = heads[0]
    while current is not None:
        if current in scope:
            ordered.append(current)
        successors = graph.neighbors(current, edge_kind, "out")
        if len(successors) > 1:
            raise BrokenChain(f"{order_kind} chain branches at {current}")
        current = successors[0] if successors else None
    if len(ordered) != len(scope):
        missing = sorted(scope - set(ordered))
        raise BrokenChain(
            f"{order_kind} chain never reaches {missing[0]} in scope {scope_id}"
        )
    return Timeline(scope_id, order_kind, tuple(ordered))


def _sibling_order(graph: NarrativeGraph, children: list[str]) -> list[str]:
    """Order siblings by the precedes chain among them; ids break any ties."""
    remaining = set(children)
    ordered: list[str] = []
    while remaining:
        ready = sorted(
            child
            for child in remaining
            if not any(
                pred in remaining
                for pred in graph.neighbors(child, EdgeKind.PRECEDES, "in")
            )
        )
        if not ready:
            # cycles are impossible by construction; guard stays for hand-built graphs
            ready = [min(remaining)]
        ordered.append(ready[0])
        remaining.remove(ready[0])
    return ordered


def summarize_event(graph: NarrativeGraph, node_id: str) -> EventSummary:
    """Direct children of an event or macro-event, in narrative order."""
    if not graph.has_node(node_id):
        raise UnknownNode(node_id)
    node = graph.node(node_id)
    if node.kind is NodeKind.MACRO_EVENT:
        children = _sibling_order(
            graph, list(graph.neighbors(node_id, EdgeKind.SUBEVENT_OF, "in"))
        )
    elif node.kind is NodeKind.EVENT:
        children = sorted(
            graph.neighbors(node_id, EdgeKind.INSTANTIATES, "in"),
            key=lambda p: _reading_key(graph, p),
        )
    else:
        raise NotAnEventNode(f"not an event node: {node_id} ({node.kind.value})")
    return EventSummary(
        node_id,
        tuple((cid, graph.node(cid).label() or cid) for cid in children),
    )
