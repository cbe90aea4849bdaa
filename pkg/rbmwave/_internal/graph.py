from collections import namedtuple as _namedtuple
from numbers import Integral as _Integral
from numbers import Real as _Real

import networkx as _nx
import numpy as _np

from .args import check_arg as _check_arg
from .errors import StructureError as _StructureError


EdgeSpec = _namedtuple('EdgeSpec', ['id', 'start', 'end', 'length', 'speed'])
EdgeSpec.__doc__ = """Directed edge of a metric graph.

The spatial coordinate of the edge runs from ``x=0`` at vertex ``start``
to ``x=length`` at vertex ``end``. Ids are 1-based.
"""


class MetricGraph:
    """Directed metric graph with a length and a wave speed on each edge.

    The graph is backed by a NetworkX ``MultiDiGraph``, so parallel edges
    between the same pair of vertices are allowed as long as their ids differ.
    Instances are not meant to be mutated after construction.

    Parameters
    ----------
    vertex_count : int
        Number of vertices. Vertices are identified by ``1, ..., vertex_count``.
    edges : list of EdgeSpec or list of tuple
        Edges with ids ``1, ..., len(edges)``, each id exactly once.
        Tuples are read as ``(id, start, end, length, speed)``.
    controlled_vertices : list of int, optional
        Vertices at which a boundary control acts.

    Raises
    ------
    StructureError
        If an endpoint is out of range, an edge is a self-loop, a length or
        speed is not positive, edge ids are not ``1..|E|`` or the graph is not
        connected.

    """

    def __init__(self, vertex_count, edges, controlled_vertices=()):
        # Argument processing
        _check_arg(vertex_count, 'vertex_count', _Integral)
        _check_arg(edges, 'edges', (list, tuple))
        _check_arg(controlled_vertices, 'controlled_vertices', (list, tuple, set, frozenset))
        if vertex_count < 1:
            raise _StructureError('The graph needs at least one vertex, got {}.'.format(
                vertex_count))
        if len(edges) == 0:
            raise _StructureError('The graph needs at least one edge.')

        # Edges
        specs = sorted((_to_edge_spec(edge) for edge in edges), key=lambda e: e.id)
        expected_ids = list(range(1, len(specs) + 1))
        found_ids = [e.id for e in specs]
        if found_ids != expected_ids:
            message = 'Edge ids need to be 1..{} with each id exactly once, got {}.'.format(
                len(specs), found_ids)
            raise _StructureError(message)
        for e in specs:
            for vertex in (e.start, e.end):
                if not 1 <= vertex <= vertex_count:
                    message = 'Edge {} has an endpoint {} outside of 1..{}.'.format(
                        e.id, vertex, vertex_count)
                    raise _StructureError(message)
            if e.start == e.end:
                raise _StructureError('Edge {} is a self-loop at vertex {}.'.format(
                    e.id, e.start))
            if not (_np.isfinite(e.length) and e.length > 0):
                raise _StructureError('Edge {} has a non-positive length {}.'.format(
                    e.id, e.length))
            if not (_np.isfinite(e.speed) and e.speed > 0):
                raise _StructureError('Edge {} has a non-positive speed {}.'.format(
                    e.id, e.speed))

        # Controlled vertices
        controlled = sorted(set(controlled_vertices))
        for vertex in controlled:
            if not isinstance(vertex, _Integral) or not 1 <= vertex <= vertex_count:
                message = 'Controlled vertex {} is not in 1..{}.'.format(vertex, vertex_count)
                raise _StructureError(message)

        # NetworkX representation
        nx_graph = _nx.MultiDiGraph()
        nx_graph.add_nodes_from(range(1, vertex_count + 1))
        for e in specs:
            nx_graph.add_edge(e.start, e.end, key=e.id, length=e.length, speed=e.speed)
        if not _nx.is_weakly_connected(nx_graph):
            components = sorted(sorted(c) for c in _nx.weakly_connected_components(nx_graph))
            message = 'The graph is not connected. Components: {}'.format(components)
            raise _StructureError(message)

        self._vertex_count = int(vertex_count)
        self._edges = tuple(specs)
        self._controlled = tuple(controlled)
        self._nx_graph = nx_graph
        self._incident = _collect_incident(vertex_count, specs)

    def __repr__(self):
        return '<MetricGraph with {} vertices, {} edges, {} controlled vertices>'.format(
            self._vertex_count, len(self._edges), len(self._controlled))

    @property
    def vertex_count(self):
        return self._vertex_count

    @property
    def edges(self):
        return self._edges

    @property
    def edge_ids(self):
        return tuple(e.id for e in self._edges)

    @property
    def controlled_vertices(self):
        return self._controlled

    @property
    def speeds(self):
        """Wave speeds ordered by edge id."""
        return _np.array([e.speed for e in self._edges], dtype=float)

    @property
    def lengths(self):
        """Edge lengths ordered by edge id."""
        return _np.array([e.length for e in self._edges], dtype=float)

    def edge(self, edge_id):
        """Return the EdgeSpec with the given id."""
        if not isinstance(edge_id, _Integral) or not 1 <= edge_id <= len(self._edges):
            raise _StructureError('Unknown edge {}, valid ids are 1..{}.'.format(
                edge_id, len(self._edges)))
        return self._edges[edge_id - 1]

    def to_networkx(self):
        """Return a copy of the underlying NetworkX MultiDiGraph."""
        return self._nx_graph.copy()

    def _check_vertex(self, vertex):
        if isinstance(vertex, bool) or not isinstance(vertex, _Integral) \
                or not 1 <= vertex <= self._vertex_count:
            raise _StructureError('Unknown vertex {}, valid ids are 1..{}.'.format(
                vertex, self._vertex_count))


def build_incidence(graph):
    """Build the oriented vertex-edge incidence matrix of a metric graph.

    Parameters
    ----------
    graph : MetricGraph

    Returns
    -------
    incidence : numpy.ndarray of int, shape (|V|, |E|)
        Entry ``[j-1, i-1]`` is -1 if vertex ``j`` is the start of edge ``i``,
        +1 if it is the end and 0 otherwise.

    References
    ----------
    - NetworkX documentation: `networkx.linalg.graphmatrix.incidence_matrix
      <https://networkx.org/documentation/stable/reference/generated/networkx.linalg.graphmatrix.incidence_matrix.html>`__

    """
    # Argument processing
    _check_arg(graph, 'graph', MetricGraph)

    # Oriented incidence: -1 at the source and +1 at the target of each edge
    nx_graph = graph._nx_graph
    edgelist = [(e.start, e.end, e.id) for e in graph.edges]
    matrix = _nx.incidence_matrix(
        nx_graph, nodelist=range(1, graph.vertex_count + 1), edgelist=edgelist,
        oriented=True)
    return _np.asarray(matrix.toarray(), dtype=int)


def edges_at(graph, vertex):
    """List the edges incident to a vertex together with their incidence sign.

    Parameters
    ----------
    graph : MetricGraph
    vertex : int

    Returns
    -------
    incident : list of (int, int)
        Pairs ``(edge id, sign)`` in ascending edge id, where the sign is -1 if
        the edge starts at the vertex and +1 if it ends there.

    Raises
    ------
    StructureError
        If the vertex is not part of the graph.

    """
    _check_arg(graph, 'graph', MetricGraph)
    graph._check_vertex(vertex)
    return list(graph._incident[vertex])


def c_tot(graph, vertex):
    """Return the sum of the wave speeds of all edges incident to a vertex."""
    incident = edges_at(graph, vertex)
    if not incident:
        raise _StructureError('Vertex {} has no incident edges.'.format(vertex))
    return float(sum(graph.edge(edge_id).speed for edge_id, _ in incident))


def single_edge_graph(length=1.0, speed=1.0, controlled_vertices=()):
    """Create the graph with one edge from vertex 1 to vertex 2."""
    return MetricGraph(2, [EdgeSpec(1, 1, 2, float(length), float(speed))],
                       controlled_vertices)


def _to_edge_spec(edge):
    if isinstance(edge, EdgeSpec):
        values = edge
    elif isinstance(edge, (list, tuple)) and len(edge) == 5:
        values = EdgeSpec(*edge)
    else:
        raise _StructureError('An edge needs the fields (id, start, end, length, speed), '
                              'got {!r}.'.format(edge))
    for name in ('id', 'start', 'end'):
        value = getattr(values, name)
        if isinstance(value, bool) or not isinstance(value, _Integral):
            raise _StructureError('Edge field "{}" needs to be an integer, got {!r}.'.format(
                name, value))
    for name in ('length', 'speed'):
        value = getattr(values, name)
        if isinstance(value, bool) or not isinstance(value, _Real):
            raise _StructureError('Edge field "{}" needs to be a number, got {!r}.'.format(
                name, value))
    return EdgeSpec(int(values.id), int(values.start), int(values.end),
                    float(values.length), float(values.speed))


def _collect_incident(vertex_count, specs):
    incident = {vertex: [] for vertex in range(1, vertex_count + 1)}
    for e in specs:
        incident[e.start].append((e.id, -1))
        incident[e.end].append((e.id, +1))
    return {vertex: tuple(sorted(pairs)) for vertex, pairs in incident.items()}
