"""Independent reference computations shared by the tests."""
import itertools

import networkx as nx
import numpy as np


def affine_word(system, word):
    """Coefficients of ``S_word`` by direct composition."""
    a, b = 1 + 0j, 0j
    for k in word:
        s = system.maps[k]
        a, b = a * s.a, a * s.b + b
    return a, b


def address_point(system, pre, per):
    """``pi(pre per per ...)`` from the closed-form fixed point of ``S_per``."""
    a, b = affine_word(system, per)
    z = b / (1 - a)
    a, b = affine_word(system, pre)
    return a * z + b


def shared_vertex_graph(system, depth, ndigits=9):
    """Level-``depth`` pieces joined through vertices owned by two or more pieces."""
    pieces = {}
    for w in itertools.product(range(system.m), repeat=depth):
        a, b = affine_word(system, w)
        pieces[w] = a * system.base.array + b
    owners = {}
    for w, row in pieces.items():
        for z in row:
            owners.setdefault((round(z.real, ndigits), round(z.imag, ndigits)), set()).add(w)
    g = nx.Graph()
    g.add_nodes_from(pieces)
    for key, own in owners.items():
        if len(own) > 1:
            for w in own:
                g.add_edge(w, key)
    return g


def brute_arc(g, system, pre_a, per_a, pre_b, per_b, depth, ndigits=9):
    """Contact-point polyline of the shortest path between two addresses."""
    def node(pre, per):
        z = address_point(system, pre, per)
        key = (round(z.real, ndigits), round(z.imag, ndigits))
        if key in g:
            return z, key
        word = (tuple(pre) + tuple(per) * depth)[:depth]
        return z, word

    x, src = node(pre_a, per_a)
    y, dst = node(pre_b, per_b)
    path = nx.shortest_path(g, src, dst)
    pts = [x] + [complex(*n) for n in path if isinstance(n[0], float)] + [y]
    out = []
    for z in pts:
        if not out or abs(z - out[-1]) > 1e-9:
            out.append(z)
    return out


def hausdorff(A, B):
    A, B = np.asarray(A), np.asarray(B)
    d = np.abs(A[:, None] - B[None, :])
    return max(d.min(axis=1).max(), d.min(axis=0).max())
