"""End-to-end assembly: Fenchel-Nielsen input to a ready flow engine."""

from dataclasses import dataclass

import numpy as np

from . import flow as fl
from . import meshing as ms
from . import surface as sg


@dataclass
class Pipeline:
    """Everything the solver needs, built once per run configuration."""

    group: object
    fn_domain: sg.FNCoordinates
    fn_target: sg.FNCoordinates
    rep_domain: dict
    rep_target: dict
    mesh: object
    graph: object
    stats: object
    poly_target: object
    f0_global: np.ndarray
    f0_local: np.ndarray
    engine: fl.FlowEngine

    def constants(self, t=None):
        e0 = self.engine.energy(self.f0_local)
        return fl.convergence_constants(self.stats, e0, t)


def build_pipeline(
    genus,
    domain_lengths,
    domain_twists,
    target_lengths,
    target_twists,
    depth=2,
    steiner_per_side=2,
):
    """Steps 1-6: group, representations, mesh, weights, initial map."""
    group = sg.build_surface_group(genus)
    fn_dom = sg.FNCoordinates(np.asarray(domain_lengths, float), np.asarray(domain_twists, float))
    fn_tgt = sg.FNCoordinates(np.asarray(target_lengths, float), np.asarray(target_twists, float))
    rep_dom = sg.fn_to_representation(group, fn_dom)
    rep_tgt = sg.fn_to_representation(group, fn_tgt)
    mesh = ms.build_mesh(rep_dom, group, depth=depth, steiner_per_side=steiner_per_side)
    graph = ms.extract_biweighted_graph(mesh)
    stats = ms.graph_statistics(graph)
    f0, poly_y = fl.initial_map(mesh, rep_tgt)
    engine = fl.FlowEngine(graph, rep_tgt, group.labels, anchor_points=f0)
    f0_local = engine.localize(f0)
    return Pipeline(
        group, fn_dom, fn_tgt, rep_dom, rep_tgt, mesh, graph, stats, poly_y,
        f0, f0_local, engine,
    )
