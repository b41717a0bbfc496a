"""Fundamental polygons, invariant meshes, and the biweighted graph.

Run: python3 demos/demo_mesh.py  (saves mesh.png when matplotlib is there)
"""

import numpy as np

from harmonicflow import geometry as geo
from harmonicflow import meshing as ms
from harmonicflow import surface as sg

G = sg.build_surface_group(2)
fn = sg.FNCoordinates(np.array([2.0, 2.0, 0.5]), np.array([-1.5, 2.0, 0.5]))
rep = sg.fn_to_representation(G, fn)

print("== optimal fundamental polygon ==")
poly = ms.optimize_fundamental_polygon(rep, G)
print(f"base point (disk): {geo.disk_coords(poly.base)}")
print(f"side lengths: {[round(poly.side_length(k), 3) for k in range(poly.num_sides)]}")
print(f"side partners: {poly.partner}")

print("\n== triangulation and refinement ==")
mesh = ms.triangulate_polygon(poly, steiner_per_side=2)
flips = ms.make_delaunay(mesh)
print(f"depth 0: {len(mesh.vertices)} vertex orbits, {len(mesh.triangles)} triangles, "
      f"{flips} delaunay flips")
for depth in range(1, 3):
    mesh = ms.refine(mesh)
    flips = ms.make_delaunay(mesh)
    edges, _ = ms.quotient_edges(mesh)
    print(f"depth {depth}: V={len(mesh.vertices)} E={len(edges)} F={len(mesh.triangles)} "
          f"chi={len(mesh.vertices) - len(edges) + len(mesh.triangles)} flips={flips}")

print("\n== biweighted graph ==")
graph = ms.extract_biweighted_graph(mesh)
stats = ms.graph_statistics(graph)
print(f"sum(mu) = {graph.mu.sum():.9f}  (4*pi = {4 * np.pi:.9f})")
print(f"weights: min {stats.Omega:.4f}  max {stats.W:.2f}; mu: min {stats.U:.5f}")
print(f"hop diameter {stats.D}, max valence {stats.maxvalence}")
print(f"first kernel values eta = omega/(2 mu mu): "
      f"{[round(graph.kernel(i), 3) for i in range(3)]}")

text = ms.export_mesh(mesh, graph)
print(f"\nmesh text export: {len(text.splitlines())} lines; header:")
print(" ", text.splitlines()[0])

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 6))
    rho = mesh.rho()
    for tri in mesh.triangles:
        pts = [geo.disk_coords(rho.point(w, mesh.vertices[o].point)) for o, w in tri]
        pts.append(pts[0])
        ax.plot(*zip(*pts), lw=0.4, color="tab:blue")
    circle = plt.Circle((0, 0), 1.0, fill=False, color="k")
    ax.add_patch(circle)
    ax.set_aspect("equal")
    ax.set_axis_off()
    fig.savefig("mesh.png", dpi=160, bbox_inches="tight")
    print("wrote mesh.png")
except ImportError:
    print("matplotlib not installed; skipping the picture")
