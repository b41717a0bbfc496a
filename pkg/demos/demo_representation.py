"""Fenchel-Nielsen coordinates to Fuchsian representations.

Run: python3 demos/demo_representation.py
"""

import numpy as np

from harmonicflow import surface as sg

print("== the genus-2 surface group ==")
G = sg.build_surface_group(2)
print(f"generators: {G.labels}")
print(f"relator:    {sg.word_str(G.relator, G.labels)}")
print(f"pants curves ({G.num_curves}): {G.curve_order}")
for node in G.pants:
    print(f"  pants {node.name}: boundaries {node.boundaries}")

print("\n== building a representation ==")
fn = sg.FNCoordinates(np.array([2.0, 2.0, 0.5]), np.array([-1.5, 2.0, 0.5]))
rep = sg.fn_to_representation(G, fn)
print(f"relator defect: {sg.relator_defect(G, rep):.2e}")
traces = sg.curve_traces(G, rep)
for i, name in enumerate(G.curve_order):
    expect = 2 * np.cosh(fn.lengths[i] / 2)
    print(f"  |tr rho({name})| = {traces[name]:.12f}   2cosh(l/2) = {expect:.12f}")
for lab in G.labels:
    print(f"  translation length of {lab}: {sg.translation_length(rep[lab]):.6f}")

print("\na full twist (t -> t + l) changes the marking but no curve trace:")
fn2 = sg.FNCoordinates(fn.lengths, fn.twists + np.array([fn.lengths[0], 0, 0]))
rep2 = sg.fn_to_representation(G, fn2)
traces2 = sg.curve_traces(G, rep2)
print(f"  max trace change: {max(abs(traces[k] - traces2[k]) for k in traces):.2e}")
print(f"  generator matrix change (marking!): "
      f"{np.abs(rep['b1'].m - rep2['b1'].m).max():.3f}")
