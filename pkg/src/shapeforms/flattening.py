"""Quasi-isometric flattening via projection onto the flat submanifold.

Planar immersions of the reference are exactly the representations with
identity stretches and transition rotations that keep the frame normal
fixed. Projecting a reference there is cheap: keep the metric part at the
identity and replace each transition rotation by the unfolding rotation of
its edge expressed in the reference frames. Reconstruction of the
projected representation then produces the flattening; for developable
patches it is an exact isometry of the mesh, otherwise the Poisson solve
spreads the unavoidable distortion smoothly.
"""

from dataclasses import dataclass
import json

import numpy as np

from .errors import MeshTopologyError
from .liegroups import so3_exp
from .mesh import TriangleMesh, unique_edges
from .reconstruction import DEFAULT_MAX_ITER, DEFAULT_TOL, reconstruct
from .representation import ShapeRep


@dataclass
class FlatteningReport:
    """Distortion summary of one flattening.

    ``planarity_residual`` is the largest out-of-plane coordinate relative
    to the bounding-box diagonal before the residual coordinate is
    dropped. Edge distortions are relative length changes against the
    reference; area distortions relative triangle-area changes.
    """

    planarity_residual: float
    edge_distortions: np.ndarray
    area_distortions: np.ndarray

    @property
    def max_edge_distortion(self):
        return float(self.edge_distortions.max())

    @property
    def mean_edge_distortion(self):
        return float(self.edge_distortions.mean())

    @property
    def max_area_distortion(self):
        return float(self.area_distortions.max())

    def save(self, path):
        payload = {
            "planarity_residual": self.planarity_residual,
            "max_edge_distortion": self.max_edge_distortion,
            "mean_edge_distortion": self.mean_edge_distortion,
            "max_area_distortion": self.max_area_distortion,
            "edge_distortions": [float(x) for x in self.edge_distortions],
            "area_distortions": [float(x) for x in self.area_distortions],
        }
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(payload, handle)
            handle.write("\n")


def unfold_rotation(ref, edge):
    """Rotation about the shared edge folding triangle ``j`` into the
    plane of triangle ``i`` for the inner edge ``(i, j)``.

    Maps the normal of ``j`` onto the normal of ``i``; coplanar neighbors
    give the identity, and swapping the pair gives the transpose.
    """
    i, j = edge
    e = ref.edge_index(i, j)
    if ref.inner_edges[e, 0] != min(i, j) or ref.inner_edges[e, 1] != max(i, j):
        raise MeshTopologyError(f"({i}, {j}) is not an inner edge")
    a, b = ref.edge_shared_vertices[e]
    axis = ref.mesh.vertices[b] - ref.mesh.vertices[a]
    axis = axis / np.linalg.norm(axis)
    normals = ref.frames[:, :, 2]
    ni, nj = normals[i], normals[j]
    # Signed dihedral angle from n_j to n_i about the edge direction; the
    # sign flips together with the axis, so the rotation is well-defined.
    angle = np.arctan2(np.dot(np.cross(nj, ni), axis), np.dot(nj, ni))
    return so3_exp(axis * angle)


def flat_projection(ref):
    """Closest-flat representation of the reference.

    Identity stretches everywhere; the transition rotation of edge
    ``(i, j)`` becomes ``F_i^T R_unfold F_j``, which fixes the frame
    normal axis (a planar transition).
    """
    E = ref.n_inner_edges
    rotations = np.empty((E, 3, 3))
    for e, (i, j) in enumerate(ref.inner_edges):
        unfold = unfold_rotation(ref, (int(i), int(j)))
        rotations[e] = ref.frames[i].T @ unfold @ ref.frames[j]
    stretches = np.broadcast_to(np.eye(2), (ref.n_triangles, 2, 2)).copy()
    return ShapeRep(rotations, stretches, ref.content_hash)


def flatten(ref, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, system=None):
    """Flatten the reference into the plane.

    Closed surfaces carry curvature that no planar immersion can absorb,
    so meshes without boundary are rejected; cut them first.

    Returns
    -------
    (TriangleMesh, FlatteningReport)
        The flattened mesh with its third coordinate set to zero (the
        chart puts the seed triangle into the z = 0 plane with its first
        frame axis along +x), plus the distortion report.
    """
    if not ref.has_boundary:
        raise MeshTopologyError(
            "closed surface: flattening needs an open mesh, provide a cut"
        )
    rep = flat_projection(ref)
    mesh, _ = reconstruct(ref, rep, tol=tol, max_iter=max_iter, system=system)

    # Seed chart: its reference frame becomes the coordinate frame.
    seed_frame = ref.frames[ref.seed_triangle]
    vertices = mesh.vertices @ seed_frame
    seed_centroid = vertices[ref.mesh.triangles[ref.seed_triangle]].mean(axis=0)
    vertices = vertices - seed_centroid

    planarity = float(np.abs(vertices[:, 2]).max() / ref.mesh.bbox_diagonal)
    vertices[:, 2] = 0.0
    flat_mesh = TriangleMesh(vertices, ref.mesh.triangles)

    edges = unique_edges(ref.mesh.triangles)
    ref_len = np.linalg.norm(
        ref.mesh.vertices[edges[:, 0]] - ref.mesh.vertices[edges[:, 1]], axis=1
    )
    flat_len = np.linalg.norm(
        vertices[edges[:, 0]] - vertices[edges[:, 1]], axis=1
    )
    edge_distortions = np.abs(flat_len - ref_len) / ref_len
    area_distortions = (
        np.abs(flat_mesh.triangle_areas() - ref.tri_areas) / ref.tri_areas
    )
    report = FlatteningReport(
        planarity_residual=planarity,
        edge_distortions=edge_distortions,
        area_distortions=area_distortions,
    )
    return flat_mesh, report
