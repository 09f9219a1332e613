"""Inverse problem: map a representation back to a triangle mesh.

The solver minimizes the area-weighted mismatch between per-triangle
deformation gradients and the gradients prescribed by the representation,

    E(phi, {R_i}) = sum_i A_i / |N_i| * sum_{j in N_i} |D_i - R_{j->i} U_i|_F^2,

where ``R_{j->i} = R_j F_j C_ji F_i^T`` transports a neighbor rotation
across the shared edge. Minimization alternates a closed-form Procrustes
fit of the rotations (local step) with a sparse linear solve for the
vertex positions (global step); both steps are exact block minimizers, so
the energy never increases. A spanning-tree propagation of the seed
rotation provides the warm start and is already exact for integrable
inputs.

To keep the global step quadratic, the out-of-plane column of each
deformation gradient is carried by an auxiliary per-triangle point (the
image of the unit normal tip). For gradients of actual meshes that column
is exactly the deformed unit normal, so nothing changes for integrable
data while non-integrable mismatch is spread smoothly by the solve.
"""

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .errors import ConditioningError
from .mesh import TriangleMesh
from .representation import _check_binding

#: Energies below ``floor_factor * total_area`` count as exactly solvable.
_FLOOR_FACTOR = 1e-24

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 100


def embed_stretch(ref, i, stretch2):
    """Lift a tangential 2x2 stretch of triangle ``i`` back to 3x3.

    The normal direction gets unit stretch, matching the convention that
    deformation gradients map unit normal to unit normal.
    """
    F = ref.frames[i]
    padded = np.zeros((3, 3))
    padded[:2, :2] = stretch2
    padded[2, 2] = 1.0
    return F @ padded @ F.T


def _embed_stretches(ref, stretches):
    m = stretches.shape[0]
    padded = np.zeros((m, 3, 3))
    padded[:, :2, :2] = stretches
    padded[:, 2, 2] = 1.0
    F = ref.frames
    return F @ padded @ np.swapaxes(F, -1, -2)


def init_rotations(ref, rep):
    """Warm-start rotation field from spanning-tree propagation.

    The seed triangle gets the identity; along every tree edge the local
    integrability condition determines the child from the parent. For
    integrable representations this already reproduces the full rotation
    field (up to the global rotation fixed at the seed).
    """
    _check_binding(ref, rep)
    m = ref.n_triangles
    R = np.empty((m, 3, 3))
    R[ref.seed_triangle] = np.eye(3)
    F = ref.frames
    for parent, child in ref.spanning_tree:
        e = ref.edge_index(int(parent), int(child))
        C = rep.rotations[e]
        if parent > child:
            C = C.T
        R[child] = R[parent] @ F[parent] @ C @ F[child].T
    return R


@dataclass
class EnergyReport:
    """Energy trace and final state of one reconstruction run.

    ``positions`` stacks the solved vertex positions with the per-triangle
    normal-tip points the global step optimizes alongside them.
    """

    energies: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    residuals: np.ndarray = None
    rotations: np.ndarray = None
    positions: np.ndarray = None


class PoissonSystem:
    """Prefactored normal equations of the global step.

    The quadratic form depends only on the reference, so one factorization
    serves arbitrarily many solves with different rotation fields. The
    translation nullspace is removed by pinning one coordinate during the
    solve; the returned positions are then shifted so the vertex barycenter
    matches the reference barycenter.
    """

    def __init__(self, ref):
        mesh = ref.mesh
        m = mesh.n_triangles
        nv = mesh.n_vertices
        self.n_vertices = nv
        self.n_triangles = m
        self._barycenter = mesh.vertices.mean(axis=0)

        H = ref.grad_inverses  # rows: coefficients of (e1, e2, tip - v0)
        tri = mesh.triangles
        rows = (3 * np.arange(m)[:, None] + np.arange(3)[None, :]).ravel()

        data = []
        cols = []
        for k, col_idx in ((0, tri[:, 1]), (1, tri[:, 2])):
            data.append(H[:, k, :].ravel())
            cols.append(np.repeat(col_idx, 3))
        data.append(H[:, 2, :].ravel())
        cols.append(np.repeat(nv + np.arange(m), 3))
        data.append(-H.sum(axis=1).ravel())
        cols.append(np.repeat(tri[:, 0], 3))

        G = scipy.sparse.coo_matrix(
            (
                np.concatenate(data),
                (np.tile(rows, 4), np.concatenate(cols)),
            ),
            shape=(3 * m, nv + m),
        ).tocsr()
        self._G = G

        self._weights = np.repeat(ref.tri_areas, 3)
        K = (G.T @ scipy.sparse.diags(self._weights) @ G).tocsc()
        start = time.perf_counter()
        try:
            self._lu = scipy.sparse.linalg.splu(K[1:, 1:])
        except RuntimeError as exc:
            raise ConditioningError(f"global system factorization failed: {exc}")
        self.factor_seconds = time.perf_counter() - start

    def solve(self, targets):
        """Positions minimizing the weighted gradient mismatch.

        Parameters
        ----------
        targets : ndarray
            ``(m, 3, 3)`` target gradients.

        Returns
        -------
        ndarray
            ``(n_vertices + m, 3)`` stacked vertex positions and normal-tip
            points, vertex barycenter pinned to the reference barycenter.
        """
        rows = targets.transpose(0, 2, 1).reshape(-1, 3)
        rhs = self._G.T @ (self._weights[:, None] * rows)
        X = np.zeros((rhs.shape[0], 3))
        X[1:] = self._lu.solve(rhs[1:])
        X += self._barycenter - X[: self.n_vertices].mean(axis=0)
        return X

    def gradients(self, X):
        """Deformation gradients of stacked positions ``X``."""
        return (self._G @ X).reshape(self.n_triangles, 3, 3).transpose(0, 2, 1)


def prefactor(ref):
    """Assemble and factorize the global-step system for ``ref``."""
    return PoissonSystem(ref)


class _EdgeTerms:
    """Directed-edge arrays shared by energy, local and global step."""

    def __init__(self, ref, rep, stretches3):
        src, dst, edge_idx, forward = ref.directed_edges()
        self.src = src
        self.dst = dst
        C = rep.rotations[edge_idx]
        backward = ~forward
        C[backward] = np.swapaxes(C[backward], -1, -2)
        F = ref.frames
        transport = F[src] @ C @ np.swapaxes(F[dst], -1, -2)
        self.prescribed = transport @ stretches3[dst]
        counts = ref.neighbor_counts
        self.weights = ref.tri_areas[dst] / counts[dst]
        self.counts = counts
        self.tri_areas = ref.tri_areas
        self.isolated = counts == 0

    def energy(self, D, R):
        diff = D[self.dst] - R[self.src] @ self.prescribed
        sq = np.sum(diff * diff, axis=(-2, -1))
        return float(self.weights @ sq)

    def residuals(self, D, R):
        diff = D[self.dst] - R[self.src] @ self.prescribed
        sq = np.sum(diff * diff, axis=(-2, -1))
        out = np.zeros(self.counts.shape[0])
        np.add.at(out, self.dst, sq)
        return out / np.maximum(self.counts, 1)

    def rotation_fits(self, D, current):
        """Closed-form Procrustes update of all rotations at once."""
        M = np.zeros((self.counts.shape[0], 3, 3))
        terms = self.weights[:, None, None] * (
            D[self.dst] @ np.swapaxes(self.prescribed, -1, -2)
        )
        np.add.at(M, self.src, terms)

        det = np.linalg.det(M)
        bad = (det <= 0.0) & ~self.isolated
        if np.any(bad):
            idx = int(np.nonzero(bad)[0][0])
            raise ConditioningError(
                f"rotation fit for triangle {idx} is singular (det "
                f"{det[idx]:.3g})"
            )
        if np.any(self.isolated):
            M[self.isolated] = current[self.isolated]
        W, _, Vt = np.linalg.svd(M)
        R = W @ Vt
        flip = np.linalg.det(R) < 0.0
        if np.any(flip):
            W = W.copy()
            W[flip, :, -1] *= -1.0
            R = W @ Vt
        return R

    def global_targets(self, R, stretches3):
        B = np.zeros_like(R)
        np.add.at(B, self.dst, R[self.src] @ self.prescribed)
        B /= np.maximum(self.counts, 1)[:, None, None]
        if np.any(self.isolated):
            B[self.isolated] = R[self.isolated] @ stretches3[self.isolated]
        return B


def local_step(ref, rep, gradients, rotations=None):
    """One exact minimization of the energy over all rotations.

    ``gradients`` is the current per-triangle deformation-gradient field;
    ``rotations`` is only consulted for triangles without neighbors.
    """
    _check_binding(ref, rep)
    stretches3 = _embed_stretches(ref, rep.stretches)
    terms = _EdgeTerms(ref, rep, stretches3)
    if rotations is None:
        rotations = np.broadcast_to(np.eye(3), (ref.n_triangles, 3, 3))
    return terms.rotation_fits(np.asarray(gradients, dtype=float), rotations)


def reconstruct(ref, rep, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, system=None):
    """Solve the inverse problem for ``rep``.

    Parameters
    ----------
    ref : ReferenceGeometry
        Reference the representation is bound to.
    rep : ShapeRep
        Representation to invert.
    tol : float
        Relative energy decrease below which the alternation stops.
    max_iter : int
        Maximum number of local/global rounds after the initial solve.
    system : PoissonSystem, optional
        Reuse a prefactored system (must belong to ``ref``).

    Returns
    -------
    (TriangleMesh, EnergyReport)
        The reconstructed mesh (vertex barycenter at the reference
        barycenter, orientation fixed by the seed triangle) and the energy
        trace. The energy sequence is non-increasing.
    """
    _check_binding(ref, rep)
    if system is None:
        system = prefactor(ref)

    stretches3 = _embed_stretches(ref, rep.stretches)
    terms = _EdgeTerms(ref, rep, stretches3)
    R = init_rotations(ref, rep)

    X = system.solve(terms.global_targets(R, stretches3))
    D = system.gradients(X)
    report = EnergyReport()
    energy = terms.energy(D, R)
    report.energies.append(energy)

    floor = _FLOOR_FACTOR * ref.total_area
    for iteration in range(1, max_iter + 1):
        previous = energy
        if previous <= floor:
            report.converged = True
            break

        R = terms.rotation_fits(D, R)
        report.energies.append(terms.energy(D, R))

        X = system.solve(terms.global_targets(R, stretches3))
        D = system.gradients(X)
        energy = terms.energy(D, R)
        report.energies.append(energy)
        report.iterations = iteration

        if energy <= floor or previous - energy <= tol * previous:
            report.converged = True
            break

    report.residuals = terms.residuals(D, R)
    report.rotations = R
    report.positions = X
    mesh = TriangleMesh(X[: system.n_vertices], ref.mesh.triangles)
    return mesh, report
