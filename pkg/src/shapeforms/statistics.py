"""First and second moment statistics on shape representations.

The mean is the Riemannian center of mass, computed by the fixed-point
iteration ``mu <- exp_mu(mean_i log_mu(s_i))``. On the flat stretch part
one step already lands on the result; the rotation part converges for
well-localized data (all relative transition rotations away from angle
pi). Principal modes come from the eigendecomposition of the Gram matrix
of the logs at the mean, normalized to unit metric length, so mode
coefficients are plain inner products.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ReferenceMismatchError
from .reference import build_reference
from .representation import (
    DistanceParams,
    ShapeRep,
    TangentRep,
    encode,
    flatten_tangent,
    rep_exp,
    rep_log,
    unflatten_tangent,
)

DEFAULT_MEAN_TOL = 1e-10
DEFAULT_MEAN_MAX_ITER = 50

#: Relative eigenvalue cutoff separating true modes from rank noise.
EIGENVALUE_CUTOFF = 1e-12


def _check_same_reference(reps):
    if not reps:
        raise ValueError("need at least one representation")
    first = reps[0].reference_hash
    for rep in reps[1:]:
        if rep.reference_hash != first:
            raise ReferenceMismatchError("representations use different references")


def mean_residual(mu, reps):
    """Norm of the summed logs at ``mu`` (zero exactly at the mean).

    Measured in the unweighted product norm (Frobenius norms of the skew
    and symmetric components); the metric weights only rescale it by a
    bounded factor, so the zero test is equivalent.
    """
    total_rot = np.zeros((mu.n_edges, 3))
    total_spd = np.zeros((mu.n_triangles, 2, 2))
    for rep in reps:
        v = rep_log(mu, rep)
        total_rot += v.rot_part
        total_spd += v.stretch_part
    return float(
        np.sqrt(2.0 * np.sum(total_rot**2) + np.sum(total_spd**2))
    )


def frechet_mean(reps, tol=DEFAULT_MEAN_TOL, max_iter=DEFAULT_MEAN_MAX_ITER):
    """Riemannian center of mass of ``reps``.

    Iterates until the summed logs at the candidate have norm below
    ``tol``. The stretch part is exact after the first step; the rotation
    part needs a handful of iterations for realistic spreads.
    """
    _check_same_reference(reps)
    n = len(reps)
    mu = reps[0]
    if n == 1:
        return mu
    for _ in range(max_iter):
        total = TangentRep.zero(mu)
        for rep in reps:
            total = total + rep_log(mu, rep)
        residual = float(
            np.sqrt(2.0 * np.sum(total.rot_part**2) + np.sum(total.stretch_part**2))
        )
        if residual < tol:
            return mu
        mu = rep_exp(mu, (1.0 / n) * total)
    raise ConvergenceError(
        f"mean iteration did not reach {tol:g} within {max_iter} steps "
        f"(residual {residual:.3g})"
    )


@dataclass
class PGAModel:
    """Mean, orthonormal principal modes, and per-mode variances.

    Modes are tangent vectors at the mean with unit metric norm;
    ``variances`` are the Gram eigenvalues divided by the sample count,
    in descending order.
    """

    mean: ShapeRep
    modes: list
    variances: np.ndarray
    params: DistanceParams
    reference_hash: str

    @property
    def n_modes(self):
        return len(self.modes)

    def save(self, path):
        payload = {
            "reference_hash": self.reference_hash,
            "omega": self.params.omega,
            "variances": [float(v) for v in self.variances],
            "mean": {
                "rotations": [
                    [float(x) for x in C.reshape(-1)] for C in self.mean.rotations
                ],
                "stretches": [
                    [float(U[0, 0]), float(U[0, 1]), float(U[1, 1])]
                    for U in self.mean.stretches
                ],
            },
            "modes": [
                {
                    "rot_part": [[float(x) for x in row] for row in mode.rot_part],
                    "stretch_part": [
                        [float(X[0, 0]), float(X[0, 1]), float(X[1, 1])]
                        for X in mode.stretch_part
                    ],
                }
                for mode in self.modes
            ],
        }
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(payload, handle)
            handle.write("\n")

    @classmethod
    def load(cls, path):
        with open(path, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
        rotations = np.array(payload["mean"]["rotations"], dtype=float).reshape(
            -1, 3, 3
        )
        triples = np.array(payload["mean"]["stretches"], dtype=float)
        stretches = _triples_to_sym(triples)
        mean = ShapeRep(rotations, stretches, payload["reference_hash"])
        base_hash = mean.content_hash()
        modes = []
        for entry in payload["modes"]:
            rot = np.array(entry["rot_part"], dtype=float).reshape(-1, 3)
            spd = _triples_to_sym(np.array(entry["stretch_part"], dtype=float))
            modes.append(TangentRep(rot, spd, base_hash))
        return cls(
            mean=mean,
            modes=modes,
            variances=np.array(payload["variances"], dtype=float),
            params=DistanceParams(payload["omega"]),
            reference_hash=payload["reference_hash"],
        )


def _triples_to_sym(triples):
    out = np.empty((triples.shape[0], 2, 2))
    out[:, 0, 0] = triples[:, 0]
    out[:, 0, 1] = triples[:, 1]
    out[:, 1, 0] = triples[:, 1]
    out[:, 1, 1] = triples[:, 2]
    return out


def pga(ref, reps, mu=None, params=DistanceParams(), mean_tol=1e-6):
    """Principal geodesic analysis of ``reps`` around their mean.

    ``mu`` must be the Fréchet mean (checked through the residual of the
    summed logs); it is computed when not supplied. Eigenvalues below
    ``EIGENVALUE_CUTOFF`` times the largest are discarded as numerical
    rank noise.
    """
    _check_same_reference(reps)
    if mu is None:
        mu = frechet_mean(reps)
    elif mu.reference_hash != reps[0].reference_hash:
        raise ReferenceMismatchError("mean uses a different reference")
    residual = mean_residual(mu, reps)
    if residual > mean_tol * max(len(reps), 1):
        raise ValueError(
            f"supplied base point is not the mean (log-sum residual {residual:.3g})"
        )

    n = len(reps)
    base_hash = mu.content_hash()
    vectors = np.stack(
        [flatten_tangent(ref, params, rep_log(mu, rep)) for rep in reps]
    )
    gram = vectors @ vectors.T
    eigvals, eigvecs = np.linalg.eigh(gram)
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]

    if eigvals.size and eigvals[0] > 0.0:
        keep = eigvals > EIGENVALUE_CUTOFF * eigvals[0]
    else:
        keep = np.zeros(eigvals.shape, dtype=bool)
    keep &= np.arange(eigvals.size) < max(n - 1, 1)

    modes = []
    variances = []
    for p in np.nonzero(keep)[0]:
        direction = eigvecs[:, p] @ vectors
        direction /= np.sqrt(eigvals[p])
        modes.append(unflatten_tangent(ref, params, direction, base_hash))
        variances.append(eigvals[p] / n)

    return PGAModel(
        mean=mu,
        modes=modes,
        variances=np.array(variances),
        params=params,
        reference_hash=reps[0].reference_hash,
    )


def coefficients(ref, model, rep):
    """Mode coefficients of ``rep``: inner products with the modes."""
    if rep.reference_hash != model.reference_hash:
        raise ReferenceMismatchError("representation uses a different reference")
    v = flatten_tangent(ref, model.params, rep_log(model.mean, rep))
    if not model.modes:
        return np.zeros(0)
    basis = np.stack(
        [flatten_tangent(ref, model.params, mode) for mode in model.modes]
    )
    return basis @ v


def synthesize(model, coeffs):
    """Shape representation for a coefficient vector."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.size > model.n_modes:
        raise ValueError(
            f"{coeffs.size} coefficients for a model with {model.n_modes} modes"
        )
    total = TangentRep.zero(model.mean)
    for a, mode in zip(coeffs, model.modes):
        total = total + float(a) * mode
    return rep_exp(model.mean, total)


def sample(model, count, seed, n_modes=None):
    """Draw shapes from the model's Gaussian coefficient distribution."""
    if n_modes is None:
        n_modes = model.n_modes
    rng = np.random.default_rng(seed)
    std = np.sqrt(model.variances[:n_modes])
    draws = rng.standard_normal(size=(count, n_modes)) * std
    return [synthesize(model, a) for a in draws]


def unbiased_reference(meshes, params=DistanceParams(), outer_iterations=2,
                       reconstruct_kwargs=None):
    """Re-center the reference on the cohort mean.

    Starting from the first mesh as reference, alternates: encode the
    cohort, compute the mean, reconstruct the mean shape, and promote it
    to the new reference. Returns ``(ref, reps, mean_rep)`` of the final
    round, in which the reference agrees with the cohort mean.
    """
    from .reconstruction import reconstruct

    kwargs = reconstruct_kwargs or {}
    ref = build_reference(meshes[0])
    reps = None
    mu = None
    for _ in range(outer_iterations):
        reps = [encode(ref, mesh)[0] for mesh in meshes]
        mu = frechet_mean(reps)
        mean_mesh, _ = reconstruct(ref, mu, **kwargs)
        ref = build_reference(mean_mesh)
    reps = [encode(ref, mesh)[0] for mesh in meshes]
    mu = frechet_mean(reps)
    return ref, reps, mu
