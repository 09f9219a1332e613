"""Model quality measures, classification harness, and baselines.

Specificity, generalization ability, and compactness quantify how a
fitted model relates to its training cohort. Classification uses a linear
soft-margin SVM on mode coefficients with Monte-Carlo cross-validation
over class-balanced splits; a point-distribution model (rigid Procrustes
alignment plus vertex PCA) serves as the baseline feature extractor.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import ReferenceMismatchError
from .reconstruction import prefactor, reconstruct
from .representation import rep_distance
from .statistics import PGAModel, coefficients, pga, sample, synthesize

DEFAULT_SVM_ITERATIONS = 600
DEFAULT_CV_DRAWS = 200


# ---------------------------------------------------------------------------
# model quality measures


def _vertex_rms_aligned(a, b):
    P = a - a.mean(axis=0)
    Q = b - b.mean(axis=0)
    H = P.T @ Q
    U, _, Vt = np.linalg.svd(H)
    S = np.diag([1.0, 1.0, np.sign(np.linalg.det(Vt.T @ U.T))])
    R = Vt.T @ S @ U.T
    return float(np.sqrt(np.mean(np.sum((P @ R.T - Q) ** 2, axis=1))))


def _truncated(model, modes):
    if modes is None:
        return model
    if modes > model.n_modes:
        raise ValueError(f"requested {modes} of {model.n_modes} modes")
    return PGAModel(
        mean=model.mean,
        modes=model.modes[:modes],
        variances=model.variances[:modes],
        params=model.params,
        reference_hash=model.reference_hash,
    )


def specificity(ref, model, training, n_samples=1000, modes=None, metric="intrinsic",
                seed=0):
    """Mean distance of model samples to their nearest training shape.

    ``metric="intrinsic"`` measures in representation space; ``metric="vertex"``
    reconstructs meshes and measures vertex RMS after rigid alignment (a
    pragmatic stand-in for physically based surface distances).
    """
    if not training:
        raise ValueError("training set is empty")
    truncated = _truncated(model, modes)
    draws = sample(truncated, n_samples, seed=seed)
    if metric == "intrinsic":
        total = 0.0
        for drawn in draws:
            total += min(
                rep_distance(ref, drawn, t, model.params) for t in training
            )
        return total / len(draws)
    if metric == "vertex":
        system = prefactor(ref)
        train_meshes = [
            reconstruct(ref, t, system=system)[0].vertices for t in training
        ]
        total = 0.0
        for drawn in draws:
            mesh, _ = reconstruct(ref, drawn, system=system)
            total += min(
                _vertex_rms_aligned(mesh.vertices, tv) for tv in train_meshes
            )
        return total / len(draws)
    raise ValueError(f"unknown metric {metric!r}")


def generalization_curve(ref, reps, max_modes=None, params=None, metric="intrinsic"):
    """Leave-one-out reconstruction error per mode count.

    Each fold fits mean and modes on the remaining shapes, projects the
    held-out shape, and measures the distance of the projection to it.
    Returns an array indexed by mode count ``1 .. max_modes``.
    """
    if len(reps) < 3:
        raise ValueError("need at least three shapes for leave-one-out")
    # Folds expose at most len(reps) - 2 modes; beyond that the curve
    # plateaus because no further coefficients exist.
    if max_modes is None:
        max_modes = len(reps) - 2

    if metric not in ("intrinsic", "vertex"):
        raise ValueError(f"unknown metric {metric!r}")
    system = prefactor(ref) if metric == "vertex" else None
    errors = np.zeros((len(reps), max_modes))
    for i, held_out in enumerate(reps):
        rest = [r for k, r in enumerate(reps) if k != i]
        kwargs = {} if params is None else {"params": params}
        model = pga(ref, rest, **kwargs)
        a = coefficients(ref, model, held_out)
        if metric == "vertex":
            mesh_h, _ = reconstruct(ref, held_out, system=system)
        for modes in range(1, max_modes + 1):
            used = min(modes, model.n_modes)
            projected = synthesize(model, a[:used])
            if metric == "intrinsic":
                errors[i, modes - 1] = rep_distance(
                    ref, projected, held_out, model.params
                )
            else:
                mesh_p, _ = reconstruct(ref, projected, system=system)
                errors[i, modes - 1] = _vertex_rms_aligned(
                    mesh_p.vertices, mesh_h.vertices
                )
    return errors.mean(axis=0)


def generalization(ref, reps, modes, params=None, metric="intrinsic"):
    """Leave-one-out error for one mode count."""
    return float(
        generalization_curve(ref, reps, max_modes=modes, params=params,
                             metric=metric)[modes - 1]
    )


def compactness(model, modes):
    """Cumulative share of variance captured by the first ``modes`` modes."""
    if modes > model.n_modes:
        raise ValueError(f"requested {modes} of {model.n_modes} modes")
    total = float(np.sum(model.variances))
    if total == 0.0:
        return 1.0
    return float(np.sum(model.variances[:modes]) / total)


@dataclass
class MetricsReport:
    """Specificity/generalization/compactness curves over mode counts."""

    modes: np.ndarray
    specificity: np.ndarray
    generalization: np.ndarray
    compactness: np.ndarray

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8") as handle:
            handle.write("modes,specificity,generalization,compactness\n")
            for row in zip(
                self.modes, self.specificity, self.generalization, self.compactness
            ):
                handle.write(
                    f"{int(row[0])},{row[1]:.17g},{row[2]:.17g},{row[3]:.17g}\n"
                )


def metrics_report(ref, reps, params=None, n_samples=1000, metric="intrinsic", seed=0,
                   max_modes=None):
    """Evaluate all three quality measures on a cohort."""
    kwargs = {} if params is None else {"params": params}
    model = pga(ref, reps, **kwargs)
    cap = model.n_modes if max_modes is None else min(max_modes, model.n_modes)
    mode_counts = np.arange(1, cap + 1)
    spec = np.array(
        [
            specificity(ref, model, reps, n_samples=n_samples, modes=int(k),
                        metric=metric, seed=seed)
            for k in mode_counts
        ]
    )
    gen = generalization_curve(ref, reps, max_modes=cap, params=model.params,
                               metric=metric)
    comp = np.array([compactness(model, int(k)) for k in mode_counts])
    return MetricsReport(
        modes=mode_counts, specificity=spec, generalization=gen, compactness=comp
    )


# ---------------------------------------------------------------------------
# linear SVM on coefficients


@dataclass
class ClassifierModel:
    """Linear decision rule ``sign(features @ eta + bias)``.

    Trained on centered features scaled by one pooled factor (per-column
    unit variance would inflate low-variance modes into pure noise
    features and drown the informative directions). ``eta`` and ``bias``
    below are de-standardized back into raw coefficient space, so the
    discriminating direction can be synthesized directly.
    """

    weights_std: np.ndarray
    bias_std: float
    feature_mean: np.ndarray
    feature_std: np.ndarray
    regularization: float

    @property
    def eta(self):
        return self.weights_std / self.feature_std

    @property
    def bias(self):
        return self.bias_std - float(
            (self.weights_std * self.feature_mean / self.feature_std).sum()
        )

    def decision_function(self, features):
        features = np.atleast_2d(np.asarray(features, dtype=float))
        return features @ self.eta + self.bias

    def predict(self, features):
        return np.where(self.decision_function(features) >= 0.0, 1, -1)

    def save(self, path):
        payload = {
            "weights_std": [float(x) for x in self.weights_std],
            "bias_std": self.bias_std,
            "feature_mean": [float(x) for x in self.feature_mean],
            "feature_std": [float(x) for x in self.feature_std],
            "regularization": self.regularization,
        }
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(payload, handle)
            handle.write("\n")

    @classmethod
    def load(cls, path):
        with open(path, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
        return cls(
            weights_std=np.array(payload["weights_std"], dtype=float),
            bias_std=float(payload["bias_std"]),
            feature_mean=np.array(payload["feature_mean"], dtype=float),
            feature_std=np.array(payload["feature_std"], dtype=float),
            regularization=float(payload["regularization"]),
        )


def train_svm(features, labels, reg=1.0, n_iterations=DEFAULT_SVM_ITERATIONS):
    """Soft-margin linear SVM via deterministic full-batch subgradient descent.

    Minimizes ``0.5 / reg * |w|^2 + mean hinge`` on centered,
    globally-scaled features with a ``1/t`` step size and tail averaging.
    Duplicating rows or rescaling all features leaves the decision rule
    unchanged.
    """
    X = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("features must be (n, d) with one label per row")
    classes = np.unique(y)
    if not np.array_equal(classes, [-1.0, 1.0]):
        raise ValueError(f"labels must contain both classes -1 and +1, got {classes}")

    mean = X.mean(axis=0)
    centered = X - mean
    # One pooled scale: relative variances between modes are informative
    # and must survive normalization.
    pooled = float(np.sqrt(np.mean(centered**2)))
    std = np.full(X.shape[1], pooled if pooled > 0.0 else 1.0)
    Z = centered / std

    alpha = 1.0 / reg
    n = Z.shape[0]
    w = np.zeros(Z.shape[1])
    b = 0.0
    w_sum = np.zeros_like(w)
    b_sum = 0.0
    tail = n_iterations // 2
    for t in range(1, n_iterations + 1):
        margin = y * (Z @ w + b)
        active = margin < 1.0
        grad_w = alpha * w - (y[active, None] * Z[active]).sum(axis=0) / n
        grad_b = -float(y[active].sum()) / n
        step = 1.0 / (alpha * t)
        w = w - step * grad_w
        b = b - step * grad_b
        if t > n_iterations - tail:
            w_sum += w
            b_sum += b
    w = w_sum / tail
    b = b_sum / tail
    return ClassifierModel(
        weights_std=w,
        bias_std=float(b),
        feature_mean=mean,
        feature_std=std,
        regularization=reg,
    )


def monte_carlo_cv(features, labels, train_share, draws=DEFAULT_CV_DRAWS, reg=1.0,
                   seed=0, n_iterations=DEFAULT_SVM_ITERATIONS):
    """Accuracy of the SVM under repeated class-balanced random splits.

    Each draw trains on ``round(train_share * n_min)`` samples per class
    (``n_min`` the smaller class size) and tests on the complement.
    Returns mean and standard deviation of the accuracy over draws.
    """
    X = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=int)
    if not 0.0 < train_share < 1.0:
        raise ValueError("train_share must be in (0, 1)")
    idx_pos = np.nonzero(y == 1)[0]
    idx_neg = np.nonzero(y == -1)[0]
    if idx_pos.size == 0 or idx_neg.size == 0:
        raise ValueError("both classes must be present")
    k = int(round(train_share * min(idx_pos.size, idx_neg.size)))
    k = max(k, 1)
    if k >= idx_pos.size or k >= idx_neg.size:
        raise ValueError(
            f"train share {train_share} leaves no test samples for some class"
        )

    rng = np.random.default_rng(seed)
    accuracies = np.empty(draws)
    for d in range(draws):
        pos = rng.permutation(idx_pos)
        neg = rng.permutation(idx_neg)
        train = np.concatenate([pos[:k], neg[:k]])
        test = np.concatenate([pos[k:], neg[k:]])
        clf = train_svm(X[train], y[train], reg=reg, n_iterations=n_iterations)
        predicted = clf.predict(X[test])
        accuracies[d] = float(np.mean(predicted == y[test]))
    return float(accuracies.mean()), float(accuracies.std())


def accuracy_curve(features, labels, shares, draws=DEFAULT_CV_DRAWS, reg=1.0,
                   seed=0, n_iterations=DEFAULT_SVM_ITERATIONS):
    """Mean/std accuracy for a sequence of training shares."""
    rows = []
    for share in shares:
        mean, std = monte_carlo_cv(
            features, labels, share, draws=draws, reg=reg, seed=seed,
            n_iterations=n_iterations,
        )
        rows.append((float(share), mean, std))
    return rows


# ---------------------------------------------------------------------------
# point-distribution baseline


@dataclass
class PDMModel:
    """Vertex-space PCA after group-wise rigid alignment."""

    mean_vertices: np.ndarray
    components: np.ndarray  # (n_components, 3 * n_vertices), orthonormal rows
    variances: np.ndarray

    @property
    def n_modes(self):
        return self.components.shape[0]


def _align_to(target, vertices):
    """Rigidly align ``vertices`` to ``target`` (both centered copies)."""
    P = vertices - vertices.mean(axis=0)
    Q = target - target.mean(axis=0)
    H = P.T @ Q
    U, _, Vt = np.linalg.svd(H)
    S = np.diag([1.0, 1.0, np.sign(np.linalg.det(Vt.T @ U.T))])
    R = Vt.T @ S @ U.T
    return P @ R.T + target.mean(axis=0)


def pdm_fit(meshes, tol=1e-10, max_iter=100):
    """Point-distribution model: generalized Procrustes + PCA.

    Rigid alignment only (no scaling), iterated to stationarity of the
    mean configuration; principal components with nonzero variance are
    retained.
    """
    triangles = meshes[0].triangles
    for mesh in meshes[1:]:
        if not np.array_equal(mesh.triangles, triangles):
            raise ReferenceMismatchError("meshes have different combinatorics")
    configs = [m.vertices - m.vertices.mean(axis=0) for m in meshes]
    mean = configs[0].copy()
    for _ in range(max_iter):
        aligned = [_align_to(mean, c) for c in configs]
        new_mean = np.mean(aligned, axis=0)
        new_mean -= new_mean.mean(axis=0)
        if np.max(np.abs(new_mean - mean)) < tol:
            mean = new_mean
            break
        mean = new_mean
    aligned = np.stack([_align_to(mean, c) for c in configs])

    n = aligned.shape[0]
    flat = aligned.reshape(n, -1)
    centered = flat - mean.reshape(1, -1)
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    keep = svals > 1e-12 * max(svals[0], 1e-300)
    components = vt[keep]
    variances = (svals[keep] ** 2) / n
    return PDMModel(mean_vertices=mean, components=components, variances=variances)


def pdm_coefficients(model, mesh):
    """Project a mesh onto the model components (after rigid alignment)."""
    aligned = _align_to(model.mean_vertices, mesh.vertices - mesh.vertices.mean(axis=0))
    centered = aligned.reshape(-1) - model.mean_vertices.reshape(-1)
    return model.components @ centered


def pdm_synthesize(model, coeffs):
    """Vertex configuration for a PDM coefficient vector."""
    coeffs = np.asarray(coeffs, dtype=float)
    flat = model.mean_vertices.reshape(-1) + coeffs @ model.components[: coeffs.size]
    return flat.reshape(-1, 3)


# ---------------------------------------------------------------------------
# discriminating direction


def discriminating_path(ref, model, clf, steps, value_range, system=None):
    """Meshes along the classifier's discriminating direction.

    The de-standardized weight vector is normalized in coefficient space
    and sampled at ``steps`` equidistant scales within ``value_range``;
    each coefficient vector is synthesized and reconstructed.
    """
    eta = np.asarray(clf.eta, dtype=float)
    norm = float(np.linalg.norm(eta))
    if norm == 0.0:
        raise ValueError("classifier weight vector is zero")
    if eta.size != model.n_modes:
        raise ValueError(
            f"classifier has {eta.size} weights but the model {model.n_modes} modes"
        )
    direction = eta / norm
    lo, hi = value_range
    scales = np.linspace(lo, hi, steps)
    if system is None:
        system = prefactor(ref)
    meshes = []
    for c in scales:
        rep = synthesize(model, c * direction)
        mesh, _ = reconstruct(ref, rep, system=system)
        meshes.append(mesh)
    return meshes
