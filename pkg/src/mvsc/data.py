"""Multi-view dataset loading, validation, normalization, and synthesis.

On-disk layout: a JSON manifest {"name", "clusters", "views": [{"path",
"rows"}, ...], "labels"} with view paths relative to the manifest's
directory. Each view is a CSV matrix, one row per feature, one column
per sample, no header; labels are a single-column integer CSV aligned to
sample order.

The synthetic generator plants a union-of-subspaces structure with a
controllable split between latent coordinates shared across views and
view-specific ones, so both the agreement structure multi-view methods
exploit and the complementary per-view information are really present.
"""

import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import DataIOError, ValidationError

logger = logging.getLogger(__name__)

NORMALIZE_MODES = ("none", "unit_column", "zscore_feature")


@dataclass
class MultiViewDataset:
    """Views are d_k x n matrices over the same n samples (columns)."""

    views: list
    n_clusters: int
    labels: np.ndarray | None = None
    name: str = "dataset"

    @property
    def n_views(self):
        return len(self.views)

    @property
    def n_samples(self):
        return self.views[0].shape[1]

    def validate(self):
        if not self.views:
            raise ValidationError("dataset needs at least one view")
        if self.n_clusters < 2:
            raise ValidationError(
                f"cluster count must be at least 2, got {self.n_clusters}"
            )
        n = self.views[0].shape[1]
        bad = [
            f"view {k} has {X.shape[1]} samples (expected {n})"
            for k, X in enumerate(self.views)
            if X.shape[1] != n
        ]
        if bad:
            raise ValidationError("inconsistent sample counts: " + "; ".join(bad))
        for k, X in enumerate(self.views):
            if X.ndim != 2:
                raise ValidationError(f"view {k} is not a matrix (ndim={X.ndim})")
            if not np.all(np.isfinite(X)):
                r, c = np.argwhere(~np.isfinite(X))[0]
                raise ValidationError(
                    f"view {k} has a non-finite entry at row {r}, column {c}"
                )
        if self.labels is not None:
            labels = np.asarray(self.labels).ravel()
            if labels.shape[0] != n:
                raise ValidationError(
                    f"labels length {labels.shape[0]} does not match n={n}"
                )
            distinct = len(np.unique(labels))
            if distinct != self.n_clusters:
                raise ValidationError(
                    f"labels have {distinct} distinct values but clusters={self.n_clusters}"
                )
        return self


def _load_matrix(path):
    try:
        M = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    except OSError as exc:
        raise DataIOError(f"cannot read matrix file {path}: {exc}") from exc
    except ValueError as exc:
        raise ValidationError(f"malformed matrix file {path}: {exc}") from exc
    return M


def load_dataset(manifest_path):
    """Read a manifest and its referenced matrices into a validated dataset."""
    manifest_path = Path(manifest_path)
    try:
        text = manifest_path.read_text()
    except OSError as exc:
        raise DataIOError(f"cannot read manifest {manifest_path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"manifest {manifest_path} is not valid JSON: {exc}")
    for key in ("name", "clusters", "views"):
        if key not in doc:
            raise ValidationError(f"manifest missing required key {key!r}")
    base = manifest_path.parent
    views = []
    for k, entry in enumerate(doc["views"]):
        path = base / entry["path"]
        X = _load_matrix(path)
        if "rows" in entry and X.shape[0] != entry["rows"]:
            raise ValidationError(
                f"view {k} ({path}) has {X.shape[0]} rows, manifest says {entry['rows']}"
            )
        views.append(X)
    labels = None
    if doc.get("labels"):
        raw = _load_matrix(base / doc["labels"]).ravel()
        if not np.all(raw == np.round(raw)):
            raise ValidationError(f"labels file {doc['labels']} has non-integer values")
        labels = raw.astype(int)
    return MultiViewDataset(
        views=views,
        n_clusters=int(doc["clusters"]),
        labels=labels,
        name=str(doc["name"]),
    ).validate()


def write_dataset(ds, out_dir):
    """Dump a dataset in manifest form; returns the manifest path.

    Matrices are written with 17 significant digits so a reload
    reproduces every float64 exactly.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for k, X in enumerate(ds.views):
        rel = f"view{k}.csv"
        np.savetxt(out_dir / rel, X, delimiter=",", fmt="%.17g")
        entries.append({"path": rel, "rows": int(X.shape[0])})
    labels_rel = None
    if ds.labels is not None:
        labels_rel = "labels.csv"
        np.savetxt(out_dir / labels_rel, ds.labels[:, None], fmt="%d")
    manifest = {
        "name": ds.name,
        "clusters": int(ds.n_clusters),
        "views": entries,
        "labels": labels_rel,
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path


def normalize_views(ds, mode):
    """Return a dataset with per-view normalization applied.

    unit_column scales every sample column to unit Euclidean norm (zero
    columns pass through with a warning); zscore_feature centers each
    feature row and divides by its standard deviation (constant rows are
    only centered).
    """
    if mode not in NORMALIZE_MODES:
        raise ValidationError(f"unknown normalize mode {mode!r}; one of {NORMALIZE_MODES}")
    if mode == "none":
        return ds
    views = []
    for k, X in enumerate(ds.views):
        X = X.copy()
        if mode == "unit_column":
            norms = np.linalg.norm(X, axis=0)
            zero = norms == 0
            if zero.any():
                logger.warning(
                    "view %d: %d zero columns left unnormalized", k, int(zero.sum())
                )
            X = X / np.where(zero, 1.0, norms)[None, :]
        else:  # zscore_feature
            X = X - X.mean(axis=1, keepdims=True)
            sd = X.std(axis=1)
            X = X / np.where(sd > 0, sd, 1.0)[:, None]
        views.append(X)
    return replace(ds, views=views)


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of the planted multi-view subspace model."""

    n: int
    clusters: int
    dims: tuple
    subspace_rank: int = 3
    noise_sigma: float = 0.05
    consensus_fraction: float = 1.0
    seed: int = 0
    name: str = "synthetic"

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if self.clusters < 2:
            raise ValidationError(f"clusters must be at least 2, got {self.clusters}")
        if self.subspace_rank < 1:
            raise ValidationError(
                f"subspace_rank must be at least 1, got {self.subspace_rank}"
            )
        if self.n < self.clusters * self.subspace_rank:
            raise ValidationError(
                f"n={self.n} is below clusters*subspace_rank="
                f"{self.clusters * self.subspace_rank}"
            )
        if not self.dims:
            raise ValidationError("need at least one view dimension")
        if min(self.dims) < self.subspace_rank:
            raise ValidationError(
                f"every view dimension must be >= subspace_rank={self.subspace_rank}, "
                f"got {self.dims}"
            )
        if not 0.0 <= self.consensus_fraction <= 1.0:
            raise ValidationError(
                f"consensus_fraction must lie in [0, 1], got {self.consensus_fraction}"
            )
        if self.noise_sigma < 0:
            raise ValidationError(
                f"noise_sigma must be nonnegative, got {self.noise_sigma}"
            )


def load_synthetic_spec(path):
    """Read a SyntheticSpec from a small JSON file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataIOError(f"cannot read synthetic spec {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"synthetic spec {path} is not valid JSON: {exc}")
    try:
        return SyntheticSpec(**doc)
    except TypeError as exc:
        raise ValidationError(f"synthetic spec {path}: {exc}")


def _orthonormal_columns(rng, rows, cols):
    M = rng.standard_normal((rows, cols))
    Q, _ = np.linalg.qr(M)
    return Q[:, :cols]


def generate_synthetic(spec):
    """Sample a multi-view dataset with planted subspace clusters.

    Latent space has dimension clusters * subspace_rank. Each cluster
    gets an orthonormal latent basis; each sample draws one coefficient
    vector shared by all views and one per view. Coefficients are
    half-normal (|N(0,1)|), placing every cluster inside a cone of its
    subspace so that within-cluster similarities stay positive and the
    structure is recoverable by kernel methods too, not only by
    self-representation. A coordinate split at
    round(consensus_fraction * latent_dim) decides which latent
    coordinates come from the shared draw (agreeing across views) and
    which from the view-specific draw. Each view then applies its own
    linear map to its dimension and adds Gaussian noise. Cluster sizes
    are balanced within one sample. Deterministic given spec.seed.
    """
    rng = np.random.default_rng(spec.seed)
    c, r, n = spec.clusters, spec.subspace_rank, spec.n
    latent_dim = c * r
    split = int(round(spec.consensus_fraction * latent_dim))

    bases = [_orthonormal_columns(rng, latent_dim, r) for _ in range(c)]

    sizes = [n // c + (1 if t < n % c else 0) for t in range(c)]
    labels = np.concatenate([np.full(s, t, dtype=int) for t, s in enumerate(sizes)])
    cluster_of = labels

    shared = np.empty((latent_dim, n))
    for i in range(n):
        shared[:, i] = bases[cluster_of[i]] @ np.abs(rng.standard_normal(r))

    views = []
    for d in spec.dims:
        specific = np.empty((latent_dim, n))
        for i in range(n):
            specific[:, i] = bases[cluster_of[i]] @ np.abs(rng.standard_normal(r))
        latent = np.vstack([shared[:split], specific[split:]])
        if d >= latent_dim:
            A = _orthonormal_columns(rng, d, latent_dim)
        else:
            A = rng.standard_normal((d, latent_dim)) / np.sqrt(latent_dim)
        X = A @ latent
        if spec.noise_sigma > 0:
            X = X + spec.noise_sigma * rng.standard_normal(X.shape)
        views.append(X)

    return MultiViewDataset(
        views=views, n_clusters=c, labels=labels, name=spec.name
    ).validate()
