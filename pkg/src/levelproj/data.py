"""Synthetic regulatory-network data, file ingestion, splits and metrics.

The generator simulates a regulator/gene expression matrix: every
regulator column is standard normal, and each of its genes is bivariate
normal with the regulator at correlation rho, i.e. gene = rho * regulator
+ N(0, 1 - rho^2).  Columns are laid out block-wise, one regulator
followed by its genes, so d = n_reg * (n_g + 1).  Responses are linear in
a sparse block-structured true regressor plus Gaussian noise.

All randomness is pinned for reproducibility: uniforms come from the
Philox 4x64 counter-based generator keyed by the seed, normal variates
are produced by the Box-Muller transform on consecutive uniform pairs,
and permutations use Fisher-Yates driven by the same uniform stream.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import NDArray

from .constraints import FeatureGraph
from .errors import DataFormatError

GENES_PER_REGULATOR = 10
_BLOCK_LEADS = (5.0, -5.0, 3.0, -3.0)


class DatasetKind(Enum):
    LABELS = "labels"
    RESPONSES = "responses"


class NetworkExample(Enum):
    """Activated/inhibited splits of the genes within each regulator block."""

    EX1 = 1  # 9 activated, 1 inhibited
    EX2 = 2  # 8 activated, 2 inhibited
    EX3 = 3  # 7 activated, 3 inhibited

    @property
    def activated(self) -> int:
        return GENES_PER_REGULATOR - self.value

    @property
    def inhibited(self) -> int:
        return self.value


@dataclass
class NetworkParams:
    """Shape and noise parameters of the synthetic regulatory network."""

    m: int
    n_reg: int = 10
    n_g: int = 10
    correlation: float = 0.7
    noise_sigma: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if self.m < 1 or self.n_reg < 1 or self.n_g < 1:
            raise ValueError("m, n_reg and n_g must be positive")
        if not 0.0 <= self.correlation < 1.0:
            raise ValueError("correlation must lie in [0, 1)")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")

    @property
    def d(self) -> int:
        return self.n_reg * (self.n_g + 1)


@dataclass
class Dataset:
    X: NDArray
    y: NDArray
    kind: DatasetKind
    graph: FeatureGraph | None = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.X.ndim != 2 or self.y.shape != (self.X.shape[0],):
            raise ValueError("X must be (m, d) and y must be (m,)")
        if self.kind is DatasetKind.LABELS and not np.all(np.abs(self.y) == 1.0):
            raise ValueError("label datasets need y in {-1, +1}")
        if self.graph is not None and self.graph.d != self.X.shape[1]:
            raise ValueError("graph dimension does not match X")

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def subset(self, indices) -> "Dataset":
        indices = np.asarray(indices, dtype=np.intp)
        return Dataset(self.X[indices], self.y[indices], self.kind, self.graph)


def pinned_rng(seed: int) -> np.random.Generator:
    """Philox-backed generator; the uniform stream is the reproducibility contract."""
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def box_muller_normals(rng: np.random.Generator, n: int) -> NDArray:
    """n standard normals via Box-Muller on consecutive uniform pairs.

    Pair k consumes uniforms (u_{2k}, u_{2k+1}) and yields
    (r cos theta, r sin theta) with r = sqrt(-2 ln(1 - u_{2k})) and
    theta = 2 pi u_{2k+1}; for odd n the trailing sine variate is dropped.
    """
    pairs = (n + 1) // 2
    u1 = rng.random(pairs)
    u2 = rng.random(pairs)
    radius = np.sqrt(-2.0 * np.log1p(-u1))
    angle = 2.0 * np.pi * u2
    out = np.empty(2 * pairs)
    out[0::2] = radius * np.cos(angle)
    out[1::2] = radius * np.sin(angle)
    return out[:n]


def fisher_yates_permutation(rng: np.random.Generator, n: int) -> NDArray:
    """Uniform permutation of range(n) from the pinned uniform stream."""
    idx = np.arange(n)
    for i in range(n - 1, 0, -1):
        j = int(rng.random() * (i + 1))
        idx[i], idx[j] = idx[j], idx[i]
    return idx


def star_graph(n_reg: int, n_g: int, signs=None) -> FeatureGraph:
    """Regulator-to-gene edges, one star per regulator block."""
    edges = []
    k = 0
    for r in range(n_reg):
        reg = r * (n_g + 1)
        for g in range(1, n_g + 1):
            sign = 1 if signs is None else signs[k]
            edges.append((reg, reg + g, sign))
            k += 1
    return FeatureGraph(edges, n_reg * (n_g + 1))


def block_clique_graph(n_reg: int, n_g: int, include_regulator: bool = False,
                       signs_from=None) -> FeatureGraph:
    """All-pairs edges inside each regulator block (pathway-style grouping).

    By default only the genes of a block are connected; with
    include_regulator the regulator joins the clique.  When `signs_from`
    (a coefficient vector, typically the true regressor) is given, each
    edge carries +1 if the endpoints' coefficients agree in sign and -1
    otherwise.
    """
    d = n_reg * (n_g + 1)
    if signs_from is not None:
        signs_from = np.asarray(signs_from, dtype=float)
        if signs_from.shape[0] < d:
            raise ValueError("signs_from is shorter than the feature layout")
    edges = []
    for r in range(n_reg):
        base = r * (n_g + 1)
        first = base if include_regulator else base + 1
        nodes = range(first, base + n_g + 1)
        for a in nodes:
            for b in nodes:
                if b <= a:
                    continue
                if signs_from is None:
                    edges.append((a, b))
                else:
                    sign = -1 if signs_from[a] * signs_from[b] < 0 else 1
                    edges.append((a, b, sign))
    return FeatureGraph(edges, d)


def generate_network(params: NetworkParams) -> tuple[NDArray, FeatureGraph]:
    """Sample the expression matrix and its regulator-gene graph.

    Columns are generated block by block, regulator first, then each gene,
    one Box-Muller column draw per feature, in index order.
    """
    rng = pinned_rng(params.seed)
    X = np.empty((params.m, params.d))
    rho = params.correlation
    noise_scale = np.sqrt(1.0 - rho * rho)
    for r in range(params.n_reg):
        reg_col = r * (params.n_g + 1)
        reg = box_muller_normals(rng, params.m)
        X[:, reg_col] = reg
        for g in range(1, params.n_g + 1):
            X[:, reg_col + g] = rho * reg + noise_scale * box_muller_normals(
                rng, params.m)
    return X, star_graph(params.n_reg, params.n_g)


def true_regressor(example: NetworkExample, d: int) -> NDArray:
    """Block-sparse ground-truth coefficients for the synthetic examples.

    Four regulator blocks lead with 5, -5, 3, -3; inside each block the
    activated genes carry lead/sqrt(10) and the inhibited genes the
    opposite sign, so the vector has 44 nonzero entries.  Assumes the
    10-genes-per-regulator column layout.
    """
    block = GENES_PER_REGULATOR + 1
    needed = len(_BLOCK_LEADS) * block
    if d < needed:
        raise ValueError(f"d must be at least {needed}, got {d}")
    w = np.zeros(d)
    for b, lead in enumerate(_BLOCK_LEADS):
        start = b * block
        w[start] = lead
        gene_mag = lead / np.sqrt(GENES_PER_REGULATOR)
        n_act = example.activated
        w[start + 1:start + 1 + n_act] = gene_mag
        w[start + 1 + n_act:start + block] = -gene_mag
    return w


def generate_response(X: NDArray, w: NDArray, noise_sigma: float,
                      seed: int) -> NDArray:
    """y = X w + N(0, sigma^2) noise from the pinned stream."""
    X = np.asarray(X, dtype=float)
    w = np.asarray(w, dtype=float)
    if X.shape[1] != w.shape[0]:
        raise ValueError("X and w dimensions do not match")
    y = X @ w
    if noise_sigma > 0:
        y = y + noise_sigma * box_muller_normals(pinned_rng(seed), X.shape[0])
    return y


def signed_graph_for_example(example: NetworkExample, d: int,
                             n_reg: int = 10, n_g: int = 10) -> FeatureGraph:
    """Star graph with edge signs read off the true regressor.

    An edge gets sign +1 when the gene's true coefficient has the same
    sign as its regulator's (both activated or both inhibited), -1
    otherwise.  Genes in all-zero blocks count as same-signed.
    """
    if d != n_reg * (n_g + 1):
        raise ValueError("d must equal n_reg * (n_g + 1)")
    w = true_regressor(example, d)
    signs = []
    for r in range(n_reg):
        reg = r * (n_g + 1)
        for g in range(1, n_g + 1):
            signs.append(-1 if w[reg] * w[reg + g] < 0 else 1)
    return star_graph(n_reg, n_g, signs)


def mean_squared_error(y_true, y_pred) -> float:
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.shape != y_pred.shape:
        raise ValueError("length mismatch between y_true and y_pred")
    r = y_true - y_pred
    return float(np.mean(r * r))


def roc_auc(labels, scores) -> float:
    """Area under the ROC curve via the Mann-Whitney rank statistic.

    Equals the probability that a random positive outscores a random
    negative, with ties counted one half.  Invariant under any strictly
    increasing transform of the scores.
    """
    labels = np.asarray(labels, dtype=float)
    scores = np.asarray(scores, dtype=float)
    if labels.shape != scores.shape:
        raise ValueError("length mismatch between labels and scores")
    pos = labels > 0
    n_pos = int(pos.sum())
    n_neg = labels.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC requires both classes present")
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(len(scores))
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0  # average 1-based rank
        i = j + 1
    rank_sum = float(ranks[pos].sum())
    u_stat = rank_sum - n_pos * (n_pos + 1) / 2.0
    return u_stat / (n_pos * n_neg)


def split_folds(dataset: Dataset, n_folds: int = 50,
                train_fraction: float = 0.5,
                seed: int = 0) -> list[tuple[Dataset, Dataset]]:
    """Repeated random train/test splits, deterministic in the seed.

    Each fold draws a fresh Fisher-Yates permutation from one pinned
    stream and cuts it at round(train_fraction * m).
    """
    if n_folds < 1:
        raise ValueError("n_folds must be >= 1")
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie in (0, 1)")
    n_train = int(round(train_fraction * dataset.m))
    if n_train == 0 or n_train == dataset.m:
        raise ValueError("split leaves an empty side")
    rng = pinned_rng(seed)
    folds = []
    for _ in range(n_folds):
        perm = fisher_yates_permutation(rng, dataset.m)
        folds.append((dataset.subset(perm[:n_train]),
                      dataset.subset(perm[n_train:])))
    return folds


# ---------------------------------------------------------------------------
# File formats: comma-separated numeric CSV (optional header, label column
# last for combined datasets) and a tab-separated graph list with a `d=<int>`
# header line.

def save_matrix(path, a: NDArray) -> None:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    with open(path, "w", newline="") as f:
        for row in a:
            f.write(",".join(repr(float(v)) for v in row))
            f.write("\n")


def load_matrix(path) -> NDArray:
    rows = []
    width = None
    with open(path, newline="") as f:
        for lineno, record in enumerate(csv.reader(f), start=1):
            if not record:
                continue
            try:
                row = [float(v) for v in record]
            except ValueError as exc:
                raise DataFormatError(f"{path}: line {lineno}: {exc}") from exc
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise DataFormatError(
                    f"{path}: line {lineno}: expected {width} fields, "
                    f"got {len(row)}")
            rows.append(row)
    if not rows:
        raise DataFormatError(f"{path}: empty file")
    return np.asarray(rows)


def load_vector(path) -> NDArray:
    a = load_matrix(path)
    if 1 not in a.shape:
        raise DataFormatError(f"{path}: expected a single row or column")
    return a.ravel()


def load_csv(path, has_header: bool = False,
             kind: DatasetKind | None = None) -> Dataset:
    """Combined dataset CSV: feature columns with the label/response last."""
    rows = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        for lineno, record in enumerate(reader, start=1):
            if not record:
                continue
            if lineno == 1 and has_header:
                continue
            try:
                rows.append([float(v) for v in record])
            except ValueError as exc:
                raise DataFormatError(f"{path}: line {lineno}: {exc}") from exc
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise DataFormatError(f"{path}: ragged rows with widths {sorted(widths)}")
    if widths.pop() < 2:
        raise DataFormatError(f"{path}: need at least one feature column")
    a = np.asarray(rows)
    X, y = a[:, :-1], a[:, -1]
    if kind is None:
        kind = (DatasetKind.LABELS if np.all(np.abs(y) == 1.0)
                else DatasetKind.RESPONSES)
    return Dataset(X, y, kind)


def save_graph(path, graph: FeatureGraph) -> None:
    with open(path, "w", newline="") as f:
        f.write(f"d={graph.d}\n")
        for i, j, s in zip(graph.i_idx, graph.j_idx, graph.signs):
            f.write(f"{int(i)}\t{int(j)}\t{int(s)}\n")


def load_graph(path, d: int | None = None) -> FeatureGraph:
    """Graph TSV: `d=<int>` header, then `i<TAB>j[<TAB>sign]` per line."""
    edges = []
    file_d = None
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            if lineno == 1:
                if not line.startswith("d="):
                    raise DataFormatError(
                        f"{path}: line 1: expected 'd=<int>' header")
                try:
                    file_d = int(line[2:])
                except ValueError as exc:
                    raise DataFormatError(
                        f"{path}: line 1: bad dimension {line[2:]!r}") from exc
                continue
            parts = line.split("\t")
            if len(parts) not in (2, 3):
                raise DataFormatError(
                    f"{path}: line {lineno}: expected 2 or 3 fields")
            try:
                i, j = int(parts[0]), int(parts[1])
                sign = int(parts[2]) if len(parts) == 3 else 1
            except ValueError as exc:
                raise DataFormatError(f"{path}: line {lineno}: {exc}") from exc
            edges.append((i, j, sign))
    if file_d is None:
        raise DataFormatError(f"{path}: missing 'd=<int>' header")
    if d is not None and d != file_d:
        raise DataFormatError(
            f"{path}: header says d={file_d}, expected d={d}")
    try:
        return FeatureGraph(edges, file_d)
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc
