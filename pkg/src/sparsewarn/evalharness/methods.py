"""Per-method pipelines: fit on a training fold, then score raw feature rows.

Every pipeline starts from the PCA projection fitted on the (unbalanced)
training fold. Representation-based methods then use centered unit-norm
vectors, the MLP/SVM/k-NN baselines per-feature z-scores. Minority classes
are oversampled to equal counts before dictionaries or models are built.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..baselines import GridSpec, grid_search, knn_k_grid, knn_predict, log_grid, svm_train
from ..datastore import FeatureDataset, balance_oversample
from ..dictionary import build_denoiser, build_dictionary, make_layout, proxy, reshape_to_plane
from ..errors import ConfigError
from ..neuralnet import train as train_network
from ..neuralnet import (
    TrainConfig, build_csen1, build_csen2, build_mlp, build_reconnet_se,
)
from ..preprocess import fit_pca, normalize, project
from ..rbc import crc_predict, default_lambda_grid, src_predict, tune_crc_lambda, validation_split
from ..solvers import SolverParams, get_solver

DEFAULT_PER_CLASS = 625
SRC_DEFAULTS = {"lambda": 0.01, "max_iter": 500, "tol": 1e-4}
CSEN_DEFAULTS = {"lr": 1e-4, "epochs": 15, "batch_size": 32}
MLP_DEFAULTS = {"lr": 1e-5, "epochs": 10, "batch_size": 32}
CSEN_BUILDERS = {
    "csen1": build_csen1,
    "csen2": lambda layout, seed: build_csen2(layout, seed, pad=True),
    "reconnet": build_reconnet_se,
}


@dataclass
class FittedMethod:
    """A trained pipeline. ``components`` holds the fitted pieces (projector,
    normalization stats, dictionary, denoiser, network, ...)."""

    name: str
    predict_fn: object
    components: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    def predict(self, samples):
        return np.asarray(self.predict_fn(np.atleast_2d(np.asarray(samples, dtype=np.float64))))


def default_pca_m(d):
    return max(1, int(round(0.5 * d)))


@dataclass
class Representation:
    """Shared front end: projection, normalization and the balanced set."""

    projector: object
    stats: object
    X: np.ndarray  # normalized projections of the training fold
    y: np.ndarray
    X_bal: np.ndarray  # normalized projections of the balanced training fold
    y_bal: np.ndarray

    def transform(self, samples):
        return normalize(project(self.projector, samples), self.stats.mode, self.stats)[0]


def _balanced(train, cfg, seed):
    if not cfg.balance:
        return train
    return balance_oversample(train, jitter_sigma=cfg.jitter_sigma, seed=seed)


def represent(train, cfg, seed, mode, balanced=True):
    m = cfg.pca_m or default_pca_m(train.d)
    p = fit_pca(train, m)
    X, stats = normalize(project(p, train.samples), mode)
    if not balanced:
        return Representation(p, stats, X, train.labels, None, None)
    bal = _balanced(train, cfg, seed)
    X_bal = normalize(project(p, bal.samples), mode, stats)[0]
    return Representation(p, stats, X, train.labels, X_bal, bal.labels)


def _lambda_grid(o):
    return default_lambda_grid(o.get("lambda_min", 1e-13), o.get("lambda_max", 1e3))


def _tune_lambda(rep, train, cfg, seed, o, per_class=None):
    """CRC validation accuracy on a stratified 20% holdout of the fold.

    The tuning dictionary comes from the remaining 80%: balanced when
    ``per_class`` is None, else ``per_class`` original atoms per class.
    """
    tr, val = validation_split(train.labels, 0.2, seed)
    C = train.n_classes
    if per_class is None:
        inner = _balanced(train.subset(tr), cfg, seed)
        Xd = normalize(project(rep.projector, inner.samples), rep.stats.mode, rep.stats)[0]
        yd = inner.labels
    else:
        counts = np.bincount(train.labels[tr], minlength=C)
        k = int(min(per_class, counts[counts > 0].min()))
        pick = _pick_atoms(train.labels[tr], k, C, seed)
        Xd, yd = rep.X[tr][pick], train.labels[tr][pick]
    lam, _ = tune_crc_lambda(Xd, yd, rep.X[val], train.labels[val], _lambda_grid(o), C)
    return lam


def _pick_atoms(labels, per_class, n_classes, seed):
    """``per_class`` indices per class, shuffled with ``seed``, class-ordered."""
    rng = np.random.default_rng(seed)
    out = []
    for c in range(n_classes):
        members = np.flatnonzero(labels == c)
        if members.size < per_class:
            raise ConfigError(
                f"class {c} has {members.size} training samples; cannot take {per_class} atoms"
            )
        out.append(np.sort(rng.permutation(members)[:per_class]))
    return np.concatenate(out)


def light_per_class(train, o):
    """Atoms per class for the light dictionary: ``per_class`` if configured,
    else 625 capped at three quarters of the smallest class so the remaining
    samples can train the network."""
    counts = train.class_counts()
    default = min(DEFAULT_PER_CLASS, (3 * int(counts.min())) // 4)
    per_class = o.get("per_class", default)
    if per_class < 1:
        raise ConfigError("too few training samples per class for a light dictionary")
    if per_class >= counts.min():
        raise ConfigError(
            f"per_class={per_class} leaves no training samples for the smallest class ({counts.min()})"
        )
    return per_class


# ---------------------------------------------------------------------------
# representation-based methods


def fit_src(name, train, cfg, seed):
    o = cfg.opts(name)
    rep = represent(train, cfg, seed, "unitnorm")
    dictionary, _ = build_dictionary(rep.X_bal, rep.y_bal, train.n_classes)
    solver_name = name.split("-", 1)[1]
    params = SolverParams(
        lam=o.get("lambda", SRC_DEFAULTS["lambda"]),
        max_iter=o.get("max_iter", SRC_DEFAULTS["max_iter"]),
        tol=o.get("tol", SRC_DEFAULTS["tol"]),
        rho=o.get("rho"),
    )
    solve = get_solver(solver_name, params, sparsity=o.get("sparsity"))
    info = {"lambda": params.lam, "atoms": dictionary.n, "unconverged": 0}

    def solver(D, y):
        sol = solve(D, y)
        info["unconverged"] += not sol.converged
        return sol

    def predict(S):
        return src_predict(dictionary, solver, rep.transform(S))

    comps = {"projector": rep.projector, "stats": rep.stats, "dictionary": dictionary}
    return FittedMethod(name, predict, comps, info)


def fit_crc(name, train, cfg, seed, light=False):
    o = cfg.opts(name)
    rep = represent(train, cfg, seed, "unitnorm", balanced=not light)
    if light:
        per_class = light_per_class(train, o)
        pick = _pick_atoms(train.labels, per_class, train.n_classes, seed)
        dictionary, _ = build_dictionary(rep.X[pick], train.labels[pick], train.n_classes)
    else:
        per_class = None
        dictionary, _ = build_dictionary(rep.X_bal, rep.y_bal, train.n_classes)
    lam = o.get("lambda")
    if lam is None:
        lam = _tune_lambda(rep, train, cfg, seed, o, per_class)
    den = build_denoiser(dictionary, lam)

    def predict(S):
        return crc_predict(dictionary, den, rep.transform(S))[0]

    info = {"lambda": lam, "atoms": dictionary.n}
    comps = {"projector": rep.projector, "stats": rep.stats, "dictionary": dictionary, "denoiser": den}
    return FittedMethod(name, predict, comps, info)


@dataclass
class CsenSetup:
    """Everything a support-estimator network consumes, before training."""

    rep: Representation
    dictionary: object
    denoiser: object
    layout: object
    lam: float
    proxy_kind: str
    scale: float
    planes: np.ndarray
    labels: np.ndarray

    def planes_for(self, S):
        source = self.denoiser if self.proxy_kind == "ridge" else self.dictionary
        return reshape_to_plane(proxy(source, self.rep.transform(S), self.proxy_kind) / self.scale, self.layout)


def prepare_csen(name, train, cfg, seed):
    """Light dictionary, denoiser and training planes for a CSEN-type method.

    ``per_class`` original samples per class become atoms; the rest of the
    fold, oversampled to equal class counts, is the network's training set.
    """
    o = cfg.opts(name)
    rep = represent(train, cfg, seed, "unitnorm", balanced=False)
    per_class = light_per_class(train, o)
    pick = _pick_atoms(train.labels, per_class, train.n_classes, seed)
    dictionary, _ = build_dictionary(rep.X[pick], train.labels[pick], train.n_classes)
    lam = o.get("lambda")
    if lam is None:
        lam = _tune_lambda(rep, train, cfg, seed, o, per_class)
    den = build_denoiser(dictionary, lam)
    rest = np.setdiff1d(np.arange(train.n), pick)
    net_train = _balanced(train.subset(rest), cfg, seed + 1)
    Y = normalize(project(rep.projector, net_train.samples), "unitnorm", rep.stats)[0]
    kind = o.get("proxy", "ridge")
    raw = proxy(den if kind == "ridge" else dictionary, Y, kind)
    scale = float(raw.std()) or 1.0
    layout = make_layout(dictionary)
    planes = reshape_to_plane(raw / scale, layout)
    return CsenSetup(rep, dictionary, den, layout, lam, kind, scale, planes, net_train.labels)


def fit_csen(name, train, cfg, seed):
    o = cfg.opts(name)
    setup = prepare_csen(name, train, cfg, seed)
    net = CSEN_BUILDERS[name](setup.layout, seed)
    tc = TrainConfig(
        lr=o.get("lr", CSEN_DEFAULTS["lr"]), epochs=o.get("epochs", CSEN_DEFAULTS["epochs"]),
        batch_size=o.get("batch_size", CSEN_DEFAULTS["batch_size"]), seed=seed,
    )
    net, history = train_network(net, setup.planes, setup.labels, tc)

    def predict(S):
        return net.predict(setup.planes_for(S))

    info = {
        "lambda": setup.lam, "atoms": setup.dictionary.n,
        "plane": [setup.layout.height, setup.layout.width],
        "proxy_scale": setup.scale, "loss_history": history, "param_count": net.param_count,
    }
    if "tau" in o:
        info["tau"] = o["tau"]  # support threshold; classification itself uses the softmax
    comps = {
        "projector": setup.rep.projector, "stats": setup.rep.stats,
        "dictionary": setup.dictionary, "denoiser": setup.denoiser, "network": net,
    }
    return FittedMethod(name, predict, comps, info)


# ---------------------------------------------------------------------------
# baselines


def fit_mlp(name, train, cfg, seed):
    """Dense network on mean-centered raw features; its first layer starts as
    the PCA matrix so the initial first-layer pre-activation is the projection."""
    o = cfg.opts(name)
    m = cfg.pca_m or default_pca_m(train.d)
    p = fit_pca(train, m)
    bal = _balanced(train, cfg, seed)
    net = build_mlp(p, o.get("hidden"), train.n_classes, seed)
    tc = TrainConfig(
        lr=o.get("lr", MLP_DEFAULTS["lr"]), epochs=o.get("epochs", MLP_DEFAULTS["epochs"]),
        batch_size=o.get("batch_size", MLP_DEFAULTS["batch_size"]), seed=seed,
    )
    net, history = train_network(net, bal.samples - p.mean, bal.labels, tc)

    def predict(S):
        return net.predict(S - p.mean)

    info = {"loss_history": history, "param_count": net.param_count}
    return FittedMethod(name, predict, {"projector": p, "network": net}, info)


def fit_knn(name, train, cfg, seed):
    o = cfg.opts(name)
    rep = represent(train, cfg, seed, "zscore")
    C = train.n_classes
    if "k" in o and "metric" in o:
        k, metric = o["k"], o["metric"]
        table = None
    else:
        metrics = o.get("metrics") or ((o["metric"],) if "metric" in o else None)
        inner_k = o.get("inner_folds", 5)
        n_inner = train.n - int(np.ceil(train.n / inner_k))
        ks = (o["k"],) if "k" in o else knn_k_grid(n_inner, o.get("k_points", 7))
        grid = GridSpec(knn_k=ks, **({"knn_metrics": metrics} if metrics else {}))
        result = grid_search("knn", rep.X, rep.y, grid, inner_k, seed)
        (k, metric), table = result.best, result.table()
    if k > rep.y_bal.size:
        raise ConfigError(f"knn: k={k} exceeds the {rep.y_bal.size} training samples")

    def predict(S):
        return knn_predict(rep.X_bal, rep.y_bal, rep.transform(S), [k], metric, C)[k]

    info = {"k": int(k), "metric": metric, "grid_points": 0 if table is None else len(table)}
    return FittedMethod(name, predict, {"projector": rep.projector, "stats": rep.stats}, info)


def fit_svm(name, train, cfg, seed):
    o = cfg.opts(name)
    if train.n_classes != 2:
        raise ConfigError("svm supports two classes only")
    rep = represent(train, cfg, seed, "zscore")
    if "kernel" in o and "C" in o and ("param" in o or o["kernel"] == "linear"):
        default_param = {"linear": 0.0, "poly": 2.0, "rbf": 1.0}[o["kernel"]]
        point = (o["kernel"], o["C"], o.get("param", default_param))
    else:
        n = o.get("grid_points", 7)
        grid = GridSpec(
            svm_kernels=(o["kernel"],) if "kernel" in o else o.get("kernels", ("linear", "poly", "rbf")),
            svm_orders=o.get("orders", (2, 3, 4)),
            svm_gamma=log_grid(o.get("gamma_min", 1e-3), o.get("gamma_max", 1e3), n),
            svm_C=(o["C"],) if "C" in o else log_grid(o.get("c_min", 1e-3), o.get("c_max", 1e3), n),
        )
        point = grid_search("svm", rep.X, rep.y, grid, o.get("inner_folds", 5), seed).best
    kernel, C, param = point
    model = svm_train(rep.X_bal, rep.y_bal, kernel=kernel, C=C, param=param)

    def predict(S):
        return model.predict(rep.transform(S))

    info = {"kernel": kernel, "C": C, "param": param, "converged": model.converged,
            "support_vectors": int(model.alpha.size)}
    return FittedMethod(name, predict, {"projector": rep.projector, "stats": rep.stats}, info)


def fit_majority(name, train, cfg, seed):
    """Reference baseline: always the most frequent training class."""
    label = int(np.argmax(train.class_counts()))

    def predict(S):
        return np.full(S.shape[0], label, dtype=np.int64)

    return FittedMethod(name, predict, {}, {"label": label})


def fit_method(name, train, cfg, seed):
    if not isinstance(train, FeatureDataset):
        raise TypeError("train must be a FeatureDataset")
    if name.startswith("src-"):
        return fit_src(name, train, cfg, seed)
    if name == "crc":
        return fit_crc(name, train, cfg, seed)
    if name == "crc-light":
        return fit_crc(name, train, cfg, seed, light=True)
    if name in CSEN_BUILDERS:
        return fit_csen(name, train, cfg, seed)
    fitters = {"mlp": fit_mlp, "knn": fit_knn, "svm": fit_svm, "majority": fit_majority}
    if name not in fitters:
        raise ConfigError(f"unknown method {name!r}")
    return fitters[name](name, train, cfg, seed)
