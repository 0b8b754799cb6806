"""Plain-text run configuration.

One ``key = value`` per line, ``#`` starts a comment. Method options are
written ``<method>.<key>`` (e.g. ``crc.lambda = 0.01``) or ``method.<key>``,
which applies to the method(s) named by ``method``/``methods``. Every key is
checked against the methods it targets before anything is computed.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from .errors import ConfigError

METHODS = (
    "src-omp", "src-homotopy", "src-fista", "src-admm",
    "crc", "crc-light",
    "csen1", "csen2", "reconnet",
    "mlp", "knn", "svm",
)
REFERENCE_METHODS = ("majority",)


def _pos_float(v):
    x = float(v)
    if not x > 0:
        raise ValueError("must be positive")
    return x


def _pos_int(v):
    x = int(v)
    if x < 1:
        raise ValueError("must be a positive integer")
    return x


def _unit_interval(v):
    x = float(v)
    if not 0 < x < 1:
        raise ValueError("must lie in (0, 1)")
    return x


def _choice(*allowed):
    def parse(v):
        if v not in allowed:
            raise ValueError(f"must be one of {', '.join(allowed)}")
        return v
    return parse


def _list_of(item):
    def parse(v):
        values = tuple(item(s.strip()) for s in v.split(",") if s.strip())
        if not values:
            raise ValueError("must list at least one value")
        return values
    return parse


def _bool(v):
    low = v.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError("must be true or false")


_SOLVER_KEYS = {"lambda": _pos_float, "max_iter": _pos_int, "tol": _pos_float}
_RIDGE_KEYS = {"lambda": _pos_float, "lambda_min": _pos_float, "lambda_max": _pos_float}
_TRAIN_KEYS = {"lr": _pos_float, "epochs": _pos_int, "batch_size": _pos_int}
_CSEN_KEYS = {
    **_RIDGE_KEYS, **_TRAIN_KEYS,
    "per_class": _pos_int, "tau": _unit_interval, "proxy": _choice("ridge", "transpose"),
}

METHOD_KEYS = {
    "src-omp": {"sparsity": _pos_int},
    "src-homotopy": {"lambda": _pos_float},
    "src-fista": dict(_SOLVER_KEYS),
    "src-admm": {**_SOLVER_KEYS, "rho": _pos_float},
    "crc": dict(_RIDGE_KEYS),
    "crc-light": {**_RIDGE_KEYS, "per_class": _pos_int},
    "csen1": dict(_CSEN_KEYS),
    "csen2": dict(_CSEN_KEYS),
    "reconnet": dict(_CSEN_KEYS),
    "mlp": {**_TRAIN_KEYS, "hidden": _list_of(_pos_int)},
    "knn": {
        "k": _pos_int, "metric": str, "metrics": _list_of(str), "k_points": _pos_int,
        "inner_folds": _pos_int,
    },
    "svm": {
        "kernel": _choice("linear", "poly", "rbf"), "C": _pos_float, "param": _pos_float,
        "kernels": _list_of(_choice("linear", "poly", "rbf")), "orders": _list_of(_pos_int),
        "c_min": _pos_float, "c_max": _pos_float, "gamma_min": _pos_float, "gamma_max": _pos_float,
        "grid_points": _pos_int, "inner_folds": _pos_int,
    },
    "majority": {},
}

GLOBAL_KEYS = {
    "dataset": str,
    "format": _choice("csv", "binary"),
    "method": str,
    "methods": _list_of(str),
    "pca_m": _pos_int,
    "folds": _pos_int,
    "seed": int,
    "output": str,
    "threads": _pos_int,
    "positive_class": int,
    "balance": _bool,
    "jitter_sigma": float,
    "save_model": _bool,
    "report_timing": _bool,
}


@dataclass
class RunConfig:
    dataset: str
    methods: tuple
    format: str = None
    pca_m: int = None  # None: half the input dimension
    folds: int = 5
    seed: int = 0
    output: str = "run"
    threads: int = 1
    positive_class: int = 1
    balance: bool = True
    jitter_sigma: float = 0.01
    save_model: bool = False
    report_timing: bool = False
    options: dict = field(default_factory=dict)  # method -> {key: value}
    source: str = None

    @property
    def method(self):
        return self.methods[0]

    def opts(self, method):
        return self.options.get(method, {})

    def echo(self):
        """Canonical text form; parsing it yields an equal config."""
        lines = [f"dataset = {self.dataset}"]
        if self.format:
            lines.append(f"format = {self.format}")
        lines.append(f"methods = {', '.join(self.methods)}")
        if self.pca_m is not None:
            lines.append(f"pca_m = {self.pca_m}")
        for key in ("folds", "seed", "output", "threads", "positive_class", "balance",
                    "jitter_sigma", "save_model", "report_timing"):
            value = getattr(self, key)
            lines.append(f"{key} = {str(value).lower() if isinstance(value, bool) else value}")
        for method in self.methods:
            for key, value in sorted(self.opts(method).items()):
                if isinstance(value, tuple):
                    value = ", ".join(str(v) for v in value)
                lines.append(f"{method}.{key} = {value}")
        return "\n".join(lines) + "\n"


def _known_method(name, where):
    if name not in METHODS and name not in REFERENCE_METHODS:
        raise ConfigError(f"{where}: unknown method {name!r}")
    return name


def parse_config(text, source="<config>", base_dir=None):
    """Parse configuration text into a validated :class:`RunConfig`.

    Relative ``dataset``/``output`` paths stay relative to the working
    directory; ``base_dir`` is only recorded.
    """
    raw, method_raw = {}, []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"{where}: empty key or value")
        if "." in key:
            prefix, sub = key.split(".", 1)
            method_raw.append((prefix, sub, value, where))
            continue
        if key not in GLOBAL_KEYS:
            raise ConfigError(f"{where}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"{where}: duplicate key {key!r}")
        try:
            raw[key] = GLOBAL_KEYS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{where}: {key} {exc}") from None

    if "dataset" not in raw:
        raise ConfigError(f"{source}: missing required key 'dataset'")
    if "method" in raw and "methods" in raw:
        raise ConfigError(f"{source}: give either 'method' or 'methods', not both")
    methods = raw.pop("methods", None) or ((raw.pop("method"),) if "method" in raw else ())
    raw.pop("method", None)
    if not methods:
        raise ConfigError(f"{source}: no method given")
    for name in methods:
        _known_method(name, source)
    if len(set(methods)) != len(methods):
        raise ConfigError(f"{source}: method listed twice")

    options = {m: {} for m in methods}
    for prefix, sub, value, where in method_raw:
        targets = methods if prefix == "method" else (_known_method(prefix, where),)
        if prefix != "method" and prefix not in methods:
            raise ConfigError(f"{where}: options for {prefix!r}, which is not being run")
        for m in targets:
            parser = METHOD_KEYS[m].get(sub)
            if parser is None:
                raise ConfigError(f"{where}: key {sub!r} is not valid for method {m!r}")
            if sub in options[m]:
                raise ConfigError(f"{where}: duplicate key {m}.{sub}")
            try:
                options[m][sub] = parser(value)
            except ValueError as exc:
                raise ConfigError(f"{where}: {m}.{sub} {exc}") from None

    cfg = RunConfig(methods=tuple(methods), options=options, source=source, **raw)
    validate(cfg)
    return cfg


def validate(cfg):
    if cfg.folds < 2:
        raise ConfigError("folds must be at least 2")
    if cfg.jitter_sigma < 0:
        raise ConfigError("jitter_sigma must be non-negative")
    for m in cfg.methods:
        o = cfg.opts(m)
        lo, hi = o.get("lambda_min"), o.get("lambda_max")
        if lo is not None and hi is not None and lo > hi:
            raise ConfigError(f"{m}: lambda_min exceeds lambda_max")
        if m == "knn" and "metrics" in o and "metric" in o:
            raise ConfigError("knn: give either metric or metrics")
        if m == "knn":
            from .baselines import METRICS

            for name in o.get("metrics", ()) + ((o["metric"],) if "metric" in o else ()):
                if name not in METRICS:
                    raise ConfigError(f"knn: unknown metric {name!r}")
        if m == "svm":
            for a, b in (("c_min", "c_max"), ("gamma_min", "gamma_max")):
                if a in o and b in o and o[a] > o[b]:
                    raise ConfigError(f"svm: {a} exceeds {b}")
            if o.get("kernel") == "poly" and "param" in o and o["param"] != int(o["param"]):
                raise ConfigError("svm: polynomial order must be an integer")
            if ("C" in o or "param" in o) and "kernel" not in o:
                raise ConfigError("svm: fixed C/param need a fixed kernel")
    return cfg


def load_config(path):
    path = os.fspath(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise ConfigError(f"config {path} is not valid UTF-8") from None
    return parse_config(text, source=path)
