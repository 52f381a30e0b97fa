"""YAML run configuration with fail-fast validation.

A config file is a mapping.  Recognized top-level keys::

    presets:        overrides for the built-in presets (weights, eps, experiment)
    topology:       {family, n, params, seed} or a list of them (gaps table)
    weights:        preset name, literal list, {file: path}, or "uniform"
    weights_table:  list of weight ids for the gaps table
    eps, strategy, alpha, T, sigma, d, reg, mu0, zeta_range,
    record_every, seeds, init, dbar, K, alpha_fraction, run_simulation

``alpha`` is a number or a mapping from family name to step size with an
optional ``default`` entry.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import yaml

from .bounds import Strategy
from .errors import ConfigError, WeightedGTError
from .topology import Family, TopologySpec
from .weights_graph import WeightVector, make_weights, read_weights, uniform_weights

__all__ = ["PRESETS", "RunConfig", "TopologyEntry", "load_config", "parse_config", "resolve_weights"]

LAMBDA_A = [0.3, 0.8, 1.0, 0.9, 0.7, 1.0, 2.0, 2.2, 1.2, 1.4, 0.8, 0.5, 1.5, 0.6, 0.6, 0.5]
LAMBDA_B = [0.4, 2.3, 1.2, 0.5, 1.0, 0.6, 1.5, 0.8, 1.1, 0.7, 1.8, 0.9, 1.4, 0.6, 1.2, 1.0]

PRESETS: dict[str, Any] = {
    "weights": {"lambda_A": LAMBDA_A, "lambda_B": LAMBDA_B},
    "eps": 0.3,
    "experiment": {
        "n": 16,
        "d": 10,
        "T": 240,
        "record_every": 3,
        "sigma": 1.0,
        "reg": 0.01,
        "mu0": 3.0,
        "zeta_range": [5.5, 12.5],
        "seeds": list(range(10)),
        "alpha": {"ring": 0.09, "default": 0.12},
    },
}

_FAMILY_ALIASES = {
    "ring": Family.RING,
    "grid": Family.GRID,
    "exp": Family.STATIC_EXPONENTIAL,
    "exponential": Family.STATIC_EXPONENTIAL,
    "static_exponential": Family.STATIC_EXPONENTIAL,
    "er": Family.ERDOS_RENYI,
    "erdos_renyi": Family.ERDOS_RENYI,
    "rgg": Family.RANDOM_GEOMETRIC,
    "random_geometric": Family.RANDOM_GEOMETRIC,
    "from_weights": Family.FROM_WEIGHTS,
    "custom": Family.FROM_WEIGHTS,
}

_KNOWN_KEYS = {
    "presets", "topology", "weights", "weights_table", "eps", "strategy", "alpha", "T",
    "sigma", "d", "reg", "mu0", "zeta_range", "record_every", "seeds", "init", "dbar",
    "K", "alpha_fraction", "run_simulation", "out",
}


@dataclass(frozen=True)
class TopologyEntry:
    """A topology spec plus the label used in output files."""

    name: str
    spec: TopologySpec
    weights_id: str | None = None


@dataclass(frozen=True)
class RunConfig:
    topologies: tuple
    weights: WeightVector
    weights_id: str
    weights_table: tuple
    eps: float
    strategies: tuple
    alpha: dict
    T: int
    sigma: float
    d: int
    reg: float
    mu0: float
    zeta_range: tuple
    record_every: int
    seeds: tuple
    init: str
    dbar: float
    K: int
    alpha_fraction: float | None
    run_simulation: bool
    out: str | None
    presets: dict = field(repr=False)
    raw: dict = field(repr=False)

    @property
    def n(self) -> int:
        return self.weights.n

    @property
    def topology(self) -> TopologyEntry:
        return self.topologies[0]

    def alpha_for(self, family: Family) -> float:
        key = family.value
        if key in self.alpha:
            return float(self.alpha[key])
        if "default" in self.alpha:
            return float(self.alpha["default"])
        raise ConfigError(f"no step size configured for topology {key!r}")

    def weight_vector(self, weights_id: str) -> WeightVector:
        return resolve_weights(weights_id, self.presets, self.n)

    def with_seeds(self, seeds) -> "RunConfig":
        return replace(self, seeds=tuple(int(s) for s in seeds))


def resolve_weights(source, presets: dict, n: int | None = None, base_dir: Path | None = None) -> WeightVector:
    """Turn a weights entry into a :class:`WeightVector`."""
    try:
        if isinstance(source, WeightVector):
            return source
        if isinstance(source, str):
            if source in ("uniform", "ones", "ds"):
                if n is None:
                    raise ConfigError("uniform weights need a node count")
                return uniform_weights(n)
            table = presets.get("weights", {})
            if source not in table:
                raise ConfigError(f"unknown weight preset {source!r}; known: {sorted(table)}")
            return make_weights(table[source])
        if isinstance(source, dict) and "file" in source:
            path = Path(source["file"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            return read_weights(path)
        if isinstance(source, (list, tuple)):
            return make_weights([float(x) for x in source])
    except ConfigError:
        raise
    except (WeightedGTError, ValueError, OSError) as exc:
        raise ConfigError(f"bad weights {source!r}: {exc}") from exc
    raise ConfigError(f"cannot interpret weights entry {source!r}")


def _weights_label(source) -> str:
    if isinstance(source, str):
        return source
    if isinstance(source, dict) and "file" in source:
        return Path(str(source["file"])).stem
    return "custom"


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in (override or {}).items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def _topology_entry(raw: Any, n: int, presets: dict, base_dir: Path | None) -> TopologyEntry:
    if isinstance(raw, str):
        raw = {"family": raw}
    if not isinstance(raw, dict) or "family" not in raw:
        raise ConfigError(f"topology entry needs a 'family': {raw!r}")
    fam_key = str(raw["family"]).lower()
    if fam_key not in _FAMILY_ALIASES:
        raise ConfigError(f"unknown topology family {raw['family']!r}")
    family = _FAMILY_ALIASES[fam_key]
    params = dict(raw.get("params", {}))
    for key in ("rows", "cols", "periodic", "p", "r", "dbar", "K", "weights"):
        if key in raw:
            params[key] = raw[key]
    node_count = int(raw.get("n", n))
    weights_id = None
    if family is Family.GRID and "rows" not in params:
        side = int(round(node_count**0.5))
        params.setdefault("rows", side)
        params.setdefault("cols", node_count // max(side, 1))
    if family is Family.FROM_WEIGHTS:
        src = params.get("weights", "lambda_A")
        weights_id = _weights_label(src)
        params["weights"] = resolve_weights(src, presets, node_count, base_dir)
        params.setdefault("dbar", 6)
    name = str(raw.get("name", family.value if weights_id is None else f"G_{weights_id}"))
    try:
        spec = TopologySpec(family, node_count, params, int(raw.get("seed", 0)))
    except (WeightedGTError, ValueError, TypeError) as exc:
        raise ConfigError(f"invalid topology {name!r}: {exc}") from exc
    return TopologyEntry(name, spec, weights_id)


def parse_config(data: dict | None, base_dir: Path | None = None) -> RunConfig:
    """Validate a config mapping and resolve every reference in it."""
    data = dict(data or {})
    unknown = set(data) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    presets = _merge(PRESETS, data.get("presets", {}))
    exp = presets["experiment"]

    def get(key: str, default=None):
        if key in data:
            return data[key]
        return exp.get(key, default)

    weights_src = data.get("weights", "lambda_A")
    n_hint = int(exp.get("n", 16))
    weights = resolve_weights(weights_src, presets, n_hint, base_dir)
    n = weights.n

    topo_raw = data.get("topology", {"family": "ring"})
    topo_list = topo_raw if isinstance(topo_raw, list) else [topo_raw]
    topologies = tuple(_topology_entry(t, n, presets, base_dir) for t in topo_list)
    for t in topologies:
        if t.spec.n != n:
            raise ConfigError(f"topology {t.name!r} has n={t.spec.n} but weights have n={n}")

    table = data.get("weights_table", [weights_src if isinstance(weights_src, str) else "custom"])
    for wid in table:
        if wid != "custom":
            resolve_weights(wid, presets, n, base_dir)

    eps = float(data.get("eps", presets.get("eps", 0.3)))
    if not 0.0 < eps < 1.0:
        raise ConfigError(f"eps must lie in (0, 1), got {eps}")

    strat = str(data.get("strategy", "both"))
    try:
        strategies = (Strategy.I, Strategy.II) if strat.lower() == "both" else (Strategy.parse(strat),)
    except ValueError as exc:
        raise ConfigError(f"unknown strategy {strat!r}") from exc

    alpha = get("alpha", {"default": 0.12})
    alpha = {"default": alpha} if isinstance(alpha, (int, float)) else dict(alpha)
    for k, v in alpha.items():
        if not isinstance(v, (int, float)) or v <= 0:
            raise ConfigError(f"alpha[{k!r}] must be a positive number, got {v!r}")
    norm_alpha = {}
    for k, v in alpha.items():
        key = k if k == "default" else _FAMILY_ALIASES.get(str(k).lower(), None)
        if key is None:
            raise ConfigError(f"alpha given for unknown topology {k!r}")
        norm_alpha[key if key == "default" else key.value] = float(v)

    T = int(get("T", 240))
    record_every = int(get("record_every", 3))
    sigma = float(get("sigma", 1.0))
    d = int(get("d", 10))
    reg = float(get("reg", 0.01))
    mu0 = float(get("mu0", 3.0))
    zr = tuple(float(z) for z in get("zeta_range", [5.5, 12.5]))
    seeds = tuple(int(s) for s in get("seeds", [0]))
    init = str(data.get("init", "shared"))
    dbar = float(data.get("dbar", 6))
    K = int(data.get("K", 50))
    frac = data.get("alpha_fraction")
    checks = [
        (T >= 0, f"T must be >= 0, got {T}"),
        (record_every >= 1, "record_every must be >= 1"),
        (sigma >= 0, "sigma must be >= 0"),
        (d >= 1, "d must be >= 1"),
        (reg >= 0, "reg must be >= 0"),
        (mu0 >= 0, "mu0 must be >= 0"),
        (len(zr) == 2 and 0 < zr[0] <= zr[1], f"bad zeta_range {zr}"),
        (len(seeds) >= 1 and min(seeds) >= 0, "seeds must be a non-empty list of non-negative ints"),
        (init in ("shared", "independent"), f"init must be shared or independent, got {init!r}"),
        (1 <= dbar <= n - 1, f"dbar must lie in [1, {n - 1}]"),
        (K >= 1, "K must be >= 1"),
        (frac is None or 0 < float(frac) < 1, "alpha_fraction must lie in (0, 1)"),
    ]
    for ok, msg in checks:
        if not ok:
            raise ConfigError(msg)

    return RunConfig(
        topologies=topologies,
        weights=weights,
        weights_id=_weights_label(weights_src),
        weights_table=tuple(table),
        eps=eps,
        strategies=strategies,
        alpha=norm_alpha,
        T=T,
        sigma=sigma,
        d=d,
        reg=reg,
        mu0=mu0,
        zeta_range=zr,
        record_every=record_every,
        seeds=seeds,
        init=init,
        dbar=dbar,
        K=K,
        alpha_fraction=None if frac is None else float(frac),
        run_simulation=bool(data.get("run_simulation", False)),
        out=data.get("out"),
        presets=presets,
        raw=data,
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if data is not None and not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return parse_config(data, base_dir=path.parent)
