"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 graph error, 4 numerical
failure.  Node indices in every output file are 1-based.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .bounds import (
    BoundInputs,
    C_constants,
    Strategy,
    consensus_bound,
    euclidean_rate_bound,
    rate_bound,
    step_size_max,
)
from .config import RunConfig, TopologyEntry, load_config, parse_config
from .errors import (
    ConfigError,
    Disconnected,
    EigensolverFailure,
    GraphicalityFailure,
    InfeasibleAverageDegree,
    NonFinite,
    StepTooLarge,
    WeightedGTError,
)
from .gt_sim import SimulationConfig, multi_seed, run
from .mixing import doubly_stochastic, metropolis
from .spectral import compare
from .topology import Family, build_topology, realize_weights
from .weights_graph import Graph, WeightVector, write_edgelist

log = logging.getLogger("weighted_gt")

EXIT_OK, EXIT_CONFIG, EXIT_GRAPH, EXIT_NUMERIC = 0, 2, 3, 4

GAPS_COLUMNS = ("topology", "weights_id", "kind", "rho", "gap", "kappa", "R", "theorem2_holds", "corollary_holds")


def _graph_for(entry: TopologyEntry) -> Graph:
    g = build_topology(entry.spec)
    if not g.connected:
        raise Disconnected(f"topology {entry.name!r} is disconnected")
    return g


def _json_params(entry: TopologyEntry) -> dict:
    out = {}
    for k, v in entry.spec.params.items():
        out[k] = v.values.tolist() if isinstance(v, WeightVector) else v
    return out


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# -- gaps -------------------------------------------------------------------

def gaps_rows(cfg: RunConfig) -> list[dict]:
    rows = []
    for entry in cfg.topologies:
        g = _graph_for(entry)
        for wid in cfg.weights_table:
            lam = cfg.weights if wid == "custom" else cfg.weight_vector(wid)
            rep = compare(g, lam, cfg.eps)
            # uniform weights reduce W(lam) to W^ds, so report it as such
            spec = rep.uniform if lam.is_uniform else rep.weighted
            rows.append({
                "topology": entry.name,
                "weights_id": wid,
                "kind": spec.kind.value,
                "rho": spec.rho,
                "gap": spec.gap,
                "kappa": lam.kappa,
                "R": rep.R,
                "theorem2_holds": rep.theorem2_holds,
                "corollary_holds": rep.corollary_holds,
            })
    return rows


def cmd_gaps(cfg: RunConfig, out: Path, args) -> int:
    rows = gaps_rows(cfg)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "gaps.csv"
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=GAPS_COLUMNS)
        w.writeheader()
        for r in rows:
            w.writerow({k: (f"{v:.17g}" if isinstance(v, float) else v) for k, v in r.items()})
    for r in rows:
        print(f"{r['topology']:>14} {r['weights_id']:>10} {r['kind']:>20} gap={r['gap']:.4f}")
    return EXIT_OK


# -- build-graph ------------------------------------------------------------

def cmd_build_graph(cfg: RunConfig, out: Path, args) -> int:
    entry = cfg.topology
    sidecar = {
        "family": entry.spec.family.value,
        "params": _json_params(entry),
        "seed": entry.spec.seed,
        "n": entry.spec.n,
    }
    if entry.spec.family is Family.FROM_WEIGHTS:
        p = entry.spec.params
        res = realize_weights(p["weights"], float(p["dbar"]), int(p.get("K", cfg.K)), entry.spec.seed)
        g = res.graph
        sidecar.update(target_degrees=list(res.target.degrees), exact=res.exact,
                       fallback=res.used_fallback, trials=res.trials)
    else:
        g = build_topology(entry.spec)
    sidecar.update(degrees=[int(x) for x in g.degrees], connected=g.connected, num_edges=g.num_edges)
    out.mkdir(parents=True, exist_ok=True)
    write_edgelist(g, out / "graph.edges")
    _write_json(out / "graph.json", sidecar)
    print(f"{entry.name}: {g.num_edges} edges, connected={g.connected}")
    return EXIT_OK


# -- simulate / compare -----------------------------------------------------

def _sim_config(cfg: RunConfig, g: Graph, family: Family, strategy: Strategy, alpha: float) -> SimulationConfig:
    return SimulationConfig(
        graph=g, weights=cfg.weights, strategy=strategy, alpha=alpha, T=cfg.T,
        record_every=cfg.record_every, eps=cfg.eps, d=cfg.d, zeta_range=cfg.zeta_range,
        mu0=cfg.mu0, reg=cfg.reg, sigma=cfg.sigma, init=cfg.init,
    )


def _strategy_rho(strategy: Strategy, rep) -> float:
    return rep.uniform.rho if strategy is Strategy.I else rep.weighted.rho


def _derived(cfg: RunConfig, g: Graph, family: Family) -> dict:
    """Constants shared by the manifest, compare and bounds outputs."""
    rep = compare(g, cfg.weights, cfg.eps)
    lam = cfg.weights
    problem = SimulationConfig(g, lam, Strategy.II, 1.0, d=cfg.d, zeta_range=cfg.zeta_range,
                               mu0=cfg.mu0, reg=cfg.reg, sigma=cfg.sigma).problem(cfg.seeds[0])
    info = {
        "beta": problem.beta,
        "upsilon2": problem.upsilon2,
        "rho_lambda": rep.rho_lambda,
        "rho_J": rep.rho_J,
        "gap_lambda": rep.weighted.gap,
        "gap_J": rep.uniform.gap,
        "kappa": lam.kappa,
        "c_lambda": lam.c_lambda,
        "lambda_max": lam.lambda_max,
        "R": rep.R,
        "theorem2_holds": rep.theorem2_holds,
        "corollary_holds": rep.corollary_holds,
        "uniform_weights": rep.uniform_weights,
        "alpha_max": {},
    }
    for s in Strategy:
        rho = _strategy_rho(s, rep)
        info["alpha_max"][s.value] = {
            "theorem": step_size_max(s, problem.beta, rho, lam.lambda_max, "theorem"),
            "proposition": step_size_max(s, problem.beta, rho, lam.lambda_max, "proposition"),
        }
    return info


def _alpha(cfg: RunConfig, family: Family, info: dict, strategy: Strategy) -> float:
    if cfg.alpha_fraction is not None:
        return cfg.alpha_fraction * info["alpha_max"][strategy.value]["theorem"]
    return cfg.alpha_for(family)


def _c_constants(strategy: Strategy, cfg: RunConfig, info: dict, alpha: float) -> dict:
    x = BoundInputs(info["beta"], info["upsilon2"], alpha, max(cfg.T, 1), cfg.n,
                    info["rho_J"] if strategy is Strategy.I else info["rho_lambda"],
                    info["c_lambda"], info["kappa"], info["lambda_max"])
    try:
        c1, c2 = C_constants(strategy, x)
        return {"C1": c1, "C2": c2}
    except StepTooLarge as exc:
        return {"C1": None, "C2": None, "note": str(exc)}


def cmd_simulate(cfg: RunConfig, out: Path, args) -> int:
    manifest = {"config": _jsonable(cfg.raw), "seeds": list(cfg.seeds), "runs": []}
    for entry in cfg.topologies:
        g = _graph_for(entry)
        family = entry.spec.family
        info = _derived(cfg, g, family)
        for s in cfg.strategies:
            alpha = _alpha(cfg, family, info, s)
            sub = out / entry.name / f"strategy_{s.value}"
            try:
                res = multi_seed(_sim_config(cfg, g, family, s, alpha), cfg.seeds, out_dir=sub, jobs=args.jobs)
            except NonFinite as exc:
                print(
                    f"error: {exc}; alpha={alpha:g} vs alpha_max={info['alpha_max'][s.value]['theorem']:.4g}",
                    file=sys.stderr,
                )
                return EXIT_NUMERIC
            manifest["runs"].append({
                "topology": entry.name,
                "strategy": s.value,
                "alpha": alpha,
                "dir": str(sub.relative_to(out)),
                "final_weighted_grad_norm": res.final("weighted_grad_norm"),
                "final_dist_to_opt": res.final("dist_to_opt"),
                "constants": _c_constants(s, cfg, info, alpha),
            })
            print(f"{entry.name} strategy {s.value}: final weighted grad norm {res.final('weighted_grad_norm'):.6g}")
        manifest.setdefault("derived", {})[entry.name] = info
    manifest["timestamp"] = datetime.now(timezone.utc).isoformat()
    _write_json(out / "manifest.json", manifest)
    return EXIT_OK


def cmd_compare(cfg: RunConfig, out: Path, args) -> int:
    verdicts = []
    for entry in cfg.topologies:
        g = _graph_for(entry)
        family = entry.spec.family
        info = _derived(cfg, g, family)
        verdict = {"topology": entry.name, **info}
        if cfg.run_simulation:
            finals = {}
            for s in (Strategy.I, Strategy.II):
                alpha = _alpha(cfg, family, info, s)
                try:
                    res = multi_seed(_sim_config(cfg, g, family, s, alpha), cfg.seeds, jobs=args.jobs)
                except NonFinite as exc:
                    print(f"error: {exc}", file=sys.stderr)
                    return EXIT_NUMERIC
                finals[s.value] = res.final("weighted_grad_norm")
            verdict["final_weighted_grad_norm"] = finals
            verdict["ratio_II_over_I"] = finals["II"] / finals["I"] if finals["I"] else None
        verdicts.append(verdict)
        print(f"{entry.name}: theorem2_holds={info['theorem2_holds']} corollary_holds={info['corollary_holds']}")
    _write_json(out / "compare.json", verdicts)
    return EXIT_OK


# -- bounds -----------------------------------------------------------------

def cmd_bounds(cfg: RunConfig, out: Path, args) -> int:
    results = []
    for entry in cfg.topologies:
        g = _graph_for(entry)
        family = entry.spec.family
        info = _derived(cfg, g, family)
        W, D = metropolis(g, cfg.weights, cfg.eps), doubly_stochastic(g, cfg.eps)
        sim = _sim_config(cfg, g, family, Strategy.II, 1.0)
        problem = sim.problem(cfg.seeds[0])
        for s in cfg.strategies:
            alpha = _alpha(cfg, family, info, s)
            start = run(problem, cfg.weights, s, W, D, alpha, 0, s0=cfg.seeds[0], init=cfg.init)
            rho = info["rho_J"] if s is Strategy.I else info["rho_lambda"]
            x = BoundInputs(problem.beta, problem.upsilon2, alpha, max(cfg.T, 1), cfg.n, rho,
                            info["c_lambda"], info["kappa"], info["lambda_max"],
                            start.F0_gap, start.E0_norm2)
            c1, c2 = C_constants(s, x)
            results.append({
                "topology": entry.name,
                "strategy": s.value,
                "inputs": x.as_dict(),
                "C1": c1,
                "C2": c2,
                "alpha_max": info["alpha_max"][s.value]["theorem"],
                "rate_bound": rate_bound(s, x),
                "euclidean_bound": euclidean_rate_bound(x) if s is Strategy.I else None,
                "consensus_bound_without_gradients": consensus_bound(s, x, 0.0),
            })
    _write_json(out / "bounds.json", results if len(results) != 1 else results[0])
    for r in results:
        print(f"{r['topology']} strategy {r['strategy']}: rate bound {r['rate_bound']:.6g}")
    return EXIT_OK


def _jsonable(obj):
    return json.loads(json.dumps(obj, default=str))


HELP = {
    "gaps": "spectral gaps of W(lam) and W^ds for every topology and weight vector",
    "build-graph": "build one topology and write an edge list plus a JSON sidecar",
    "simulate": "run gradient tracking over all seeds and write trajectory CSVs",
    "compare": "check the gap comparison conditions, optionally running both strategies",
    "bounds": "evaluate step-size limits, constants and rate bounds",
}

COMMANDS = {
    "gaps": cmd_gaps,
    "build-graph": cmd_build_graph,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "bounds": cmd_bounds,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML run configuration")
    common.add_argument("--out", type=Path, help="output directory (default: config 'out' or ./out)")
    common.add_argument("--seed", type=int, help="run a single seed; also seeds random topologies")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for seed-level parallelism")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="weighted-gt",
        description="Weighted gradient tracking: topologies, spectra, bounds and simulations.",
        parents=[common],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, help=HELP[name], parents=[common])
    return parser


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if args.seed is None:
        return cfg
    topologies = tuple(
        TopologyEntry(t.name, type(t.spec)(t.spec.family, t.spec.n, t.spec.params, args.seed), t.weights_id)
        for t in cfg.topologies
    )
    return replace(cfg, seeds=(args.seed,), topologies=topologies)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config) if args.config else parse_config({})
        cfg = _apply_overrides(cfg, args)
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out or Path(cfg.out or "out")
    log.debug("%s: %d topologies, seeds %s, out=%s", args.command, len(cfg.topologies), list(cfg.seeds), out)
    try:
        return COMMANDS[args.command](cfg, out, args)
    except (ConfigError, InfeasibleAverageDegree) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (Disconnected, GraphicalityFailure) as exc:
        print(f"graph error: {exc}", file=sys.stderr)
        return EXIT_GRAPH
    except (NonFinite, StepTooLarge, EigensolverFailure) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except WeightedGTError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
