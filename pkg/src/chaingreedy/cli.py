"""Command line front end.

Verbs:
  alpha      expected-gap constant and clique-number pmf per engine
  reinforce  extra-trial sweep and greedy budget allocation
  simulate   Monte Carlo coverage benchmark per chain permutation
  enumerate  every outcome mask with probability and clique number
  solve      one greedy run on a coverage instance under a given mask

All verbs read an experiment config (JSON) and share a small set of override
flags. Exit codes: 0 success, 2 configuration problems, 3 enumeration over
its cap. CSV output is byte-stable for a fixed config and seed: floats are
written with repr so rewrites reproduce identical files.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass

from .chainprob import (
    DEFAULT_ENUMERATION_CAP,
    ENGINES,
    ChainSpec,
    clique_distribution,
    expected_gap,
    iter_outcomes,
)
from .coverage import (
    CoverageInstance,
    CoverageOracle,
    best_known_optimum,
    format_order,
    generate_instance,
    load_instance,
    monte_carlo,
    normalize_order,
    run_chain_greedy,
)
from .errors import ConfigError, EnumerationCapError
from .reinforce import greedy_multi_reinforcement, sweep_single_reinforcement

_GENERATE_KEYS = {
    "n",
    "num_locations",
    "locations_per_agent",
    "num_points",
    "kappa",
    "radius_range",
    "area",
    "seed",
}


@dataclass
class ExperimentConfig:
    """Everything a verb may need, already validated and override-merged."""

    chain: ChainSpec | None
    instance: CoverageInstance | None
    permutations: tuple
    iterations: int
    engine: str
    seed: int
    enumeration_cap: int
    budget: int
    restarts: int
    mask: tuple[int, ...] | None
    csv_path: str | None


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    return data


def _chain_from(data: dict) -> ChainSpec | None:
    cfg = data.get("chain")
    if cfg is None:
        return None
    if not isinstance(cfg, dict):
        raise ConfigError("chain: must be an object")
    if "base_probs" not in cfg:
        raise ConfigError("chain.base_probs: required")
    base_probs = cfg["base_probs"]
    if not isinstance(base_probs, (list, tuple)):
        raise ConfigError("chain.base_probs: must be a list")
    n = cfg.get("n", len(base_probs) + 1)
    trials = cfg.get("trials", [])
    try:
        return ChainSpec(int(n), tuple(base_probs), tuple(trials))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"chain: {exc}") from None


def _instance_from(data: dict) -> CoverageInstance | None:
    cfg = data.get("instance")
    if cfg is None:
        return None
    if not isinstance(cfg, dict):
        raise ConfigError("instance: must be an object")
    if "path" in cfg and "generate" in cfg:
        raise ConfigError("instance: give either 'path' or 'generate', not both")
    if "path" in cfg:
        try:
            return load_instance(cfg["path"])
        except FileNotFoundError:
            raise ConfigError(f"instance.path: file not found: {cfg['path']}") from None
        except (ValueError, json.JSONDecodeError) as exc:
            raise ConfigError(f"instance.path: {exc}") from None
    if "generate" in cfg:
        params = cfg["generate"]
        if not isinstance(params, dict):
            raise ConfigError("instance.generate: must be an object")
        unknown = set(params) - _GENERATE_KEYS
        if unknown:
            raise ConfigError(
                f"instance.generate: unknown keys {sorted(unknown)}; "
                f"allowed: {sorted(_GENERATE_KEYS)}"
            )
        kwargs = dict(params)
        for key in ("radius_range", "area"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        try:
            return generate_instance(**kwargs)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"instance.generate: {exc}") from None
    raise ConfigError("instance: needs 'path' or 'generate'")


def _mask_bits(raw) -> tuple[int, ...]:
    if isinstance(raw, str):
        raw = list(raw.strip())
    try:
        bits = tuple(int(b) for b in raw)
    except (TypeError, ValueError):
        raise ConfigError(f"mask: cannot parse {raw!r}") from None
    if any(b not in (0, 1) for b in bits):
        raise ConfigError(f"mask: bits must be 0 or 1, got {raw!r}")
    return bits


def _positive_int(data: dict, key: str, default: int) -> int:
    value = data.get(key, default)
    try:
        value = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: must be an integer, got {data.get(key)!r}") from None
    if value < 1:
        raise ConfigError(f"{key}: must be >= 1, got {value}")
    return value


def _override_positive(flag_value, data: dict, key: str, default: int) -> int:
    """Flag wins over the config value; both must be >= 1."""
    if flag_value is None:
        return _positive_int(data, key, default)
    value = int(flag_value)
    if value < 1:
        raise ConfigError(f"{key}: must be >= 1, got {value}")
    return value


def _build_config(args) -> ExperimentConfig:
    data = _load_json(args.config)
    engine = args.engine or data.get("engine", "dp")
    if engine not in ENGINES:
        raise ConfigError(f"engine: {engine!r} not one of {ENGINES}")
    seed = args.seed if args.seed is not None else data.get("seed", 0)
    try:
        seed = int(seed)
    except (TypeError, ValueError):
        raise ConfigError(f"seed: must be an integer, got {seed!r}") from None
    iterations = (
        args.iterations
        if args.iterations is not None
        else _positive_int(data, "iterations", 10_000)
    )
    if iterations < 1:
        raise ConfigError(f"iterations: must be >= 1, got {iterations}")
    permutations = args.permutation or data.get("permutations", [])
    if not isinstance(permutations, (list, tuple)):
        raise ConfigError("permutations: must be a list")
    mask = getattr(args, "mask", None)
    if mask is None:
        mask = data.get("mask")
    return ExperimentConfig(
        chain=_chain_from(data),
        instance=_instance_from(data),
        permutations=tuple(permutations),
        iterations=iterations,
        engine=engine,
        seed=seed,
        enumeration_cap=_override_positive(
            args.enumeration_cap, data, "enumeration_cap", DEFAULT_ENUMERATION_CAP
        ),
        budget=_override_positive(args.budget, data, "budget", 1),
        restarts=_positive_int(data, "restarts", 200),
        mask=_mask_bits(mask) if mask is not None else None,
        csv_path=args.csv or data.get("csv"),
    )


def _require_chain(cfg: ExperimentConfig) -> ChainSpec:
    if cfg.chain is None:
        raise ConfigError("chain: this command needs a 'chain' section in the config")
    return cfg.chain


def _require_instance(cfg: ExperimentConfig) -> CoverageInstance:
    if cfg.instance is None:
        raise ConfigError(
            "instance: this command needs an 'instance' section in the config"
        )
    return cfg.instance


def _orders(cfg: ExperimentConfig, n: int):
    """Normalized permutations from the config; identity when none given."""
    if not cfg.permutations:
        return (tuple(range(1, n + 1)),)
    try:
        return tuple(normalize_order(p, n) for p in cfg.permutations)
    except ValueError as exc:
        raise ConfigError(f"permutations: {exc}") from None


def _cell(value) -> str:
    # repr keeps the full float so identical runs rewrite identical bytes.
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def cmd_alpha(args) -> int:
    cfg = _build_config(args)
    chain = _require_chain(cfg)
    dists = {"dp": clique_distribution(chain, "dp")}
    dists["paper"] = clique_distribution(chain, "paper")
    if chain.num_edges <= cfg.enumeration_cap:
        dists["enumerate"] = clique_distribution(
            chain, "enumerate", cap=cfg.enumeration_cap
        )
    if cfg.engine not in dists:
        # Only possible for an explicit enumerate request over the cap.
        dists[cfg.engine] = clique_distribution(
            chain, cfg.engine, cap=cfg.enumeration_cap
        )
    selected = dists[cfg.engine]

    print(f"chain: n={chain.n} effective_probs={[round(q, 6) for q in chain.effective_probs()]}")
    print(f"pmf of the clique number ({cfg.engine} engine):")
    print("  l  P(W=l)       weight 1/(2+n-l)")
    for l, p in enumerate(selected.pmf, start=1):
        print(f"  {l:<2d} {p:<12.6g} {1.0 / (2 + chain.n - l):.6g}")
    print("expected gap per engine (deviation = max |pmf - pmf_dp|):")
    for name in ("dp", "paper", "enumerate"):
        if name not in dists:
            print(f"  {name:<10s} skipped (over enumeration cap)")
            continue
        dist = dists[name]
        dev = max(
            abs(a - b) for a, b in zip(dist.pmf, dists["dp"].pmf)
        )
        print(f"  {name:<10s} alpha={dist.expected_gap():.10g}  deviation={dev:.3g}")

    if cfg.csv_path:
        rows = []
        for name in sorted(dists):
            for l, p in enumerate(dists[name].pmf, start=1):
                rows.append(
                    ("alpha/1", name, chain.n, l, p, 1.0 / (2 + chain.n - l))
                )
        _write_csv(
            cfg.csv_path, ["schema", "engine", "n", "l", "prob", "weight"], rows
        )
        print(f"wrote {cfg.csv_path}")
    return 0


def cmd_enumerate(args) -> int:
    cfg = _build_config(args)
    chain = _require_chain(cfg)
    rows = []
    total = 0.0
    alpha = 0.0
    for mask, prob, clique in iter_outcomes(chain, cap=cfg.enumeration_cap):
        rows.append(("".join(str(b) for b in mask.bits), prob, clique))
        total += prob
        alpha += prob / (2 + chain.n - clique)
    print(f"chain: n={chain.n} masks={len(rows)}")
    print("  mask" + " " * max(1, chain.num_edges - 3) + " probability   W")
    for mask_str, prob, clique in rows:
        print(f"  {mask_str or '-':<{max(4, chain.num_edges)}s} {prob:<12.6g} {clique}")
    print(f"total probability: {total:.12g}")
    print(f"alpha from enumeration: {alpha:.10g}")
    if cfg.csv_path:
        csv_rows = [
            ("enumerate/1", mask_str, prob, clique)
            for mask_str, prob, clique in rows
        ]
        _write_csv(cfg.csv_path, ["schema", "mask", "prob", "clique"], csv_rows)
        print(f"wrote {cfg.csv_path}")
    return 0


def cmd_reinforce(args) -> int:
    cfg = _build_config(args)
    chain = _require_chain(cfg)
    report = sweep_single_reinforcement(chain, engine=cfg.engine)
    print(f"baseline alpha: {report.baseline_gap:.10g}")
    print("one extra trial per edge:")
    for edge, gap in enumerate(report.per_edge_gap, start=1):
        star = " *" if edge == report.best_edge else ""
        print(f"  edge {edge}: alpha={gap:.10g}{star}")
    print(f"best edge: {report.best_edge} (alpha {report.best_gap:.10g})")

    plan = None
    if cfg.budget > 1:
        plan = greedy_multi_reinforcement(chain, cfg.budget, engine=cfg.engine)
        print(f"greedy allocation of {cfg.budget} extra trials:")
        for round_idx, (edge, gap) in enumerate(plan.rounds, start=1):
            print(f"  round {round_idx}: edge {edge} -> alpha={gap:.10g}")
        alloc = ", ".join(f"edge {e}: +{c}" for e, c in plan.extra_trials)
        print(f"allocation: {alloc}")
        print(f"final alpha: {plan.final_gap:.10g}")

    if cfg.csv_path:
        rows = [("reinforce/1", "baseline", "", "", "", report.baseline_gap, "")]
        for edge, gap in enumerate(report.per_edge_gap, start=1):
            rows.append(
                (
                    "reinforce/1",
                    "sweep",
                    edge,
                    "",
                    "",
                    gap,
                    1 if edge == report.best_edge else 0,
                )
            )
        if plan is not None:
            for round_idx, (edge, gap) in enumerate(plan.rounds, start=1):
                rows.append(("reinforce/1", "round", edge, round_idx, "", gap, ""))
            for edge, extra in plan.extra_trials:
                rows.append(("reinforce/1", "allocation", edge, "", extra, "", ""))
        _write_csv(
            cfg.csv_path,
            ["schema", "kind", "edge", "round", "extra", "gap", "best"],
            rows,
        )
        print(f"wrote {cfg.csv_path}")
    return 0


def cmd_simulate(args) -> int:
    cfg = _build_config(args)
    chain = _require_chain(cfg)
    instance = _require_instance(cfg)
    if chain.n != instance.n:
        raise ConfigError(
            f"chain has {chain.n} agents but the instance has {instance.n}"
        )
    orders = _orders(cfg, instance.n)
    oracle = CoverageOracle(instance)
    optimum = best_known_optimum(
        instance, oracle=oracle, restarts=cfg.restarts, seed=cfg.seed
    )
    sweep = sweep_single_reinforcement(chain, engine=cfg.engine)
    reinforced = chain.with_extra_trials({sweep.best_edge: 1})
    print(
        f"instance: n={instance.n} locations={instance.locations.shape[0]} "
        f"points={instance.points.shape[0]} best_known_optimum={optimum:.6g}"
    )
    print(
        f"chain: effective_probs={[round(q, 6) for q in chain.effective_probs()]} "
        f"iterations={cfg.iterations} seed={cfg.seed}"
    )
    header = (
        f"{'order':<{max(5, instance.n)}s} {'mean_f':>10s} {'alpha':>10s} "
        f"{'best_edge':>9s} {'mean_f+':>10s} {'alpha+':>10s}"
    )
    print(header)
    rows = []
    for order in orders:
        base = monte_carlo(
            instance,
            chain,
            permutation=order,
            iterations=cfg.iterations,
            seed=cfg.seed,
            optimum=optimum,
            engine=cfg.engine,
            oracle=oracle,
        )
        plus = monte_carlo(
            instance,
            reinforced,
            permutation=order,
            iterations=cfg.iterations,
            seed=cfg.seed,
            optimum=optimum,
            engine=cfg.engine,
            oracle=oracle,
        )
        name = format_order(order)
        print(
            f"{name:<{max(5, instance.n)}s} {base.mean_value:>10.6g} "
            f"{base.predicted_gap:>10.6g} {sweep.best_edge:>9d} "
            f"{plus.mean_value:>10.6g} {plus.predicted_gap:>10.6g}"
        )
        rows.append(
            (
                "simulate/1",
                name,
                cfg.iterations,
                cfg.seed,
                optimum,
                base.mean_value,
                base.std_error,
                base.empirical_gap,
                base.predicted_gap,
                sweep.best_edge,
                plus.mean_value,
                plus.std_error,
                plus.empirical_gap,
                plus.predicted_gap,
            )
        )
    if cfg.csv_path:
        _write_csv(
            cfg.csv_path,
            [
                "schema",
                "order",
                "iterations",
                "seed",
                "optimum",
                "mean_f",
                "std_error",
                "empirical_gap",
                "alpha",
                "best_edge",
                "reinforced_mean_f",
                "reinforced_std_error",
                "reinforced_empirical_gap",
                "reinforced_alpha",
            ],
            rows,
        )
        print(f"wrote {cfg.csv_path}")
    return 0


def cmd_solve(args) -> int:
    cfg = _build_config(args)
    instance = _require_instance(cfg)
    orders = _orders(cfg, instance.n)
    order = orders[0]
    bits = cfg.mask if cfg.mask is not None else (1,) * (instance.n - 1)
    if len(bits) != instance.n - 1:
        raise ConfigError(
            f"mask: has {len(bits)} bits, expected {instance.n - 1}"
        )
    oracle = CoverageOracle(instance)
    result = run_chain_greedy(oracle, mask=bits, order=order)
    print(f"order: {format_order(order)}")
    print(f"mask:  {''.join(str(b) for b in bits) or '-'}")
    rows = []
    for pos, picks in enumerate(result.per_agent, start=1):
        agent = order[pos - 1]
        for elem in sorted(picks):
            loc_idx = instance.element_location(elem)
            x, y = (float(v) for v in instance.locations[loc_idx])
            radius = oracle.agent_radius[agent - 1]
            print(
                f"  position {pos}: agent {agent} option {elem.local_id} "
                f"-> location {loc_idx} ({x:.6g}, {y:.6g}) radius {radius:.6g}"
            )
            rows.append(
                ("solve/1", pos, agent, elem.local_id, loc_idx, x, y, radius, result.value)
            )
    print(f"covered points: {result.value:.6g}")
    if cfg.csv_path:
        _write_csv(
            cfg.csv_path,
            [
                "schema",
                "position",
                "agent",
                "local_id",
                "location",
                "x",
                "y",
                "radius",
                "value",
            ],
            rows,
        )
        print(f"wrote {cfg.csv_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chaingreedy",
        description=(
            "Greedy submodular maximization over an unreliable relay chain: "
            "gap analysis, trial reinforcement, and coverage benchmarks."
        ),
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="experiment config (JSON)")
    common.add_argument("--seed", type=int, default=None, help="override config seed")
    common.add_argument(
        "--engine",
        choices=list(ENGINES),
        default=None,
        help="probability engine (default: config value or dp)",
    )
    common.add_argument(
        "--iterations", type=int, default=None, help="Monte Carlo iteration count"
    )
    common.add_argument("--csv", default=None, help="write machine-readable CSV here")
    common.add_argument(
        "--permutation",
        action="append",
        default=None,
        help="chain order as letters ('DBHGFCAE') or comma ints; repeatable",
    )
    common.add_argument(
        "--budget",
        type=int,
        default=None,
        help="total extra transmission trials to allocate",
    )
    common.add_argument(
        "--enumeration-cap",
        type=int,
        default=None,
        dest="enumeration_cap",
        help="most edges allowed for exact outcome enumeration",
    )

    sub = parser.add_subparsers(dest="command", required=True)
    p_alpha = sub.add_parser(
        "alpha", parents=[common], help="expected gap and clique-number pmf"
    )
    p_alpha.set_defaults(func=cmd_alpha)
    p_rein = sub.add_parser(
        "reinforce", parents=[common], help="extra-trial sweep and allocation"
    )
    p_rein.set_defaults(func=cmd_reinforce)
    p_sim = sub.add_parser(
        "simulate", parents=[common], help="Monte Carlo coverage benchmark"
    )
    p_sim.set_defaults(func=cmd_simulate)
    p_enum = sub.add_parser(
        "enumerate", parents=[common], help="list every outcome mask"
    )
    p_enum.set_defaults(func=cmd_enumerate)
    p_solve = sub.add_parser(
        "solve", parents=[common], help="one greedy run under a given mask"
    )
    p_solve.add_argument(
        "--mask", default=None, help="edge outcome bits, e.g. 0110101"
    )
    p_solve.set_defaults(func=cmd_solve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except EnumerationCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
