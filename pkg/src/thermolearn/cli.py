"""Reproducible experiment runner.

Usage: ``thermolearn SUBCOMMAND --config PATH [--seed U64] [--out DIR]
[--format {csv,json}]``. Every run writes ``manifest.json`` first (so a
crashed run can still be reproduced), then the subcommand's artifacts,
then rewrites the manifest with sha256 checksums of every artifact.
Outputs contain no timestamps or machine state, so the same manifest
always reproduces byte-identical artifacts.

Exit codes: 0 success, 1 validation failure, 2 numerical or convergence
failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path
from typing import Dict, List

import numpy as np

from . import activeinf, boost, convolution, digest, ebm, info, ising, marl
from .anneal import SCHEDULE_KINDS, CoolingSchedule, EnergyLandscape
from .anneal import anneal as run_anneal
from .config import FieldSpec, parse_config_file, resolved, validate_against
from .distributions import DiscreteDistribution
from .errors import NumericalError, ThermolearnError
from .rng import RngStream
from .trace import Trace

SCHEMA_VERSION = 1
SUBCOMMANDS = ("entropy", "ising", "anneal", "digest", "ebm", "conv", "boost", "activeinf", "marl")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_USAGE = 64

__all__ = ["main", "run_experiment", "validate_config", "SUBCOMMANDS"]


def _positive(value):
    if value <= 0:
        return f"must be > 0, got {value}"
    return None


def _non_negative(value):
    if value < 0:
        return f"must be >= 0, got {value}"
    return None


def _unit_interval(value):
    if not 0 <= value <= 1:
        return f"must be in [0, 1], got {value}"
    return None


def _schedule_fields(default_t0: float, default_ratio: float) -> Dict[str, FieldSpec]:
    return {
        "schedule.kind": FieldSpec(
            "string",
            default="geometric",
            check=lambda v: None if v in SCHEDULE_KINDS else f"must be one of {SCHEDULE_KINDS}",
        ),
        "schedule.t0": FieldSpec("real", default=default_t0, check=_positive),
        "schedule.parameter": FieldSpec("real", default=default_ratio),
        "schedule.floor": FieldSpec("real", default=1e-9, check=_positive),
    }


SCHEMAS: Dict[str, Dict[str, FieldSpec]] = {
    "entropy": {
        "probs": FieldSpec("list", required=True),
        "log_base": FieldSpec("real", default=2.0, check=lambda v: None if v > 1 else "must be > 1"),
    },
    "ising": {
        "graph": FieldSpec("string"),
        "n_sites": FieldSpec("int", check=_positive),
        "coupling": FieldSpec("real", default=1.0),
        "field": FieldSpec("real", default=0.0),
        "periodic": FieldSpec("bool", default=False),
        "beta": FieldSpec("real", required=True, check=_non_negative),
        "steps": FieldSpec("int", required=True, check=_positive),
        "burn_in": FieldSpec("int", default=0, check=_non_negative),
    },
    "anneal": {
        "landscape": FieldSpec(
            "string", default="quadratic", check=lambda v: None if v == "quadratic" else "must be 'quadratic'"
        ),
        "span": FieldSpec("int", default=50, check=_positive),
        "sweeps": FieldSpec("int", required=True, check=_positive),
        "proposals_per_sweep": FieldSpec("int", default=10, check=_positive),
        **_schedule_fields(10.0, 0.99),
    },
    "digest": {
        "instance": FieldSpec("string"),
        "n_a": FieldSpec("int", check=_positive),
        "n_b": FieldSpec("int", check=_positive),
        "total_length": FieldSpec("int", check=_positive),
        "sweeps": FieldSpec("int", default=1000, check=_positive),
        "proposals_per_sweep": FieldSpec("int", default=100, check=_positive),
        **_schedule_fields(5.0, 0.995),
    },
    "ebm": {
        "data": FieldSpec("string", required=True),
        "n_hidden": FieldSpec("int", required=True, check=_positive),
        "method": FieldSpec(
            "string",
            default="exact_gradient",
            check=lambda v: None if v in ("exact_gradient", "cd_k") else "must be exact_gradient or cd_k",
        ),
        "learning_rate": FieldSpec("real", default=0.1, check=_positive),
        "epochs": FieldSpec("int", default=100, check=_non_negative),
        "k": FieldSpec("int", default=1, check=_positive),
        "init_scale": FieldSpec("real", default=0.01, check=_non_negative),
    },
    "conv": {
        "n": FieldSpec("int", check=_positive),
        "x": FieldSpec("list"),
        "y": FieldSpec("list"),
    },
    "boost": {
        "dataset": FieldSpec("string"),
        "n_items": FieldSpec("int", default=10000, check=_positive),
        "threshold": FieldSpec("real", default=0.5),
        "gamma": FieldSpec(
            "real", default=0.1, check=lambda v: None if 0 < v <= 0.5 else "must be in (0, 1/2]"
        ),
    },
    "activeinf": {
        "mdp": FieldSpec("string", required=True),
        "tolerance": FieldSpec("real", default=1e-10, check=_positive),
    },
    "marl": {
        "rows": FieldSpec("int", default=4, check=_positive),
        "cols": FieldSpec("int", default=4, check=_positive),
        "coupling": FieldSpec("real", default=1.0),
        "episodes": FieldSpec("int", default=500, check=_positive),
        "steps_per_episode": FieldSpec("int", default=10, check=_positive),
        "alpha": FieldSpec("real", default=0.1, check=_unit_interval),
        "gamma": FieldSpec("real", default=0.9, check=lambda v: None if 0 <= v < 1 else "must be in [0, 1)"),
        "temp.start": FieldSpec("real", default=10.0, check=_positive),
        "temp.end": FieldSpec("real", default=0.1, check=_positive),
        "n_bins": FieldSpec("int", default=11, check=_positive),
    },
}


def validate_config(subcommand: str, config: Dict[str, object]) -> List[str]:
    """Diagnostics for a subcommand config; empty iff run() would accept it."""
    if subcommand not in SCHEMAS:
        return [f"subcommand: unknown subcommand {subcommand!r}"]
    diagnostics = validate_against(SCHEMAS[subcommand], config)
    extra = _CROSS_CHECKS.get(subcommand)
    if extra and not diagnostics:
        diagnostics.extend(extra(resolved(SCHEMAS[subcommand], config)))
    return diagnostics


def _check_ising(cfg) -> List[str]:
    if "graph" not in cfg and "n_sites" not in cfg:
        return ["graph: either graph or n_sites is required"]
    if cfg["steps"] <= cfg.get("burn_in", 0):
        return ["steps: must exceed burn_in"]
    return []


def _check_digest(cfg) -> List[str]:
    if "instance" in cfg:
        return []
    missing = [key for key in ("n_a", "n_b", "total_length") if key not in cfg]
    if missing:
        return [f"{key}: required when no instance file is given" for key in missing]
    return []


def _check_conv(cfg) -> List[str]:
    if "n" in cfg:
        return []
    if "x" in cfg and "y" in cfg:
        return []
    return ["n: give n for random signals, or both x and y"]


def _check_marl(cfg) -> List[str]:
    if cfg["rows"] * cfg["cols"] < 2:
        return ["rows: lattice needs at least 2 agents"]
    return []


_CROSS_CHECKS = {
    "ising": _check_ising,
    "digest": _check_digest,
    "conv": _check_conv,
    "marl": _check_marl,
}


def _json_bytes(payload) -> bytes:
    return (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode()


def _write_artifact(out_dir: Path, name: str, data: bytes, artifacts: Dict[str, str]) -> None:
    (out_dir / name).write_bytes(data)
    artifacts[name] = hashlib.sha256(data).hexdigest()


def _write_trace(trace: Trace, out_dir: Path, name: str, fmt: str, artifacts: Dict[str, str]) -> None:
    if fmt == "json":
        payload = {key: trace.column(key).tolist() for key in trace.column_names}
        _write_artifact(out_dir, f"{name}.json", _json_bytes({"columns": payload}), artifacts)
    else:
        _write_artifact(out_dir, f"{name}.csv", trace.csv_text().encode(), artifacts)


def _schedule_from(cfg) -> CoolingSchedule:
    return CoolingSchedule(
        kind=cfg["schedule.kind"],
        t0=float(cfg["schedule.t0"]),
        parameter=float(cfg["schedule.parameter"]),
        floor=float(cfg["schedule.floor"]),
    )


def _run_entropy(cfg, rng, out_dir, fmt, artifacts):
    dist = DiscreteDistribution(np.asarray(cfg["probs"], dtype=float))
    base = float(cfg["log_base"])
    return {
        "entropy": info.entropy_shannon(dist, base),
        "entropy_nats": info.entropy_nats(dist),
        "log_base": base,
        "n_outcomes": len(dist),
    }


def _ising_graph(cfg) -> ising.CouplingGraph:
    if "graph" in cfg:
        return ising.load_coupling_graph(cfg["graph"])
    return ising.chain_graph(
        cfg["n_sites"], float(cfg["coupling"]), float(cfg["field"]), cfg["periodic"]
    )


def _run_ising(cfg, rng, out_dir, fmt, artifacts):
    graph = _ising_graph(cfg)
    result = ising.metropolis_chain(
        graph, float(cfg["beta"]), cfg["steps"], cfg["burn_in"], rng
    )
    _write_trace(result.trace, out_dir, "trace", fmt, artifacts)
    obs = ising.estimate_observables(result.samples, graph)
    summary = {
        "n_sites": graph.n_sites,
        "beta": float(cfg["beta"]),
        "steps": cfg["steps"],
        "burn_in": cfg["burn_in"],
        "acceptance_rate": result.acceptance_rate,
        "mean_energy": obs.mean_energy,
        "mean_magnetization": obs.mean_magnetization,
        "se_energy": obs.se_energy,
        "se_magnetization": obs.se_magnetization,
        "n_samples": obs.n_samples,
    }
    if graph.n_sites <= ising.MAX_EXACT_SITES:
        z, _ = ising.partition_exact(graph, float(cfg["beta"]))
        summary["partition_z"] = z
    return summary


class _QuadraticLine(EnergyLandscape):
    """Integer line with E(x) = x^2 and unit-step proposals."""

    def __init__(self, span: int):
        self.span = int(span)

    def energy(self, state) -> float:
        return float(state * state)

    def propose(self, state, rng):
        return state + (1 if rng.random() < 0.5 else -1)

    def random_state(self, rng):
        return int(rng.generator.integers(-self.span, self.span + 1))


def _run_anneal(cfg, rng, out_dir, fmt, artifacts):
    problem = _QuadraticLine(cfg["span"])
    result = run_anneal(
        problem, _schedule_from(cfg), cfg["sweeps"], cfg["proposals_per_sweep"], rng
    )
    _write_trace(result.trace, out_dir, "trace", fmt, artifacts)
    return {
        "landscape": "quadratic",
        "best_state": int(result.best_state),
        "best_energy": result.best_energy,
        "sweeps": cfg["sweeps"],
        "proposals_per_sweep": cfg["proposals_per_sweep"],
    }


def _run_digest(cfg, rng, out_dir, fmt, artifacts):
    if "instance" in cfg:
        instance = digest.load_instance(cfg["instance"])
    else:
        instance = digest.generate_instance(
            cfg["n_a"], cfg["n_b"], cfg["total_length"], rng.substream(1)
        )
    landscape = digest.DigestLandscape(instance)
    result = run_anneal(
        landscape, _schedule_from(cfg), cfg["sweeps"], cfg["proposals_per_sweep"], rng
    )
    _write_trace(result.trace, out_dir, "trace", fmt, artifacts)
    ordering = result.best_state
    return {
        "a": list(instance.a),
        "b": list(instance.b),
        "c": list(instance.c),
        "total_length": instance.total_length,
        "best_energy": result.best_energy,
        "best_sigma": list(ordering.sigma),
        "best_mu": list(ordering.mu),
        "implied_fragments": list(digest.double_digest_implied_fragments(ordering, instance)),
    }


def _run_ebm(cfg, rng, out_dir, fmt, artifacts):
    data = ebm.load_visible_data(cfg["data"])
    n_visible = data.shape[1]
    n_hidden = cfg["n_hidden"]
    scale = float(cfg["init_scale"])
    init_rng = rng.substream(1)
    machine = ebm.BoltzmannMachine(
        np.zeros(n_visible),
        np.zeros(n_hidden),
        scale * init_rng.generator.standard_normal((n_visible, n_hidden)),
    )
    trained, losses = ebm.bm_train(
        machine,
        data,
        method=cfg["method"],
        learning_rate=float(cfg["learning_rate"]),
        epochs=cfg["epochs"],
        k=cfg["k"],
        rng=rng.substream(2),
    )
    _write_artifact(out_dir, "machine.json", trained.to_json().encode() + b"\n", artifacts)
    if losses:
        curve = Trace({"epoch": np.arange(1, len(losses) + 1), "nll": np.asarray(losses)})
        _write_trace(curve, out_dir, "loss_curve", fmt, artifacts)
    return {
        "n_visible": n_visible,
        "n_hidden": n_hidden,
        "method": cfg["method"],
        "epochs": cfg["epochs"],
        "n_rows": int(data.shape[0]),
        "final_nll": losses[-1] if losses else None,
    }


def _run_conv(cfg, rng, out_dir, fmt, artifacts):
    if "x" in cfg and "y" in cfg:
        x = np.asarray(cfg["x"], dtype=float)
        y = np.asarray(cfg["y"], dtype=float)
    else:
        n = cfg["n"]
        gen = rng.generator
        x = gen.uniform(-1.0, 1.0, n)
        y = gen.uniform(-1.0, 1.0, n)
    fast = convolution.conv_fft(x, y)
    direct = convolution.conv_naive(x, y)
    max_diff = float(np.max(np.abs(fast - direct)))
    if max_diff > 1e-9:
        raise NumericalError(f"conv: fast and direct routes disagree by {max_diff:g}")
    return {
        "n_x": int(x.size),
        "n_y": int(y.size),
        "out_length": int(fast.size),
        "max_abs_route_diff": max_diff,
        "result": fast.tolist() if fast.size <= 64 else fast[:64].tolist(),
        "result_truncated": bool(fast.size > 64),
    }


def _run_boost(cfg, rng, out_dir, fmt, artifacts):
    threshold = float(cfg["threshold"])
    if "dataset" in cfg:
        dataset = boost.load_dataset(cfg["dataset"])
    else:
        xs = rng.substream(1).generator.random(cfg["n_items"])
        ys = (xs >= threshold).astype(int)
        dataset = boost.WeightedDataset.uniform(xs, ys)
    learner = boost.NoisyThresholdLearner(threshold, float(cfg["gamma"]))
    _, diagnostics = boost.boost3(learner, dataset, rng.substream(2))
    return diagnostics.to_dict()


def _run_activeinf(cfg, rng, out_dir, fmt, artifacts):
    with open(cfg["mdp"]) as fh:
        mdp = activeinf.mdp_from_json(fh.read())
    result = activeinf.value_iteration(mdp, float(cfg["tolerance"]))
    return {
        "V": result.values.tolist(),
        "policy": result.policy.tolist(),
        "iterations": result.iterations,
        "residual": result.residual,
    }


def _run_marl(cfg, rng, out_dir, fmt, artifacts):
    env = marl.IsingGameEnv(marl.torus_graph(cfg["rows"], cfg["cols"]), float(cfg["coupling"]))
    episodes = cfg["episodes"]
    t_start, t_end = float(cfg["temp.start"]), float(cfg["temp.end"])
    ratio = 1.0 if episodes == 1 else (t_end / t_start) ** (1.0 / (episodes - 1))
    schedule = CoolingSchedule("geometric", t_start, min(1.0, ratio))
    result = marl.run_ising_game(
        env,
        episodes,
        cfg["steps_per_episode"],
        float(cfg["alpha"]),
        float(cfg["gamma"]),
        schedule,
        rng,
        n_bins=cfg["n_bins"],
    )
    _write_trace(result.trace, out_dir, "trace", fmt, artifacts)
    mags = result.trace.column("magnetization")
    return {
        "n_agents": env.graph.n_agents,
        "episodes": episodes,
        "steps_per_episode": cfg["steps_per_episode"],
        "final_magnetization": float(mags[-1]),
        "mean_magnetization_last_decile": float(mags[-max(1, episodes // 10):].mean()),
    }


_RUNNERS = {
    "entropy": _run_entropy,
    "ising": _run_ising,
    "anneal": _run_anneal,
    "digest": _run_digest,
    "ebm": _run_ebm,
    "conv": _run_conv,
    "boost": _run_boost,
    "activeinf": _run_activeinf,
    "marl": _run_marl,
}


def run_experiment(
    subcommand: str,
    config: Dict[str, object],
    seed: int = 0,
    out_dir="out",
    fmt: str = "csv",
) -> int:
    """Validate, run, and write artifacts; returns the process exit code."""
    if subcommand not in SUBCOMMANDS:
        print(f"unknown subcommand: {subcommand}", file=sys.stderr)
        return EXIT_USAGE
    if fmt not in ("csv", "json"):
        print(f"unknown format: {fmt}", file=sys.stderr)
        return EXIT_USAGE
    diagnostics = validate_config(subcommand, config)
    if diagnostics:
        for item in diagnostics:
            print(f"config error: {item}", file=sys.stderr)
        return EXIT_VALIDATION

    out_path = Path(out_dir)
    out_path.mkdir(parents=True, exist_ok=True)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "subcommand": subcommand,
        "seed": int(seed),
        "out_dir": str(out_dir),
        "format": fmt,
        "config": config,
        "artifacts": {},
    }
    (out_path / "manifest.json").write_bytes(_json_bytes(manifest))

    cfg = resolved(SCHEMAS[subcommand], config)
    rng = RngStream(int(seed))
    artifacts: Dict[str, str] = {}
    try:
        result = _RUNNERS[subcommand](cfg, rng, out_path, fmt, artifacts)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ThermolearnError as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    result_payload = {"schema_version": SCHEMA_VERSION, "subcommand": subcommand, **result}
    _write_artifact(out_path, "result.json", _json_bytes(result_payload), artifacts)
    manifest["artifacts"] = artifacts
    (out_path / "manifest.json").write_bytes(_json_bytes(manifest))
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _build_parser() -> _Parser:
    parser = _Parser(prog="thermolearn", description="Seeded experiment runner.")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", required=True, help="path to a key = value config document")
    parser.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    parser.add_argument("--out", default="out", help="output directory (default ./out)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv", dest="fmt")
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        config = parse_config_file(args.config)
    except ThermolearnError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return run_experiment(args.subcommand, config, seed=args.seed, out_dir=args.out, fmt=args.fmt)


if __name__ == "__main__":
    sys.exit(main())
