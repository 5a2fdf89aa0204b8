"""Command-line interface: simulate observations, estimate theta, verify claims.

Subcommands
    simulate   write a local-mean observation CSV (optionally augmented)
    estimate   read an observation CSV and write the estimate as JSON
    verify     run Monte Carlo experiments and write a report CSV + JSON

Exit codes: 0 success (verify: all pass flags true), 1 verification
failure, 2 usage/config error.  A JSON config file can preset any option;
explicit flags win over the file.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .estimate import estimate_augmented, estimate_means_only
from .experiments import (
    DEFAULT_SEED,
    EXPERIMENTS,
    ExperimentConfig,
    default_verify_configs,
    merge_reports,
    resolve_k,
    run_experiment,
)
from .measures import measure_from_spec, measure_to_spec, v_coefficients
from .models import get_model
from .simulate import Block, BlockSet, augment, observe, path_to_csv, simulate_path


def _parse_measure(value) -> dict:
    if value is None:
        return {"kind": "lebesgue"}
    if isinstance(value, dict):
        return value
    text = value.strip()
    if text == "lebesgue":
        return {"kind": "lebesgue"}
    if text.startswith("dirac:"):
        return {"kind": "atomic", "atoms": [[float(text.split(":", 1)[1]), 1.0]]}
    try:
        spec = json.loads(text)
    except json.JSONDecodeError:
        raise ValueError(f"cannot parse measure {text!r}: expected 'lebesgue', 'dirac:<pos>' or JSON")
    if not isinstance(spec, dict):
        raise ValueError(f"measure JSON must be an object, got {spec!r}")
    return spec


def _fmt(x: float) -> str:
    return repr(float(x))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="diffmeans")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file presetting options; flags win")
        p.add_argument("--model", help="registered model name")
        p.add_argument("--measure", help="'lebesgue', 'dirac:<pos>', or JSON measure spec")
        p.add_argument("--m", type=int, help="substeps per observation cell")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--xi0", type=float, help="initial value of the diffusion")
        p.add_argument("--out", help="output path ('-' = stdout where applicable)")

    p_sim = sub.add_parser("simulate", help="simulate and write observations")
    common(p_sim)
    p_sim.add_argument("--theta", type=float, help="true parameter")
    p_sim.add_argument("--n", type=int, help="number of observation cells")
    p_sim.add_argument("--k", help="block length rule (needed with --augmented)")
    p_sim.add_argument("--augmented", action="store_true", help="include block anchors")
    p_sim.add_argument("--dump-path", dest="dump_path",
                       help="also write the fine-grid path as CSV (t, X, dW)")

    p_est = sub.add_parser("estimate", help="estimate theta from an observation CSV")
    common(p_est)
    p_est.add_argument("--in", dest="input", help="observation CSV path ('-' = stdin)")
    p_est.add_argument("--k", help="block length rule for means-only data")
    p_est.add_argument("--theta-init", type=float, help="optimizer start point")

    p_ver = sub.add_parser("verify", help="run Monte Carlo verification experiments")
    common(p_ver)
    p_ver.add_argument("--experiment", action="append",
                       help="experiment id or 'all' (repeatable)")
    p_ver.add_argument("--theta0", type=float, help="true parameter")
    p_ver.add_argument("--h", type=float, help="local alternative scale")
    p_ver.add_argument("--n", type=int, action="append", help="sample size (repeatable)")
    p_ver.add_argument("--k", help="block length rule, e.g. fixed:10 or log2")
    p_ver.add_argument("--M", type=int, help="replications")
    p_ver.add_argument("--workers", type=int, help="parallel workers (default: cores)")
    return parser


def _load_config_file(path):
    if path is None:
        return {}
    with open(path) as f:
        data = json.load(f)
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    return data


def _opt(args, file_cfg, name, default=None):
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in file_cfg:
        return file_cfg[name]
    return default


def _write_text(path, text):
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as f:
            f.write(text)


def cmd_simulate(args) -> int:
    file_cfg = _load_config_file(args.config)
    model = get_model(_opt(args, file_cfg, "model", "multiplicative_bm"))
    measure_spec = _parse_measure(_opt(args, file_cfg, "measure"))
    measure = measure_from_spec(measure_spec)
    theta = float(_opt(args, file_cfg, "theta", 1.0))
    n = int(_opt(args, file_cfg, "n", 256))
    m = int(_opt(args, file_cfg, "m", 32))
    seed = int(_opt(args, file_cfg, "seed", DEFAULT_SEED))
    xi0 = float(_opt(args, file_cfg, "xi0", model.default_xi0))
    augmented = bool(getattr(args, "augmented", False) or file_cfg.get("augmented", False))
    out = _opt(args, file_cfg, "out", "-")

    path = simulate_path(model, theta, xi0, n, m, seed)
    obs = observe(path, measure)
    dump = _opt(args, file_cfg, "dump_path")
    if dump:
        _write_text(dump, path_to_csv(path))
    resolved = {
        "model": model.name, "measure": measure_to_spec(measure), "theta": theta,
        "n": n, "m": m, "seed": seed, "xi0": xi0, "augmented": augmented,
    }
    if not augmented:
        lines = ["j,xbar"] + [f"{j},{_fmt(x)}" for j, x in enumerate(obs)]
        _write_sidecar(out, resolved)
        _write_text(out, "\n".join(lines) + "\n")
        return 0
    k = resolve_k(_opt(args, file_cfg, "k", "log2"), n)
    resolved["k"] = k
    blocks = augment(path, obs, k)
    lines = ["j,xbar,l,anchor"]
    j = 0
    for l, block in enumerate(blocks.blocks):
        for x in block.means:
            lines.append(f"{j},{_fmt(x)},{l},{_fmt(block.anchor)}")
            j += 1
    lines.append(f"{n},,{len(blocks.blocks)},{_fmt(blocks.blocks[-1].terminal)}")
    _write_sidecar(out, resolved)
    _write_text(out, "\n".join(lines) + "\n")
    return 0


def _write_sidecar(out: str, resolved: dict) -> None:
    # The data CSV format is pinned, so the config echo lives next to the
    # file; nothing is written when streaming to stdout.
    if out != "-":
        with open(out + ".meta.json", "w") as f:
            json.dump(resolved, f, indent=2, sort_keys=True)
            f.write("\n")


def _read_observation_csv(text: str):
    """Parse a simulate CSV; returns ("means", obs) or ("augmented", groups, terminal).

    groups is a list of (anchor, [means]); raises ValueError on any malformed row.
    """
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty observation CSV")
    header = lines[0]
    if header == "j,xbar":
        obs = []
        for i, ln in enumerate(lines[1:]):
            parts = ln.split(",")
            if len(parts) != 2 or int(parts[0]) != i:
                raise ValueError(f"malformed observation row {ln!r}")
            obs.append(float(parts[1]))
        if not obs:
            raise ValueError("observation CSV holds no rows")
        return "means", np.asarray(obs)
    if header == "j,xbar,l,anchor":
        groups: list[tuple[float, list[float]]] = []
        terminal = None
        count = 0
        for ln in lines[1:]:
            parts = ln.split(",")
            if len(parts) != 4:
                raise ValueError(f"malformed observation row {ln!r}")
            if parts[1] == "":
                terminal = float(parts[3])
                continue
            j, x, l, anchor = int(parts[0]), float(parts[1]), int(parts[2]), float(parts[3])
            if j != count:
                raise ValueError(f"non-consecutive observation index at row {ln!r}")
            count += 1
            if l == len(groups):
                groups.append((anchor, []))
            elif l != len(groups) - 1:
                raise ValueError(f"non-consecutive block index at row {ln!r}")
            groups[-1][1].append(x)
        if terminal is None or not groups:
            raise ValueError("augmented CSV lacks the terminal row")
        return "augmented", groups, terminal
    raise ValueError(f"unrecognized observation CSV header {header!r}")


def _blockset_from_groups(groups, terminal: float) -> BlockSet:
    n = sum(len(means) for _, means in groups)
    k = len(groups[0][1])
    root_n = math.sqrt(n)
    blocks = []
    for idx, (anchor, means) in enumerate(groups):
        means = np.asarray(means, dtype=float)
        term = groups[idx + 1][0] if idx + 1 < len(groups) else terminal
        inc = np.empty(means.size + 1)
        inc[0] = means[0] - anchor
        inc[1 : means.size] = np.diff(means)
        inc[means.size] = term - means[-1]
        blocks.append(Block(anchor=float(anchor), means=means, terminal=float(term),
                            increments=root_n * inc))
    L = n // k
    return BlockSet(n=n, k=k, L=L, blocks=tuple(blocks), last_block_len=n - L * k)


def cmd_estimate(args) -> int:
    file_cfg = _load_config_file(args.config)
    model = get_model(_opt(args, file_cfg, "model", "multiplicative_bm"))
    measure_spec = _parse_measure(_opt(args, file_cfg, "measure"))
    measure = measure_from_spec(measure_spec)
    coeffs = v_coefficients(measure)
    xi0 = float(_opt(args, file_cfg, "xi0", model.default_xi0))
    theta_init = _opt(args, file_cfg, "theta_init")
    source = _opt(args, file_cfg, "input", "-")
    out = _opt(args, file_cfg, "out", "-")

    text = sys.stdin.read() if source == "-" else open(source).read()
    parsed = _read_observation_csv(text)
    if parsed[0] == "augmented":
        _, groups, terminal = parsed
        blocks = _blockset_from_groups(groups, terminal)
        result = estimate_augmented(blocks, model, coeffs, theta_init)
        mode, n, k = "augmented", blocks.n, blocks.k
    else:
        _, obs = parsed
        n = obs.size
        k = resolve_k(_opt(args, file_cfg, "k", "log2"), n)
        result = estimate_means_only(obs, xi0, model, coeffs, k, theta_init)
        mode = "means_only"
    payload = {
        "theta_hat": result.theta_hat,
        "score_at_hat": result.score_at_hat,
        "info_at_hat": result.info_at_hat,
        "iterations": result.iterations,
        "boundary_hit": result.boundary_hit,
        "config": {
            "mode": mode,
            "model": model.name,
            "measure": measure_to_spec(measure),
            "n": int(n),
            "k": int(k),
            "xi0": xi0,
        },
    }
    _write_text(out, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_verify(args) -> int:
    file_cfg = _load_config_file(args.config)
    selected = _opt(args, file_cfg, "experiment") or ["all"]
    if isinstance(selected, str):
        selected = [selected]
    for exp in selected:
        if exp != "all" and exp not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {exp!r}; known: {sorted(EXPERIMENTS)} or 'all'")
    workers = _opt(args, file_cfg, "workers")
    workers = os.cpu_count() or 1 if workers is None else max(1, int(workers))
    out = _opt(args, file_cfg, "out", "report")

    override_keys = ("model", "measure", "theta0", "h", "n", "k", "M", "seed", "m", "xi0")
    overrides = {key: _opt(args, file_cfg, key) for key in override_keys}
    has_overrides = any(v is not None for v in overrides.values())
    seed = int(overrides["seed"]) if overrides["seed"] is not None else int(file_cfg.get("seed", DEFAULT_SEED))

    if has_overrides:
        names = [e for e in selected if e != "all"] or sorted(EXPERIMENTS)
        configs = []
        for name in names:
            fields = {"experiment": name, "seed": seed}
            if overrides["model"] is not None:
                fields["model"] = overrides["model"]
            if overrides["measure"] is not None:
                fields["measure"] = _parse_measure(overrides["measure"])
            if overrides["theta0"] is not None:
                fields["theta0"] = float(overrides["theta0"])
            if overrides["h"] is not None:
                fields["h"] = float(overrides["h"])
            if overrides["n"] is not None:
                n_val = overrides["n"]
                fields["n_list"] = tuple(n_val) if isinstance(n_val, (list, tuple)) else (int(n_val),)
            if overrides["k"] is not None:
                fields["k_rule"] = str(overrides["k"])
            if overrides["M"] is not None:
                fields["replications"] = int(overrides["M"])
            if overrides["m"] is not None:
                fields["m"] = int(overrides["m"])
            if overrides["xi0"] is not None:
                fields["xi0"] = float(overrides["xi0"])
            if "tolerances" in file_cfg:
                fields["tolerances"] = dict(file_cfg["tolerances"])
            configs.append(ExperimentConfig(**fields))
    else:
        configs = default_verify_configs(seed)
        if "all" not in selected:
            configs = [c for c in configs if c.experiment in selected]

    reports = [run_experiment(cfg, workers) for cfg in configs]
    report = merge_reports(reports)
    csv_path = out if out.endswith(".csv") else out + ".csv"
    json_path = (out[:-4] if out.endswith(".csv") else out) + ".json"
    with open(csv_path, "w") as f:
        f.write(report.to_csv_text())
    with open(json_path, "w") as f:
        json.dump(report.to_json_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    n_fail = sum(not r.passed for r in report.rows)
    print(f"{len(report.rows)} statistics checked, {n_fail} failed -> {csv_path}")
    return 0 if n_fail == 0 else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"simulate": cmd_simulate, "estimate": cmd_estimate, "verify": cmd_verify}
    try:
        return handlers[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
