"""Command-line entry point.

Subcommands: gen-topology, gen-dataset, train, eval, compare. Every output
file gets a ``<output>.manifest.json`` next to it recording the argv, seed,
input/output hashes and wall time. Exit codes: 0 success, 2 usage error,
1 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__, gcn, metrics, traffic
from .dqn import AgentConfig
from .netmodel import NetworkConfig, build_conflict_graph, generate_topology, load_topology, save_topology
from .sim import METHODS, Environment, evaluate, run_training, write_training_log

THREADS_ENV = "URLLC_SCHED_THREADS"
COMPARE_COLUMNS = (
    "method", "n_links", "channels", "seed", "mean_sinr_db", "p25", "p75",
    "range", "gain_db", "improvement_pct", "infer_time_s",
)


class CliError(Exception):
    """Runtime failure reported with exit code 1."""


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out_path, subcommand, argv, seed, inputs, outputs, started, extra=None) -> Path:
    manifest = {
        "subcommand": subcommand,
        "argv": list(argv),
        "seed": seed,
        "inputs": [{"path": str(p), "sha256": sha256_file(p)} for p in inputs],
        "outputs": [{"path": str(p), "sha256": sha256_file(p)} for p in outputs],
        "cwd": os.getcwd(),
        "code_version": __version__,
        "timings": {"wall_s": time.perf_counter() - started},
    }
    if extra:
        manifest.update(extra)
    path = Path(str(out_path) + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return path


def _load_topology(path):
    try:
        return load_topology(path)
    except FileNotFoundError:
        raise CliError(f"topology file not found: {path}")
    except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise CliError(f"corrupt topology file {path}: {exc}")


def _writable(path):
    parent = Path(path).resolve().parent
    if not parent.is_dir() or not os.access(parent, os.W_OK):
        raise CliError(f"cannot write to {path}")


def worker_cap() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# --- gen-topology -------------------------------------------------------------


def _parse_grid(text):
    try:
        rows, cols = (int(x) for x in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected ROWSxCOLS, got {text!r}")
    return rows, cols


def cmd_gen_topology(args, parser, argv):
    started = time.perf_counter()
    if args.links < 1:
        parser.error("--links must be >= 1")
    if args.region <= 0:
        parser.error("--region must be positive")
    grid = args.cells or (max(1, round(args.region / 40)),) * 2
    try:
        config = NetworkConfig(
            region_w=args.region,
            region_h=args.region,
            n_links=args.links,
            cell_grid=grid,
            n_channels=args.channels,
            tx_power=args.tx_power,
            interference_margin_db=args.margin_db,
            interference_scope=args.scope,
            max_link_distance=args.max_link_distance,
            rng_seed=args.seed,
        )
        links = generate_topology(config, args.seed)
    except ValueError as exc:
        parser.error(str(exc))
    graph = build_conflict_graph(links, config)
    _writable(args.out)
    save_topology(args.out, config, links, graph)
    write_manifest(args.out, "gen-topology", argv, args.seed, [], [args.out], started)
    print(f"wrote {args.out}: {len(links)} links, {graph.n_edges} conflict edges, {config.n_channels} channels")
    return 0


# --- gen-dataset ---------------------------------------------------------------


def cmd_gen_dataset(args, parser, argv):
    started = time.perf_counter()
    if args.snapshots < 1:
        parser.error("--snapshots must be >= 1")
    config, links, graph = _load_topology(args.topology)
    _writable(args.out)
    records = traffic.generate_dataset(config, args.snapshots, config.rng_seed, links=links, graph=graph)
    traffic.save_dataset(args.out, records, args.topology, sha256_file(args.topology))
    write_manifest(args.out, "gen-dataset", argv, config.rng_seed, [args.topology], [args.out], started)
    print(f"wrote {args.out}: {len(records)} snapshots of {len(links)}x{records[0].features.shape[1]} features")
    return 0


# --- train ---------------------------------------------------------------------


def cmd_train(args, parser, argv):
    started = time.perf_counter()
    if args.episodes < 0:
        parser.error("--episodes must be >= 0")
    config, links, graph = _load_topology(args.topology)
    _writable(args.out)
    log_path = args.log or str(args.out) + ".log.csv"
    cfg = AgentConfig(
        gamma=args.gamma,
        batch_size=args.batch_size,
        target_sync=args.target_sync,
        buffer_capacity=args.buffer,
        lr=args.lr,
        updates_per_slot=args.updates_per_slot,
    )
    env = Environment.build(config, links=links, graph=graph)
    result = run_training(config, args.episodes, seed=args.seed, agent_cfg=cfg, episode_slots=args.episode_slots, env=env)
    meta = {"n_links": len(links), "n_features": env.n_features, "topology_sha256": sha256_file(args.topology)}
    gcn.save_checkpoint(args.out, result.params, seed=args.seed, step=result.agent.steps, meta=meta)
    write_training_log(log_path, result.log)
    write_manifest(args.out, "train", argv, args.seed, [args.topology], [args.out, log_path], started)
    last = result.log[-1] if result.log else None
    eps = last.epsilon if last else cfg.eps_start
    loss = last.loss if last else float("nan")
    print(f"episodes={args.episodes} epsilon={eps:.4f} loss={loss:.6g} steps={result.agent.steps}")
    return 0


# --- eval ----------------------------------------------------------------------


def _eval_job(job):
    topo_path, method, ckpt_path, n_slots, seed = job
    config, links, graph = load_topology(topo_path)
    params = load_checkpoint_for(ckpt_path, config) if ckpt_path else None
    env = Environment.build(config, links=links, graph=graph)
    return evaluate(env, method, params, n_slots=n_slots, seed=seed).report


def load_checkpoint_for(path, config):
    try:
        params, _ = gcn.load_checkpoint(path)
    except FileNotFoundError:
        raise CliError(f"checkpoint not found: {path}")
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise CliError(f"corrupt checkpoint {path}: {exc}")
    width = traffic.N_BASE_FEATURES + config.n_channels
    if params.n_features != width or params.n_out != 2:
        raise CliError(
            f"checkpoint {path} expects {params.n_features} features/{params.n_out} heads; "
            f"topology needs {width}/2"
        )
    return params


def cmd_eval(args, parser, argv):
    started = time.perf_counter()
    needs_params = args.method in ("dqn", "greedy")
    if needs_params and not args.checkpoint:
        raise CliError(f"method {args.method} requires --checkpoint")
    if not needs_params and args.checkpoint:
        raise CliError("method baseline does not take a checkpoint")
    for t in args.topology:
        config, _, _ = _load_topology(t)
        if args.checkpoint:
            load_checkpoint_for(args.checkpoint, config)
    _writable(args.out)
    jobs = [(t, args.method, args.checkpoint, args.slots, args.seed) for t in args.topology]
    workers = min(worker_cap(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_eval_job, jobs))
    else:
        reports = [_eval_job(j) for j in jobs]
    for r in reports:
        bad = r.check()
        if bad:
            raise CliError(f"metrics invariants violated: {bad}")
    metrics.write_metrics_csv(args.out, reports, append=not args.overwrite)
    inputs = list(args.topology) + ([args.checkpoint] if args.checkpoint else [])
    write_manifest(args.out, "eval", argv, args.seed, inputs, [args.out], started)
    for r in reports:
        print(
            f"{r.method} links={r.n_links} C={r.channels} seed={r.seed} "
            f"sinr={metrics.format_range(r.mean_sinr_db, r.p25, r.p75)} sched={r.sched_ratio:.3f} "
            f"rel={r.reliability:.3f} cap={r.capacity:.2f} misses={r.miss_count} t={r.infer_time_s:.3g}s"
        )
    return 0


# --- compare -------------------------------------------------------------------


def compare_rows(baseline, candidates) -> list[dict]:
    """Join candidate rows onto baseline rows by (n_links, channels, seed).

    Raises ``CliError`` listing any candidate key with no baseline row.
    """
    key = lambda r: (r.n_links, r.channels, r.seed)
    base = {key(r): r for r in baseline}
    missing = sorted({key(r) for r in candidates if key(r) not in base})
    if missing:
        raise CliError(f"no baseline row for (n_links, channels, seed) keys: {missing}")
    out = []
    for k in sorted(base):
        b = base[k]
        out.append(_compare_row(b, None))
        for r in candidates:
            if key(r) == k:
                out.append(_compare_row(r, b))
    return out


def _compare_row(r, base):
    row = {
        "method": r.method,
        "n_links": r.n_links,
        "channels": r.channels,
        "seed": r.seed,
        "mean_sinr_db": round(r.mean_sinr_db, 2),
        "p25": round(r.p25, 2),
        "p75": round(r.p75, 2),
        "range": f"[{r.p25:.2f}, {r.p75:.2f}]",
        "gain_db": "",
        "improvement_pct": "",
        "infer_time_s": r.infer_time_s,
    }
    if base is not None:
        row["gain_db"] = round(metrics.sinr_gain(base.mean_sinr_db, r.mean_sinr_db), 2)
        row["improvement_pct"] = round(metrics.improvement_pct(base.mean_sinr_db, r.mean_sinr_db), 2)
    return row


def format_table(rows) -> str:
    head = f"{'Method':<16} {'Mean SINR (dB)':>14} {'Range (dB)':>18} {'Gain (dB)':>10} {'Improve. (%)':>13} {'Time (s)':>10}"
    lines = [head, "-" * len(head)]
    for r in rows:
        gain = "--" if r["gain_db"] == "" else f"{r['gain_db']:+.2f}"
        imp = "--" if r["improvement_pct"] == "" else f"{r['improvement_pct']:+.2f}"
        lines.append(
            f"{r['method']:<16} {r['mean_sinr_db']:>14.2f} {r['range']:>18} {gain:>10} {imp:>13} {r['infer_time_s']:>10.4g}"
        )
    return "\n".join(lines)


def _read_reports(path):
    try:
        return metrics.read_metrics_csv(path)
    except FileNotFoundError:
        raise CliError(f"metrics file not found: {path}")
    except (ValueError, KeyError) as exc:
        raise CliError(f"bad metrics file {path}: {exc}")


def cmd_compare(args, parser, argv):
    started = time.perf_counter()
    if not args.candidate:
        parser.error("need at least one --candidate metrics CSV")
    baseline = _read_reports(args.baseline)
    candidates = [r for p in args.candidate for r in _read_reports(p)]
    rows = compare_rows(baseline, candidates)
    _writable(args.out)
    with Path(args.out).open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=COMPARE_COLUMNS)
        w.writeheader()
        w.writerows(rows)
    write_manifest(args.out, "compare", argv, None, [args.baseline, *args.candidate], [args.out], started)
    print(format_table(rows))
    return 0


# --- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="urllc-sched", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-topology", help="generate a topology JSON file")
    g.add_argument("--links", type=int, required=True)
    g.add_argument("--region", type=float, default=120.0, help="side of the square region, meters")
    g.add_argument("--cells", type=_parse_grid, default=None, help="cell grid ROWSxCOLS (default: 40 m cells)")
    g.add_argument("--channels", type=int, default=7)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--tx-power", type=float, default=1.0)
    g.add_argument("--margin-db", type=float, default=10.0)
    g.add_argument("--scope", choices=("graph", "all"), default="graph")
    g.add_argument("--max-link-distance", type=float, default=None)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen_topology)

    d = sub.add_parser("gen-dataset", help="record feature snapshots under the baseline scheduler")
    d.add_argument("--topology", required=True)
    d.add_argument("--snapshots", type=int, default=1000)
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_gen_dataset)

    t = sub.add_parser("train", help="train the GCN-DQN scheduler")
    t.add_argument("--topology", required=True)
    t.add_argument("--episodes", type=int, default=500)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--episode-slots", type=int, default=40)
    t.add_argument("--gamma", type=float, default=0.99)
    t.add_argument("--batch-size", type=int, default=32)
    t.add_argument("--target-sync", type=int, default=100)
    t.add_argument("--buffer", type=int, default=10_000)
    t.add_argument("--lr", type=float, default=1e-3)
    t.add_argument("--updates-per-slot", type=int, default=1)
    t.add_argument("--out", required=True, help="checkpoint path")
    t.add_argument("--log", default=None, help="training log CSV (default: <out>.log.csv)")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="evaluate a scheduler and append metrics CSV rows")
    e.add_argument("--topology", required=True, nargs="+", help="one or more topologies, evaluated in parallel")
    e.add_argument("--method", choices=METHODS, required=True)
    e.add_argument("--checkpoint", default=None)
    e.add_argument("--slots", type=int, default=None)
    e.add_argument("--seed", type=int, default=0, help="seed for evaluation-time randomness")
    e.add_argument("--out", required=True)
    e.add_argument("--overwrite", action="store_true", help="replace the CSV instead of appending")
    e.set_defaults(func=cmd_eval)

    c = sub.add_parser("compare", help="join metrics CSVs against a baseline")
    c.add_argument("--baseline", required=True)
    c.add_argument("--candidate", nargs="+", default=[])
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    try:
        return args.func(args, sub, argv)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
