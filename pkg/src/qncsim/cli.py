"""Command-line front end.

Subcommands: deploy | simulate | tail | sweep | rip-bound | recover.
Exit codes: 0 success, 1 invalid configuration, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .coding import (QuantizerSpec, build_mixing_matrix, calibrate_dynamic_range,
                     draw_coefficients, injection_variance, run_qnc,
                     save_measurement_system)
from .errors import ConfigError, NumericalError, QncError
from .harness import (END_TO_END_HEADER, derive_seed, end_to_end_line, load_records,
                      parse_sweep_config, rip_report, run_end_to_end, run_sweep,
                      summarize_records, write_rip_report, write_summary)
from .network import DeploymentConfig, generate_deployment, load_graph, save_graph
from .recovery import generate_sparse_message, random_orthonormal_basis
from .rip import worst_case_tail, write_tail_curve
from .tail import gaussian_tail


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        sys.exit(1)


def _graph_from_args(args) -> object:
    if args.graph:
        return load_graph(args.graph)
    if args.nodes is None or args.edges is None:
        raise ConfigError("provide --graph or both --nodes and --edges")
    return generate_deployment(
        DeploymentConfig(args.nodes, args.edges, args.capacity, seed=args.seed)
    )


def _cmd_deploy(args) -> int:
    graph = generate_deployment(
        DeploymentConfig(args.nodes, args.edges, args.capacity, seed=args.seed)
    )
    save_graph(graph, args.out)
    print(f"wrote {args.out}: nodes={graph.node_count} edges={graph.edge_count} "
          f"gateway={graph.gateway}")
    return 0


def _cmd_simulate(args) -> int:
    graph = _graph_from_args(args)
    schedule = draw_coefficients(graph, args.horizon, args.seed)
    signal = generate_sparse_message(graph.node_count, args.sparsity,
                                     seed=derive_seed(args.seed or 0, 0x51))
    basis = random_orthonormal_basis(graph.node_count,
                                     seed=derive_seed(args.seed or 0, 0xB5))
    message = basis @ signal.values
    if args.bits is None:
        quantizer = QuantizerSpec.disabled()
    else:
        quantizer = QuantizerSpec(args.bits, calibrate_dynamic_range(graph, schedule, message))
    observed, noise_effect, system = run_qnc(graph, schedule, quantizer, message)
    save_measurement_system(system, args.out)
    print(f"wrote {args.out}: m={system.measurement_count} "
          f"noise_norm={np.linalg.norm(noise_effect):.6g} "
          f"saturations={system.saturations}")
    return 0


def _cmd_tail(args) -> int:
    graph = _graph_from_args(args)
    schedule = draw_coefficients(graph, args.horizon, args.seed)
    mixing = build_mixing_matrix(schedule, graph)
    var = injection_variance(mixing, graph.node_count)
    result = worst_case_tail(mixing, graph, var, args.epsilon,
                             budget=args.budget, seed=args.seed or 0)
    m = mixing.shape[0]
    p_gauss = gaussian_tail(m, args.epsilon)
    print(f"m={m} epsilon={args.epsilon} p_tail_qnc={result.p_tail:.6e} "
          f"p_tail_gauss={p_gauss:.6e} evaluations={result.evaluations}")
    if args.out:
        write_tail_curve(args.out, [(0, m, args.epsilon, result.p_tail, p_gauss)])
        print(f"wrote {args.out}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = parse_sweep_config(args.config)
    if args.output:
        from dataclasses import replace
        cfg = replace(cfg, output=args.output)
    records = run_sweep(cfg)
    print(f"{len(records)} records" + (f" -> {cfg.output}" if cfg.output else ""))
    if cfg.output:
        summary_path = args.summary or (cfg.output + ".summary")
        write_summary(summary_path, summarize_records(records))
        print(f"wrote {summary_path}")
    return 0


def _cmd_rip_bound(args) -> int:
    records = load_records(args.records)
    k_values = [int(v) for v in args.k.replace(",", " ").split()]
    rows = rip_report(records, args.nodes, k_values)
    vacuous = sum(r.vacuous for r in rows)
    if args.out:
        write_rip_report(args.out, rows)
        print(f"wrote {args.out}")
    print(f"{len(rows)} bounds, {vacuous} vacuous")
    for row in rows[: args.show]:
        print(f"  |E|={row.edge_count} delta={row.delta} m={row.m} k={row.k} "
              f"p_rip={row.p_rip:.6g}{' (vacuous)' if row.vacuous else ''}")
    return 0


def _cmd_recover(args) -> int:
    record = run_end_to_end(args.nodes, args.edges, args.sparsity, args.horizon,
                            args.bits, args.seed or 0, capacity=args.capacity)
    line = end_to_end_line(record)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(END_TO_END_HEADER + "\n" + line + "\n")
        print(f"wrote {args.out}")
    print(END_TO_END_HEADER)
    print(line)
    return 0


def _add_graph_options(sub) -> None:
    sub.add_argument("--graph", help="load a saved deployment instead of generating")
    sub.add_argument("--nodes", type=int, default=None, help="node count (generated)")
    sub.add_argument("--edges", type=int, default=None, help="edge count (generated)")
    sub.add_argument("--capacity", type=float, default=1.0,
                     help="edge capacity in bits per use (default 1.0)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qncsim", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("deploy", help="generate a random deployment")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--edges", type=int, required=True)
    p.add_argument("--capacity", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="graph file path")
    p.set_defaults(func=_cmd_deploy)

    p = subs.add_parser("simulate", help="run the recursion, export the system")
    _add_graph_options(p)
    p.add_argument("--horizon", type=int, default=6, help="stop time (default 6)")
    p.add_argument("--sparsity", type=int, default=2)
    p.add_argument("--bits", type=float, default=None,
                   help="quantizer bits per unit capacity (omit to disable)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="measurement-system file path")
    p.set_defaults(func=_cmd_simulate)

    p = subs.add_parser("tail", help="worst-case tail probability of one deployment")
    _add_graph_options(p)
    p.add_argument("--horizon", type=int, default=6)
    p.add_argument("--epsilon", type=float, required=True, help="deviation threshold")
    p.add_argument("--budget", type=int, default=128, help="search evaluations (default 128)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="optional tail-curve CSV")
    p.set_defaults(func=_cmd_tail)

    p = subs.add_parser("sweep", help="run a sweep from a config file")
    p.add_argument("--config", required=True, help="key = value config ([sweep] section)")
    p.add_argument("--output", default=None, help="override output path")
    p.add_argument("--summary", default=None, help="summary path (default <output>.summary)")
    p.set_defaults(func=_cmd_sweep)

    p = subs.add_parser("rip-bound", help="RIP probability bounds from sweep records")
    p.add_argument("--records", required=True, help="sweep CSV path")
    p.add_argument("--nodes", type=int, required=True, help="message dimension n")
    p.add_argument("--k", default="1,2,5", help="sparsities, comma separated (default 1,2,5)")
    p.add_argument("--show", type=int, default=10, help="rows to print (default 10)")
    p.add_argument("--out", default=None, help="optional report CSV")
    p.set_defaults(func=_cmd_rip_bound)

    p = subs.add_parser("recover", help="end-to-end pipeline with l1-min decoding")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--edges", type=int, required=True)
    p.add_argument("--sparsity", type=int, required=True)
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--bits", type=float, default=6.0,
                   help="quantizer bits per unit capacity (default 6)")
    p.add_argument("--capacity", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="optional metrics CSV")
    p.set_defaults(func=_cmd_recover)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, QncError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
