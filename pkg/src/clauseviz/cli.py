"""Command-line entry points: produce, view, render, transform.

Exit codes: 0 success, 1 usage error, 2 runtime error.  Diagnostics go to
stderr; `--stats` prints machine-readable JSON to stdout.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time

from . import config as config_mod
from . import render as render_mod
from .api import ApiServer
from .contraction import build_hierarchy, single_level, write_hierarchy
from .formats import parse_dimacs_file, parse_drat_file
from .graph import GraphState, write_dot, write_edge_list
from .layout import layout, multilevel_layout, read_positions, write_positions
from .session import EventLog, Session, SessionRunner
from .wire import ConsumerServer, producer_session, solver_adapter_events

log = logging.getLogger("clauseviz.cli")


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _address(value: str):
    host, _, port = value.rpartition(":")
    if not host or not port.isdigit():
        raise argparse.ArgumentTypeError(f"expected HOST:PORT, got {value!r}")
    return host, int(port)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file")
    for opt in config_mod.OPTIONS:
        kwargs = {"default": None, "help": opt.help, "dest": opt.key}
        if isinstance(opt.default, bool):
            kwargs["action"] = "store_true"
        elif opt.key in ("palette", "chunk_policy"):
            kwargs["type"] = opt.parse
        elif isinstance(opt.default, int):
            kwargs["type"] = int
        elif isinstance(opt.default, float):
            kwargs["type"] = float
        p.add_argument(f"--{opt.name}", **kwargs)


def _resolved(args) -> dict:
    flags = {opt.key: getattr(args, opt.key, None) for opt in config_mod.OPTIONS}
    return config_mod.resolve(flags, args.config)


def build_parser() -> Parser:
    parser = Parser(prog="clauseviz",
                    description="SAT instance and clausal proof visualizer")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("produce", help="stream a proof or solver run to a consumer")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--proof", help="textual DRAT proof file")
    src.add_argument("--solver", help="solver command emitting DRAT on stdout")
    p.add_argument("--connect", type=_address, required=True, metavar="HOST:PORT")
    p.add_argument("--rate", type=float, default=0.0,
                   help="throttle in events/sec (0 = unthrottled)")
    p.add_argument("--num-variables", type=int, default=0,
                   help="variable count hint for the Hello message")
    p.add_argument("--stats", action="store_true")

    p = sub.add_parser("view", help="run the consumer: listener, session, API")
    p.add_argument("--cnf", required=True)
    p.add_argument("--listen", type=_address, default=("127.0.0.1", 35061),
                   metavar="HOST:PORT")
    p.add_argument("--api", type=_address, default=("127.0.0.1", 8080),
                   metavar="HOST:PORT")
    p.add_argument("--no-autoplay", action="store_true")
    p.add_argument("--stats", action="store_true")
    _add_config_flags(p)

    p = sub.add_parser("render", help="headless frame export from a proof")
    p.add_argument("--cnf", required=True)
    p.add_argument("--proof", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--frames", type=int, default=100)
    p.add_argument("--relayout-every", type=int, default=0,
                   help="relayout every N frames (0 = never)")
    p.add_argument("--svg", action="store_true", help="also write SVG frames")
    p.add_argument("--no-png", action="store_true")
    p.add_argument("--width", type=int, default=1920)
    p.add_argument("--height", type=int, default=1080)
    p.add_argument("--stats", action="store_true")
    _add_config_flags(p)

    p = sub.add_parser("transform", help="one-shot CNF -> graph/layout export")
    p.add_argument("--cnf", required=True)
    p.add_argument("--out", help="weighted edge list output file")
    p.add_argument("--dot", help="DOT output file")
    p.add_argument("--layout-out", help="positions output file ('node x y')")
    p.add_argument("--warm-start", help="positions file to seed the layout")
    p.add_argument("--hierarchy-out", help="directory for level mapping files")
    p.add_argument("--multilevel", action="store_true",
                   help="lay out the full graph through the hierarchy")
    p.add_argument("--stats", action="store_true")
    _add_config_flags(p)
    return parser


def _cmd_produce(args) -> int:
    if args.proof:
        events = parse_drat_file(args.proof)
    else:
        events = solver_adapter_events(args.solver)
    outcome = producer_session(events, args.connect, rate=args.rate,
                               num_variables=args.num_variables)
    print(f"sent {outcome.sent} events", file=sys.stderr)
    if args.stats:
        json.dump({"sent": outcome.sent, "terminated": outcome.terminated},
                  sys.stdout)
        print()
    return 0


def _cmd_view(args) -> int:
    resolved = _resolved(args)
    formula = parse_dimacs_file(args.cnf)
    session_config = config_mod.session_config_from(resolved)
    session = Session(formula, session_config)
    consumer = ConsumerServer(args.listen[0], args.listen[1], session.log)
    consumer.start()
    runner = SessionRunner(session).start()
    api = ApiServer(runner, args.api[0], args.api[1]).start()
    if not args.no_autoplay:
        runner.submit(session.play)
    print(f"listening for producer on {consumer.address[0]}:{consumer.port}; "
          f"control API on http://{api.address[0]}:{api.port}", file=sys.stderr)
    try:
        while True:
            time.sleep(0.5)
    except KeyboardInterrupt:
        print("shutting down", file=sys.stderr)
    finally:
        api.stop()
        runner.stop()
        consumer.stop()
    if args.stats:
        json.dump(session.get_state(), sys.stdout)
        print()
    return 0


def _cmd_render(args) -> int:
    resolved = _resolved(args)
    formula = parse_dimacs_file(args.cnf)
    session_config = config_mod.session_config_from(resolved)
    event_log = EventLog(session_config.ram_budget_events,
                         session_config.spill_dir)
    for kind, lits in parse_drat_file(args.proof):
        event_log.append(kind, lits)
    event_log.close("proof_loaded")
    session = Session(formula, session_config, event_log)
    style = render_mod.RenderStyle(width=args.width, height=args.height,
                                   palette=session_config.heat.palette)
    manifest = render_mod.export_sequence(
        session, args.out, resolved["fps"], args.frames,
        relayout_every=args.relayout_every, style=style,
        write_png=not args.no_png, write_svg=args.svg)
    print(f"wrote {args.frames} frame(s) to {args.out}", file=sys.stderr)
    print("assemble with: "
          f"{render_mod.encoder_command(resolved['fps'], out_dir=args.out)}",
          file=sys.stderr)
    if args.stats:
        json.dump({"frames": args.frames, "events": manifest["total_events"],
                   "out": args.out}, sys.stdout)
        print()
    return 0


def _cmd_transform(args) -> int:
    resolved = _resolved(args)
    formula = parse_dimacs_file(args.cnf)
    session_config = config_mod.session_config_from(resolved)
    state = GraphState.build_initial(formula, session_config.reduction,
                                     session_config.weight_fn)
    graph = state.graph
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fp:
            write_edge_list(graph, fp)
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fp:
            write_dot(graph, fp)
    hierarchy = None
    if args.hierarchy_out or args.multilevel \
            or graph.num_nodes > session_config.contract_target:
        hierarchy = build_hierarchy(graph, session_config.contract_target,
                                    seed=session_config.seed)
        if args.hierarchy_out:
            write_hierarchy(hierarchy, args.hierarchy_out)
    if args.layout_out:
        warm = None
        if args.warm_start:
            with open(args.warm_start, "r", encoding="utf-8") as fp:
                warm = read_positions(fp)
        if args.multilevel:
            pos = multilevel_layout(hierarchy or single_level(graph),
                                    session_config.layout)
        else:
            top = (hierarchy or single_level(graph)).top
            pos = layout(top, session_config.layout, warm_start=warm)
        with open(args.layout_out, "w", encoding="utf-8") as fp:
            write_positions(pos, fp)
    if args.stats:
        json.dump({"variables": graph.num_nodes, "edges": graph.edge_count,
                   "clauses": len(formula.clauses),
                   "total_weight": graph.total_weight(),
                   "levels": hierarchy.depth if hierarchy else 1},
                  sys.stdout)
        print()
    return 0


_COMMANDS = {
    "produce": _cmd_produce,
    "view": _cmd_view,
    "render": _cmd_render,
    "transform": _cmd_transform,
}


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 130
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        log.debug("unhandled failure", exc_info=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
