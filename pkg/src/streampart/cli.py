"""Command line entry point: ``streampart {gen,run,sweep,knn,analyze,report}``.

Any long option may also come from ``--config FILE`` holding ``key = value``
lines (``#`` comments allowed); flags given on the command line win.
Exit status is 0 on success, 1 on bad usage and 2 when a run fails.
"""
from __future__ import annotations

import argparse
import logging
import shlex
import sys
from pathlib import Path

import numpy as np

from . import __version__, analysis, egypt, harness, knn
from .core import CSV_FIELDS, default_capacity, evaluate
from .ppm import PlantedConfig, generate, stream
from .streams import read_labels, read_stream, write_labels, write_stream

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    """``0.1,0.2`` or ``start:stop:step`` (stop inclusive)."""
    if ":" in text:
        a, b, s = (float(x) for x in text.split(":"))
        if s <= 0:
            raise argparse.ArgumentTypeError("step must be positive")
        count = int(round((b - a) / s)) + 1
        return [round(a + i * s, 10) for i in range(count)]
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _add_model(p, required=True):
    p.add_argument("--n", type=int, required=required)
    p.add_argument("--k", type=int, required=required)
    p.add_argument("--p", type=float, required=required)
    p.add_argument("--q", type=float, required=required)


def _add_egypt(p):
    g = p.add_argument_group("egypt")
    g.add_argument("--buffer", type=int, default=500, help="buffer size B")
    g.add_argument("--mode", choices=["threshold", "argmax"], default="argmax")
    g.add_argument("--s-size", type=int)
    g.add_argument("--r-size", type=int)
    g.add_argument("--p-hat", type=float)
    g.add_argument("--q-hat", type=float)
    g.add_argument("--m-scale", type=float, default=1.0)
    g.add_argument("--sample-seed", type=int, help="overrides the seed-derived sample seed")
    g.add_argument("--estimate-pq", action="store_true", help="experimental plug-in p/q estimate")
    g.add_argument("--zero-rule", choices=["votes", "smallest-id"], default="votes")


def _add_out(p):
    p.add_argument("--out", help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="streampart", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("--config", help="key = value file of default options")
    common = _Parser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", parents=[common], help="sample G(n,k,p,q) and write its stream")
    _add_model(g)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--stream-out", required=True)
    g.add_argument("--truth-out", required=True)

    r = sub.add_parser("run", parents=[common], help="one partitioning run, one CSV row")
    _add_model(r, required=False)
    r.add_argument("--stream", help="read a stream file instead of generating")
    r.add_argument("--truth", help="ground-truth file for --stream")
    r.add_argument("--seed", type=int, required=True)
    r.add_argument("--algorithm", choices=harness.ALGORITHMS, default="egypt")
    r.add_argument("--nu", type=float, default=1.0, help="capacity slack: cap = ceil(nu n / k)")
    r.add_argument("--run-id", default="run")
    r.add_argument("--assignment-out", help="write the vertex -> machine map")
    _add_egypt(r)
    _add_out(r)

    s = sub.add_parser("sweep", parents=[common], help="seeded grid over gap, k, B and algorithm")
    s.add_argument("--n", type=int, default=2000)
    s.add_argument("--q", type=float, default=0.05)
    s.add_argument("--gaps", type=_floats, default=harness.default_gaps())
    s.add_argument("--ks", type=_ints, default=[2, 4, 8, 16])
    s.add_argument("--bs", type=_ints, default=harness.default_bs())
    s.add_argument("--repeats", type=int, default=5)
    s.add_argument("--algorithms", type=lambda t: t.split(","), default=["egypt", "lwd"])
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--summary-out", help="also write per-cell mean/variance")
    _add_egypt(s)
    _add_out(s)

    kn = sub.add_parser("knn", parents=[common], help="k'-NN stream from labelled points")
    kn.add_argument("--input", help="CSV of label,v1..vd rows (stream order)")
    kn.add_argument("--points", type=int, default=5000, help="synthetic: number of points")
    kn.add_argument("--dim", type=int, default=16)
    kn.add_argument("--classes", type=int, default=2)
    kn.add_argument("--separation", type=float, default=10.0, help="centre distance in sigmas")
    kn.add_argument("--seed", type=int, default=0)
    kn.add_argument("--k-prime", type=int, default=5)
    kn.add_argument("--reference", choices=[r.value for r in knn.Reference], default="first-b")
    kn.add_argument("--b", type=int, help="reference prefix size (default: --buffer)")
    kn.add_argument("--algorithm", choices=list(harness.ALGORITHMS) + ["none"], default="none")
    kn.add_argument("--stream-out")
    kn.add_argument("--truth-out")
    _add_egypt(kn)
    _add_out(kn)

    an = sub.add_parser("analyze", parents=[common], help="closed-walk profile and gap thresholds")
    an.add_argument("--m", type=int, default=10, help="vertices per cluster")
    an.add_argument("--k", type=int, default=2)
    an.add_argument("--p", type=float, default=0.5)
    an.add_argument("--q", type=float, default=0.1)
    an.add_argument("--t-max", type=int, default=5)
    an.add_argument("--gap-n", type=int, default=10**6)
    an.add_argument("--table", choices=["walks", "gaps", "both"], default="both")
    _add_out(an)

    rp = sub.add_parser("report", parents=[common], help="figure-shaped tables from a sweep CSV")
    rp.add_argument("--input", required=True)
    _add_out(rp)
    return ap


def config_tokens(path: str) -> list[str]:
    """Turn ``key = value`` lines into ``--key value`` tokens."""
    tokens = []
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (x.strip() for x in line.split("=", 1))
        flag = "--" + key.replace("_", "-")
        low = value.lower()
        if low in ("true", "yes", "on"):
            tokens.append(flag)
        elif low in ("false", "no", "off"):
            continue
        else:
            tokens += [flag, *shlex.split(value)]
    return tokens


def _split_config(argv: list[str]) -> tuple[str | None, list[str]]:
    cfg, rest, i = None, [], 0
    while i < len(argv):
        a = argv[i]
        if a == "--config":
            if i + 1 >= len(argv):
                raise UsageError("--config needs a file")
            cfg, i = argv[i + 1], i + 2
            continue
        if a.startswith("--config="):
            cfg = a.split("=", 1)[1]
        else:
            rest.append(a)
        i += 1
    return cfg, rest


def parse(argv: list[str]) -> argparse.Namespace:
    ap = build_parser()
    cfg, rest = _split_config(argv)
    if cfg:
        # config values go right after the subcommand so explicit flags override them
        names = set(ap._subparsers._group_actions[0].choices)
        pos = next((i for i, a in enumerate(rest) if a in names), None)
        if pos is None:
            ap.error("missing subcommand")
        rest = rest[: pos + 1] + config_tokens(cfg) + rest[pos + 1:]
    return ap.parse_args(rest)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def egypt_params(a, B: int | None = None, sample_seed: int = 0) -> egypt.EgyptParams:
    return egypt.EgyptParams(
        B=a.buffer if B is None else B, s_size=a.s_size, r_size=a.r_size, mode=a.mode,
        p_hat=a.p_hat, q_hat=a.q_hat, m_scale=a.m_scale,
        sample_seed=a.sample_seed if a.sample_seed is not None else sample_seed,
        estimate_pq=a.estimate_pq, zero_rule=a.zero_rule)


def cmd_gen(a) -> None:
    graph_seed, order_seed, _ = harness.derive_seeds(a.seed)
    edges, truth = generate(PlantedConfig(a.n, a.k, a.p, a.q, graph_seed, order_seed))
    write_stream(a.stream_out, stream(edges, order_seed), a.k)
    write_labels(a.truth_out, truth.psi)
    logging.info("wrote n=%d m=%d", edges.n, edges.m)


def cmd_run(a) -> None:
    graph_seed, order_seed, sample_seed = harness.derive_seeds(a.seed)
    if a.stream:
        if not a.truth:
            raise UsageError("--stream needs --truth")
        st, k = read_stream(a.stream)
        if a.k is not None and a.k != k:
            raise UsageError(f"--k {a.k} disagrees with stream header k={k}")
        labels = read_labels(a.truth)
        if len(labels) != st.n:
            raise UsageError(f"truth has {len(labels)} vertices, stream has {st.n}")
        edges, p, q = st.to_edges(), a.p, a.q
    else:
        missing = [f"--{x}" for x in ("n", "k", "p", "q") if getattr(a, x) is None]
        if missing:
            raise UsageError(f"need {' '.join(missing)} or --stream/--truth")
        edges, truth = generate(PlantedConfig(a.n, a.k, a.p, a.q, graph_seed, order_seed))
        st, k, labels, p, q = stream(edges, order_seed), a.k, truth.psi, a.p, a.q
    params = egypt_params(a, sample_seed=sample_seed) if a.algorithm == "egypt" else None
    cap = default_capacity(st.n, k, a.nu)
    nan = float("nan")
    rep = harness.measure(st, edges, labels, k, a.algorithm, params, cap, run_id=a.run_id,
                          p=nan if p is None else p, q=nan if q is None else q, seed=a.seed)
    _emit(harness.write_csv([rep.as_row()], CSV_FIELDS), a.out)
    if a.assignment_out:
        assignment, _ = harness.partition(st, k, a.algorithm, params, cap)
        write_labels(a.assignment_out, assignment)
    for key, val in rep.extras.items():
        logging.info("%s=%s", key, val)


def cmd_sweep(a) -> None:
    template = egypt_params(a, B=max(a.bs))
    spec = harness.SweepSpec(n=a.n, q=a.q, gaps=a.gaps, ks=a.ks, Bs=a.bs, repeats=a.repeats,
                             base_seed=a.seed, algorithms=a.algorithms, egypt_template=template,
                             jobs=a.jobs)
    rows, summary = harness.sweep(spec)
    _emit(harness.write_csv(rows, CSV_FIELDS), a.out)
    if a.summary_out:
        harness.write_csv(summary, harness.SUMMARY_FIELDS, a.summary_out)


def cmd_knn(a) -> None:
    if a.input:
        ps = knn.load_points(a.input)
    else:
        centers = knn.separated_centers(a.classes, a.dim, a.separation)
        ps = knn.gaussian_clusters(a.points, a.dim, centers, 1.0, seed=a.seed)
    st, edges = knn.knn_stream(ps, a.k_prime, a.reference, a.buffer if a.b is None else a.b)
    k = len(np.unique(ps.labels))
    labels = np.unique(ps.labels, return_inverse=True)[1]
    lines = ["class,conductance"]
    lines += [f"{c},{phi!r}" for c, phi in knn.class_conductances(ps, edges).items()]
    if a.algorithm != "none":
        params = egypt_params(a, sample_seed=a.seed) if a.algorithm == "egypt" else None
        assignment, _ = harness.partition(st, k, a.algorithm, params)
        lam, rho, prec, _ = evaluate(assignment, edges, labels, k)
        lines += ["", "algorithm,B,lambda,rho,precision",
                  f"{a.algorithm},{params.B if params else 0},{lam!r},{rho!r},{prec!r}"]
    _emit("\n".join(lines) + "\n", a.out)
    if a.stream_out:
        write_stream(a.stream_out, st, k)
    if a.truth_out:
        write_labels(a.truth_out, labels)


def cmd_analyze(a) -> None:
    parts = []
    if a.table in ("walks", "both"):
        rows = ["t,p_t,q_t,gap_t"]
        for w in analysis.profile_table(a.m, a.k, a.p, a.q, a.t_max):
            rows.append(f"{w.t},{w.p_t!r},{w.q_t!r},{w.p_t - w.q_t!r}")
        parts.append("\n".join(rows))
    if a.table in ("gaps", "both"):
        rows = ["n,k,t,gap_threshold"]
        for t in range(2, a.t_max + 1):
            rows.append(f"{a.gap_n},{a.k},{t},{analysis.gap_threshold(a.gap_n, a.k, t)!r}")
        parts.append("\n".join(rows))
    _emit("\n\n".join(parts) + "\n", a.out)


def cmd_report(a) -> None:
    table = harness.report(harness.read_runs(a.input))
    _emit(harness.write_csv(table, harness.REPORT_FIELDS), a.out)


COMMANDS = {"gen": cmd_gen, "run": cmd_run, "sweep": cmd_sweep, "knn": cmd_knn,
            "analyze": cmd_analyze, "report": cmd_report}


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse(argv)
    except UsageError as exc:
        print(f"streampart: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"streampart: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"streampart: {args.command} failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
