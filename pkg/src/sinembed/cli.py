"""Command-line entry point: ``sinembed <subcommand> ...``.

Every file a subcommand writes starts with ``# command:`` and ``# params:``
header lines; re-running that command reproduces the file byte for byte.
Wall-clock timings go to stderr only.
"""
import argparse
import contextlib
import json
import math
import shlex
import sys
import time
import warnings

import numpy as np

from . import harness, kcenter, metric, range as range_mod, snowflake, stable, threshold
from .errors import GuardError, ParameterError


def _header(args, extra=None):
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "json", "argv")}
    params.update(extra or {})
    return ["command: sinembed " + shlex.join(args.argv),
            "params: " + json.dumps(params, sort_keys=True, default=str)]


@contextlib.contextmanager
def _sink(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w") as fh:
            yield fh


def _emit_matrix(args, matrix, extra=None):
    with _sink(args.output) as fh:
        for line in _header(args, extra):
            fh.write("# " + line + "\n")
        np.savetxt(fh, np.atleast_2d(matrix), fmt="%.17g")


def _emit_rows(args, columns, rows, extra=None, path=None):
    with _sink(path if path is not None else args.output) as fh:
        for line in _header(args, extra):
            fh.write("# " + line + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _summary(args, summary):
    if args.json:
        print(json.dumps(summary, sort_keys=True, default=_jsonable))
    else:
        for key, val in summary.items():
            print(f"{key}: {_fmt(val) if not isinstance(val, (list, dict)) else json.dumps(val, default=_jsonable)}")


def _jsonable(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    return str(v)


def _points(args):
    return harness.load_points(args.input)


# ---- subcommands -----------------------------------------------------------

SELFTEST = (
    ("density(1, 0) = 1/pi", lambda: stable.density(1.0, np.array([0.0]))[0], 1.0 / math.pi, 1e-8),
    ("density(2, 0) = 1/(2 sqrt(pi))", lambda: stable.density(2.0, np.array([0.0]))[0],
     0.5 / math.sqrt(math.pi), 1e-8),
    ("abs_moment(2, 1) = 2/sqrt(pi)", lambda: stable.abs_moment(2.0, 1.0), 2.0 / math.sqrt(math.pi), 1e-6),
    ("abs_moment(1, 0.5) = sqrt(2)", lambda: stable.abs_moment(1.0, 0.5), math.sqrt(2.0), 1e-6),
    ("H(2, 2, 1) = (1 - e^-4)/2", lambda: stable.transform_H(2.0, 2.0, 1.0), (1 - math.exp(-4)) / 2, 1e-8),
    ("P_1 = 2/pi", lambda: stable.cosine_moment(1.0), 2.0 / math.pi, 1e-12),
    ("P_2 = 1/2", lambda: stable.cosine_moment(2.0), 0.5, 1e-12),
)


def cmd_stable(args):
    if args.action == "selftest":
        rows = []
        for name, fn, want, tol in SELFTEST:
            got = float(fn())
            rows.append((name, got, want, "PASS" if abs(got - want) <= tol else "FAIL"))
        _emit_rows(args, ["check", "value", "expected", "status"], rows)
        if any(r[3] == "FAIL" for r in rows):
            raise SystemExit(1)
        return
    rows = []
    for a in args.a:
        rows.append(("H", a, stable.transform_H(args.p, args.q, a)))
    for x in args.density:
        rows.append(("density", x, float(stable.density(args.p, np.array([x]))[0])))
    rows.append(("P_q", args.q, stable.cosine_moment(args.q)))
    if args.q < args.p:
        rows.append(("Q", args.q, stable.constant_Q(args.p, args.q)))
    if args.count:
        draws = stable.StableSampler(args.p, args.seed).sample(args.count)
        rows.extend(("sample", i, float(x)) for i, x in enumerate(draws))
    _emit_rows(args, ["quantity", "argument", "value"], rows)


def cmd_gen(args):
    spec = harness.DatasetSpec(args.kind, args.n, args.m, args.seed, tuple(args.target),
                               args.clusters, tuple(args.gaps), args.norm)
    _emit_matrix(args, harness.generate_dataset(spec))


def cmd_embed_threshold(args):
    X = _points(args)
    E = threshold.make_threshold_embedding(args.p, args.q, args.s, args.k, X.shape[1], args.seed,
                                           compensated=not args.fast)
    _emit_matrix(args, E(X))


def _range_params(args, n):
    return range_mod.RangeParams(args.p, args.q, args.R, args.eps, args.n or n, args.method,
                                 args.c_dim, args.normalization)


def cmd_embed_range(args):
    X = _points(args)
    pr = _range_params(args, len(X))
    E = range_mod.make_range_embedding(pr, X.shape[1], args.seed, compensated=not args.fast)
    _emit_matrix(args, E(X), {"threshold": E.s, "k": E.k, "scale": E.scale})


def cmd_embed_snowflake(args):
    X = _points(args)
    phi = snowflake.build_snowflake(X, args.alpha, args.eps, args.p, args.q, args.kprime, args.seed,
                                    ddim=args.ddim)
    Y = phi(X)
    extra = {"M": phi.M, "v": phi.params.v, "scales": len(phi.params.scales)}
    _emit_matrix(args, Y, extra)
    if args.report:
        i, j = np.triu_indices(len(X), 1)
        t = harness.pair_norms(X, i, j, args.p)
        e = harness.pair_norms(Y, i, j, args.q)
        ta = t ** args.alpha
        _emit_rows(args, ["i", "j", "t", "t_alpha", "embedded", "ratio"],
                   zip(i, j, t, ta, e, e / ta), extra, path=args.report)


def cmd_embed_intrinsic(args):
    X = _points(args)
    E = metric.intrinsic_embedding(X, args.s, args.p, args.q, args.eps, args.seed, args.k,
                                   ddim=args.ddim)
    _emit_matrix(args, E.images, {"ddim": E.ddim, "partitions": E.family.m, "net": len(E.net)})


def cmd_net(args):
    net = metric.build_net(_points(args), args.gamma, args.p)
    _emit_rows(args, ["point", "net_point"], zip(range(len(net.assignment)), net.assignment),
               {"net_size": len(net)})


def cmd_hierarchy(args):
    H = metric.build_hierarchy(_points(args), args.p)
    rows = []
    for lvl, pts in enumerate(H.levels):
        parents = H.parents[lvl] if lvl < len(H.parents) else pts
        rows.extend((lvl, int(a), int(b)) for a, b in zip(pts, parents))
    _emit_rows(args, ["level", "point", "parent"], rows, {"unit": H.unit, "height": H.height})


def cmd_ddim(args):
    X = _points(args)
    _summary(args, {"points": len(X), "ddim": metric.estimate_doubling_dimension(X, args.p)})


def cmd_padded(args):
    X = _points(args)
    D = metric.distance_matrix(X, args.p)
    delta = args.delta if args.delta else float(D.max()) / 4.0
    fam = metric.padded_decomposition(None, delta, args.eps, seed=args.seed, c0=args.c0, D=D)
    extra = {"delta_used": delta, "partitions": fam.m, "c0_history": fam.c0_history,
             "pad_radius": fam.pad_radius, "ddim": fam.ddim}
    with _sink(args.out) as fh:
        for line in _header(args, extra):
            fh.write("# " + line + "\n")
        for x in range(fam.assignments.shape[1]):
            fh.write(" ".join(f"{j},{int(c)}" for j, c in enumerate(fam.assignments[:, x])) + "\n")
    _summary(args, {"partitions": fam.m, "c0": fam.c0, "min_padding": float(fam.padding.min()),
                    "max_diameter": float(metric.cluster_diameters(fam, D).max()), "delta": delta})


def cmd_kcenter(args):
    X = _points(args)
    if args.method == "gonzalez":
        sol = kcenter.gonzalez(X, args.k, args.p)
    elif args.method == "brute":
        sol = kcenter.brute_force_kcenter(X, args.k, args.p)
    else:
        sol = kcenter.kcenter_pipeline(X, args.k, args.eps, args.seed, args.p)
    rows = [("center", int(c)) for c in sol.centers] + [("radius", sol.radius)]
    if args.compare:
        opt = kcenter.brute_force_kcenter(X, args.k, args.p).radius
        rows += [("optimum", opt), ("gap", sol.radius / opt if opt > 0 else 1.0)]
    _emit_rows(args, ["field", "value"], rows)


def cmd_dims(args):
    rows = []
    for eps in args.eps:
        s = range_mod.select_threshold(args.p, args.q, args.R, eps)
        for n in args.n:
            for method in args.methods:
                try:
                    k = range_mod.required_dimension(n, eps, s, args.p, args.q, method, args.c_dim,
                                                     max_k=math.inf)
                except ParameterError:
                    k = "n/a"
                rows.append((eps, n, method, s, k))
    _emit_rows(args, ["eps", "n", "method", "threshold", "k"], rows)


def cmd_report(args):
    X = _points(args)
    ideal = None
    p, q = args.p, args.q
    extra = {}
    if args.embedding == "identity":
        embed, q = harness.identity_embedding, p
    elif args.embedding == "threshold":
        E = threshold.make_threshold_embedding(p, q, args.s, args.k, X.shape[1], args.seed)
        embed = E
        ideal = np.vectorize(lambda t: threshold.expected_transform(p, q, args.s, t) ** (1.0 / q))
    elif args.embedding == "range":
        E = range_mod.make_range_embedding(_range_params(args, len(X)), X.shape[1], args.seed)
        embed = E
        extra = {"threshold": E.s, "k": E.k}
    else:
        phi = snowflake.build_snowflake(X, args.alpha, args.snow_eps, p, q, args.kprime, args.seed)
        embed = phi
        ideal = lambda t: t ** args.alpha  # noqa: E731
        extra = {"M": phi.M}
    band = (1.0, args.R) if args.embedding == "range" else (0.0, math.inf)
    rep = harness.distortion_report(embed, X, p, q, args.budget, args.seed, args.tol, band, ideal)
    rep.summary["params"] = extra
    _emit_rows(args, ["i", "j", "t", "embedded", "ratio", "in_range"], rep.rows(), extra)
    with contextlib.redirect_stdout(sys.stderr if args.output in (None, "-") else sys.stdout):
        _summary(args, rep.summary)


# ---- parser ----------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(prog="sinembed", description="Sine-dampened p-stable embeddings.")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1, help="recorded in report headers")
    ap.add_argument("--json", action="store_true", help="machine-readable summaries")
    # the global flags are also accepted after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_, parents=[common])
        p.set_defaults(func=func)
        return p

    def io_(p, out="--output"):
        p.add_argument("--input", required=True)
        if out:
            p.add_argument(out, default=None)

    def pq(p):
        p.add_argument("--p", type=float, default=1.0)
        p.add_argument("--q", type=float, default=1.0)

    p = add("stable", cmd_stable, "stable-law quantities: H(a), density, P_q, Q, samples")
    p.add_argument("action", nargs="?", choices=("values", "selftest"), default="values")
    pq(p)
    p.add_argument("--a", type=float, nargs="*", default=[0.1, 1.0, 10.0])
    p.add_argument("--density", type=float, nargs="*", default=[])
    p.add_argument("--count", type=int, default=0, help="also print this many seeded draws")
    p.add_argument("--output", default=None)

    p = add("gen", cmd_gen, "generate a dataset")
    p.add_argument("--kind", choices=harness.KINDS, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--target", type=float, nargs=2, default=[1.0, 4.0])
    p.add_argument("--clusters", type=int, default=20)
    p.add_argument("--gaps", type=float, nargs=2, default=[0.1, 10.0])
    p.add_argument("--norm", type=float, default=1.0)
    p.add_argument("--output", default=None)

    p = add("embed-threshold", cmd_embed_threshold, "threshold embedding")
    pq(p)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--fast", action="store_true", help="plain BLAS inner products")
    io_(p)

    def range_flags(p):
        p.add_argument("--R", type=float, default=4.0)
        p.add_argument("--eps", type=float, default=0.3)
        p.add_argument("--n", type=int, default=None, help="point budget (default: input size)")
        p.add_argument("--method", choices=range_mod.METHODS, default="min")
        p.add_argument("--c-dim", type=float, default=1.0)
        p.add_argument("--normalization", choices=range_mod.NORMALIZATIONS, default="auto")

    p = add("embed-range", cmd_embed_range, "range embedding")
    pq(p)
    range_flags(p)
    p.add_argument("--fast", action="store_true")
    io_(p)

    p = add("embed-snowflake", cmd_embed_snowflake, "alpha-snowflake embedding")
    pq(p)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--eps", type=float, default=0.2)
    p.add_argument("--kprime", type=int, default=32)
    p.add_argument("--ddim", type=float, default=None)
    p.add_argument("--report", default=None, help="per-pair ratio CSV")
    io_(p)

    p = add("embed-intrinsic", cmd_embed_intrinsic, "intrinsic-dimension embedding")
    pq(p)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--eps", type=float, default=0.4)
    p.add_argument("--k", type=int, default=200)
    p.add_argument("--ddim", type=float, default=None)
    io_(p)

    p = add("net", cmd_net, "greedy gamma-net")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--p", type=float, default=2.0)
    io_(p)

    p = add("hierarchy", cmd_hierarchy, "hierarchy of 2^i-nets")
    p.add_argument("--p", type=float, default=2.0)
    io_(p)

    p = add("ddim", cmd_ddim, "doubling dimension estimate")
    p.add_argument("--p", type=float, default=2.0)
    io_(p, out=None)

    p = add("padded", cmd_padded, "padded decomposition")
    p.add_argument("--delta", type=float, default=None, help="default: diameter / 4")
    p.add_argument("--eps", type=float, default=0.2)
    p.add_argument("--c0", type=float, default=2.0)
    p.add_argument("--p", type=float, default=2.0)
    io_(p, out="--out")

    p = add("kcenter", cmd_kcenter, "discrete k-center")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eps", type=float, default=0.3)
    p.add_argument("--method", choices=("pipeline", "gonzalez", "brute"), default="pipeline")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--compare", action="store_true")
    io_(p)

    p = add("dims", cmd_dims, "dimension table as CSV")
    pq(p)
    p.add_argument("--R", type=float, default=4.0)
    p.add_argument("--eps", type=float, nargs="+", default=[0.2, 0.3, 0.4, 0.5])
    p.add_argument("--n", type=int, nargs="+", default=[100, 1000, 10000])
    p.add_argument("--methods", nargs="+", choices=range_mod.METHODS, default=list(range_mod.METHODS))
    p.add_argument("--c-dim", type=float, default=1.0)
    p.add_argument("--output", default=None)

    p = add("report", cmd_report, "distortion report")
    pq(p)
    p.add_argument("--embedding", choices=("identity", "threshold", "range", "snowflake"), required=True)
    p.add_argument("--s", type=float, default=20.0)
    p.add_argument("--k", type=int, default=1000)
    range_flags(p)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--snow-eps", type=float, default=0.2)
    p.add_argument("--kprime", type=int, default=32)
    p.add_argument("--budget", type=int, default=harness.PAIR_BUDGET)
    p.add_argument("--tol", type=float, default=0.3)
    io_(p)
    return ap


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    start = time.perf_counter()
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = _warn_to_stderr
            args.func(args)
    except ParameterError as exc:
        print(f"sinembed: parameter error: {exc}", file=sys.stderr)
        return 2
    except GuardError as exc:
        print(f"sinembed: guard exceeded: {exc}", file=sys.stderr)
        return 3
    print(f"# {args.command} finished in {time.perf_counter() - start:.3f} s", file=sys.stderr)
    return 0


def _warn_to_stderr(message, category, filename, lineno, file=None, line=None):
    print(f"sinembed: warning: {message}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
