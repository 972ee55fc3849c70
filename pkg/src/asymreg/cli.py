"""Command-line front end: ``asymreg {rate,run,certify,plot}``.

Exit codes: 0 success, 1 violations or numeric failure, 2 usage, input or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from decimal import ROUND_CEILING, Decimal, localcontext
from fractions import Fraction
from pathlib import Path

from . import certify, rates
from .corpus import builtin_corpus
from .errors import AsymregError, InstanceError, NumericFailure
from .instances import Instance, load_instance

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def preview(value, digits: int = 3) -> str:
    """Scientific preview of a (possibly huge) nonnegative rational, rounded up."""
    q = Fraction(value)
    if q == 0:
        return "0"
    with localcontext() as ctx:
        ctx.prec = digits
        ctx.rounding = ROUND_CEILING
        return format(Decimal(q.numerator) / Decimal(q.denominator), f".{digits - 1}e")


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0 or v != v or v == float("inf"):
        raise argparse.ArgumentTypeError(f"must be a positive finite number: {text!r}")
    return v


def _eps_list(text: str) -> list[float]:
    items = [t for t in text.replace(" ", "").split(",") if t]
    if not items:
        raise argparse.ArgumentTypeError("eps list is empty")
    return [_positive_float(t) for t in items]


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return v


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0: {text!r}")
    return v


def _add_source(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--instance", type=Path, metavar="PATH", help="instance JSON file")
    g.add_argument("--corpus", choices=["builtin"], help="use the builtin corpus")
    p.add_argument("--id", action="append", dest="ids", metavar="ID",
                   help="restrict the corpus to these instance ids (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="asymreg", description="Rates of asymptotic regularity for "
                                     "compositions of averaged maps: rate tables, Picard runs, "
                                     "certification suites and plots.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rate", help="print the rate table for an instance")
    _add_source(p)
    p.add_argument("--eps", type=_eps_list, help="comma-separated eps values (default: instance grid)")
    p.add_argument("--precision", type=_positive_int, default=rates.DEFAULT_PRECISION, metavar="BITS")
    p.add_argument("--out", type=Path, metavar="PATH", help="CSV with the full integer rates")

    p = sub.add_parser("run", help="write the Picard displacement trajectory as CSV")
    _add_source(p)
    p.add_argument("--steps", type=_positive_int, default=100)
    p.add_argument("--out", type=Path, metavar="PATH", help="output CSV (default: stdout)")

    p = sub.add_parser("certify", help="run the certification suites")
    _add_source(p)
    p.add_argument("--suite", action="append", choices=certify.SUITES, dest="suites",
                   help="suite to run (repeatable; default: all)")
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.add_argument("--samples", type=_positive_int, default=10_000, help="samples per suite and instance")
    p.add_argument("--uc-samples", type=_positive_int, default=100_000, help="draws for the convexity lemma")
    p.add_argument("--cap", type=_positive_int, default=100_000, help="Picard step cap for the rate suite")
    p.add_argument("--budget", type=_positive_int, default=10_000, help="Picard budget for the witness suite")
    p.add_argument("--eps", type=_eps_list, help="override every instance eps grid")
    p.add_argument("--precision", type=_positive_int, default=rates.DEFAULT_PRECISION, metavar="BITS")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--report", type=Path, metavar="PATH", help="JSON report file")
    p.add_argument("--timing", action="store_true", help="include runtimes in the report")
    p.add_argument("--falsify", action="store_true", help=argparse.SUPPRESS)

    p = sub.add_parser("plot", help="plot a trajectory CSV as SVG")
    p.add_argument("csv", type=Path, metavar="CSV", help="trajectory written by 'run'")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--instance", type=Path, metavar="PATH", help="instance for the rate markers")
    g.add_argument("--corpus", choices=["builtin"])
    p.add_argument("--id", action="append", dest="ids", metavar="ID")
    p.add_argument("--eps", type=_eps_list, help="eps values for rate markers (default: instance grid)")
    p.add_argument("--precision", type=_positive_int, default=rates.DEFAULT_PRECISION, metavar="BITS")
    p.add_argument("--out", type=Path, required=True, metavar="PATH", help="output SVG")
    return parser


def _instances(args) -> list[Instance]:
    if getattr(args, "instance", None) is not None:
        path = args.instance
        if not path.is_file():
            raise UsageError(f"{path}: no such file")
        try:
            return [load_instance(path)]
        except OSError as exc:
            raise UsageError(f"{path}: {exc.strerror}") from None
        except InstanceError as exc:
            raise UsageError(f"{path}: {exc}") from None
    if getattr(args, "corpus", None) is None:
        return []
    corpus = builtin_corpus()
    if args.ids:
        by_id = {inst.id: inst for inst in corpus}
        missing = [i for i in args.ids if i not in by_id]
        if missing:
            raise UsageError(f"unknown corpus id(s): {', '.join(missing)}")
        return [by_id[i] for i in args.ids]
    return corpus


def _single(args) -> Instance:
    insts = _instances(args)
    if len(insts) != 1:
        raise UsageError("this command needs exactly one instance (use --instance or --corpus with one --id)")
    return insts[0]


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from None


def rate_rows(inst: Instance, eps_list, precision: int) -> list[tuple[float, rates.RateValue, int]]:
    rows = []
    for eps in eps_list:
        psi = rates.psi(inst.m, inst.alphas, inst.K, Fraction(eps) / 6, precision)
        sig = rates.sigma(inst.m, inst.alphas, inst.K, inst.b, inst.d, eps, precision)
        rows.append((eps, psi, sig))
    return rows


def cmd_rate(args, out) -> int:
    insts = _instances(args)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["instance", "eps", "psi_upper", "sigma"])
    for inst in insts:
        eps_list = args.eps or inst.eps_grid
        alpha = inst.alpha
        print(f"# {inst.id}: m={inst.m} alpha={alpha} b={inst.b!r} d={inst.d!r}", file=out)
        print(f"{'eps':>12}  {'psi(eps/6)':>12}  {'sigma':>12}", file=out)
        for eps, psi, sig in rate_rows(inst, eps_list, args.precision):
            num, den = psi.upper.as_integer_ratio()
            print(f"{eps:>12.6g}  {preview(Fraction(int(num), int(den))):>12}  {preview(sig):>12}", file=out)
            w.writerow([inst.id, repr(eps), repr(psi.upper_float()), str(sig)])
    if args.out is not None:
        _write_text(args.out, buf.getvalue())
    return EXIT_OK


def trajectory_csv(displacements) -> str:
    lines = ["n,displacement"]
    lines.extend(f"{n},{d:.17g}" for n, d in enumerate(displacements))
    return "\n".join(lines) + "\n"


def cmd_run(args, out) -> int:
    inst = _single(args)
    status = EXIT_OK
    try:
        traj = certify.run_picard(inst.composite, inst.x0, args.steps)
    except NumericFailure as exc:
        traj = exc.trajectory
        print(f"error: {exc}", file=sys.stderr)
        status = EXIT_FAIL
    text = trajectory_csv(traj.displacements)
    if args.out is None:
        out.write(text)
    else:
        _write_text(args.out, text)
    return status


def report_document(reports, cfg: certify.SuiteConfig, timing: bool = False) -> dict:
    return {
        "seed": cfg.seed,
        "precision": cfg.precision,
        "samples": cfg.samples,
        "passed": all(r.passed for r in reports),
        "violation_count": sum(r.violation_count for r in reports),
        "inconclusive": sum(r.inconclusive for r in reports),
        "reports": [r.to_dict(include_timing=timing) for r in reports],
    }


def cmd_certify(args, out) -> int:
    insts = _instances(args)
    cfg = certify.SuiteConfig(seed=args.seed, samples=args.samples, cap=args.cap, budget=args.budget,
                              eps_grid=tuple(args.eps) if args.eps else None, uc_samples=args.uc_samples,
                              precision=args.precision, falsify=args.falsify)
    reports = certify.run_suites(insts, args.suites or certify.SUITES, cfg, workers=args.workers)
    doc = report_document(reports, cfg, args.timing)
    if args.report is not None:
        _write_text(args.report, json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n")
    for r in reports:
        extra = f" error={r.error}" if r.error else ""
        print(f"{r.status:<12} {r.suite:<30} {r.instance:<34} samples={r.samples} "
              f"violations={r.violation_count}{extra}", file=out)
    print(f"{'PASS' if doc['passed'] else 'FAIL'}: {len(reports)} reports, "
          f"{doc['violation_count']} violations, {doc['inconclusive']} inconclusive", file=out)
    return EXIT_OK if doc["passed"] else EXIT_FAIL


def read_trajectory(path: Path) -> list[float]:
    if not path.is_file():
        raise UsageError(f"{path}: no such file")
    try:
        rows = list(csv.reader(path.read_text(encoding="utf-8").splitlines()))
    except (OSError, UnicodeDecodeError) as exc:
        raise UsageError(f"{path}: {exc}") from None
    if not rows or [c.strip() for c in rows[0]] != ["n", "displacement"]:
        raise UsageError(f"{path}: expected header 'n,displacement'")
    values = []
    for lineno, row in enumerate(rows[1:], start=2):
        try:
            n, d = int(row[0]), float(row[1])
        except (ValueError, IndexError):
            raise UsageError(f"{path}:{lineno}: malformed row {','.join(row)!r}") from None
        if n != len(values) or not d >= 0:
            raise UsageError(f"{path}:{lineno}: bad index or displacement")
        values.append(d)
    if not values:
        raise UsageError(f"{path}: no trajectory rows")
    return values


def plot_svg(displacements, markers=(), title: str = "") -> str:
    """Log-scale displacement plot; ``markers`` are ``(eps, sigma)`` pairs."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.fonttype"] = "none"
    matplotlib.rcParams["svg.hashsalt"] = "asymreg"
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    n = list(range(len(displacements)))
    floor = min((d for d in displacements if d > 0), default=1.0) / 10
    ax.semilogy(n, [max(d, floor) for d in displacements], marker=".", lw=1, gid="displacement")
    ax.set_xlabel("n")
    ax.set_ylabel("|x_n - x_{n+1}|")
    if title:
        ax.set_title(title)
    xmax = max(n[-1], 1)
    beyond = []
    for eps, sig in markers:
        if sig <= xmax:
            ax.axvline(sig, color="C3", ls="--", lw=1, gid=f"sigma-marker-{eps:g}")
            ax.axhline(eps, color="C2", ls=":", lw=1)
        else:
            beyond.append(f"Σ({eps:g}) = {preview(sig)} > {xmax}")
    if beyond:
        ax.text(0.98, 0.98, "\n".join(beyond), transform=ax.transAxes, ha="right", va="top",
                fontsize=8, gid="sigma-beyond")
    ax.set_xlim(0, xmax)
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return buf.getvalue()


def cmd_plot(args, out) -> int:
    displacements = read_trajectory(args.csv)
    insts = _instances(args)
    if len(insts) > 1:
        raise UsageError("plot takes at most one instance")
    markers, title = [], ""
    if insts:
        inst = insts[0]
        title = inst.id
        for eps in args.eps or inst.eps_grid:
            markers.append((eps, rates.sigma(inst.m, inst.alphas, inst.K, inst.b, inst.d, eps, args.precision)))
    _write_text(args.out, plot_svg(displacements, markers, title))
    return EXIT_OK


COMMANDS = {"rate": cmd_rate, "run": cmd_run, "certify": cmd_certify, "plot": cmd_plot}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AsymregError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
