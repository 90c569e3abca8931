"""Command-line front end.

Each ``cmd_*`` function does the work and returns a JSON-ready ``dict``
holding the library's return values untouched; :func:`main` only parses
arguments, prints, writes files and maps errors to exit codes:

    0 success, 2 spec/argument parse error, 3 numerical error, 4 I/O error,
    5 verification failure, 6 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, distances, geodesics, moments, prediction
from ._workers import worker_count
from .core import DEFAULT_GRID_SIZE, MeanOrder, SpectrumGrid
from .errors import NotConverged, SpecParseError, SpectralError, ZeroSpeed
from .specs import BUILTIN_HELP, digest, load_spec, samples_from_grid

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_NUMERIC = 3
EXIT_IO = 4
EXIT_VERIFY = 5
EXIT_SOLVER = 6

SURFACE_HEADER = ("tau", "sigma", "delta_ag", "delta_sym", "delta_kl")

_RS_PATTERN = re.compile(r"^rs\(\s*([^,()]+?)\s*,\s*([^,()]+?)\s*\)$")


def _input_record(spec) -> dict:
    return {"spec": spec.to_json(), "digest": digest(spec)}


def parse_measure(text: str) -> tuple[str, MeanOrder | None, MeanOrder | None]:
    """``ag``, ``sym``, ``kl``, ``smooth`` or ``rs(r,s)``."""
    text = text.strip().lower()
    if text in ("ag", "sym", "kl", "smooth"):
        return text, None, None
    m = _RS_PATTERN.match(text)
    if m:
        try:
            return "rs", MeanOrder.parse(m.group(1)), MeanOrder.parse(m.group(2))
        except ValueError:
            pass
    raise SpecParseError("--measure", f"expected ag, sym, kl, smooth or rs(r,s); got {text!r}")


# -- commands ----------------------------------------------------------------


def cmd_dist(spec1, spec2, measure: str = "ag", n: int = DEFAULT_GRID_SIZE) -> dict:
    name, r, s = parse_measure(measure)
    f1, f2 = spec1.grid(n), spec2.grid(n)
    value = distances.distance(name, f1, f2, r, s)
    return {
        "command": "dist",
        "measure": measure.strip().lower(),
        "n": n,
        "inputs": [_input_record(spec1), _input_record(spec2)],
        "value": float(value),
    }


def surface_rows(f1: SpectrumGrid, f2: SpectrumGrid, f3: SpectrumGrid, steps: int, workers: int | None = None):
    """Distances from ``f1`` to ``f1**(1-tau) * (f2**(1-sigma) * f3**sigma)**tau``.

    Rows are returned tau-major on a uniform ``(steps+1) x (steps+1)`` grid
    regardless of the order in which worker threads finish.
    """
    if steps < 2:
        raise ValueError(f"steps must be at least 2, got {steps}")
    ticks = np.linspace(0.0, 1.0, steps + 1)

    def row_block(tau):
        block = []
        for sigma in ticks:
            edge = geodesics.log_interval(f2, f3, sigma)
            f = geodesics.log_interval(f1, edge, tau)
            block.append(
                (
                    float(tau),
                    float(sigma),
                    float(distances.delta_ag(f1, f)),
                    float(distances.delta_sym(f1, f)),
                    float(distances.delta_kl(f1, f)),
                )
            )
        return block

    nworkers = min(worker_count(workers), len(ticks))
    if nworkers > 1:
        with ThreadPoolExecutor(nworkers) as pool:
            blocks = list(pool.map(row_block, ticks))
    else:
        blocks = [row_block(t) for t in ticks]
    return [row for block in blocks for row in block]


def format_surface_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SURFACE_HEADER)
    for row in rows:
        writer.writerow([repr(v) for v in row])
    return buf.getvalue()


def cmd_surface(spec1, spec2, spec3, steps: int = 40, n: int = DEFAULT_GRID_SIZE, workers: int | None = None) -> list:
    return surface_rows(spec1.grid(n), spec2.grid(n), spec3.grid(n), steps, workers)


def cmd_geodesic(spec1, spec2, frames: int = 1001, n: int = DEFAULT_GRID_SIZE) -> dict:
    f0, f1 = spec1.grid(n), spec2.grid(n)
    path = geodesics.GeodesicPath.logarithmic(f0, f1, frames)
    report = {
        "command": "geodesic",
        "n": n,
        "frames": frames,
        "inputs": [_input_record(spec1), _input_record(spec2)],
        "logpath_length": geodesics.logpath_length(f0, f1),
        "path_length": geodesics.path_length(path),
    }
    try:
        report["geodesic_residual"] = geodesics.geodesic_residual(path)
    except ZeroSpeed as exc:
        report["geodesic_residual"] = None
        report["note"] = f"ZeroSpeed: {exc}"
    return report


def cmd_verify(
    spec_true, spec_model, samples: int = 1_000_000, filter_len: int = 256, seed: int = 0,
    n: int = DEFAULT_GRID_SIZE, workers: int | None = None,
) -> dict:
    f_true, f_model = spec_true.grid(n), spec_model.grid(n)
    rep = prediction.simulate_prediction(f_true, f_model, filter_len, samples, seed, workers)
    out = {"command": "verify", "n": n, "inputs": [_input_record(spec_true), _input_record(spec_model)]}
    out.update(rep.to_dict())
    out["z_score"] = rep.z_score
    out["exp_delta_ag_times_g_true"] = math.exp(distances.delta_ag(f_true, f_model)) * prediction.prediction_variance(f_true)
    out["passed"] = rep.passed(4.0)
    return out


def cmd_moments(
    source, prior_spec, n_moments: int | None = None, tol: float = moments.DEFAULT_TOL,
    n: int = DEFAULT_GRID_SIZE, max_iter: int = moments.DEFAULT_MAX_ITER,
) -> tuple[dict, SpectrumGrid]:
    """Solve the moment problem.

    ``source`` is either a spectrum spec (its first ``n_moments + 1``
    moments are used) or a sequence of moments ``R_0..R_n``.
    """
    prior = prior_spec.grid(n)
    if hasattr(source, "grid"):
        if n_moments is None:
            raise ValueError("n_moments is required when the source is a spectrum")
        mv = moments.compute_moments(source.grid(n), n_moments)
        src_record = _input_record(source)
    else:
        mv = moments.MomentVector(source)
        src_record = {"moments": [float(v) for v in mv.r]}
    sol = moments.solve_ag_closest(mv, prior, tol=tol, max_iter=max_iter)
    report = {
        "command": "moments",
        "n": n,
        "source": src_record,
        "prior": _input_record(prior_spec),
        "moments": [float(v) for v in mv.r],
        "lambdas": [float(v) for v in sol.lambdas],
        "kappa": sol.kappa,
        "residual": sol.residual,
        "kappa_error": sol.kappa_error,
        "iterations": sol.iterations,
        "distance_ag_to_prior": sol.distance_to(prior),
    }
    return report, sol.density


# -- argument handling -------------------------------------------------------


def dumps(obj) -> str:
    """Deterministic JSON; floats use the shortest round-trip representation."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise _IOFailure(f"cannot write {path}: {exc.strerror or exc}") from None


class _IOFailure(Exception):
    pass


def _moment_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise SpecParseError("--moments", f"expected comma-separated numbers, got {text!r}") from None


def _specs(args, count: int) -> list:
    names = list(args.spectra) + list(args.builtin or [])
    if len(names) != count:
        raise SpecParseError("<spectra>", f"expected {count} spectra, got {len(names)}")
    return [load_spec(s) for s in names]


def build_parser() -> argparse.ArgumentParser:
    builtins = "\n".join(f"  {k}: {v}" for k, v in BUILTIN_HELP.items())
    parser = argparse.ArgumentParser(
        prog="spectral-metrics",
        description="Distances, geodesics and moment problems for power spectral densities.",
        epilog=(
            "A SPEC is a builtin name, inline JSON, or a path to a JSON file holding one of\n"
            '  {"Rational": {"num": [...], "den": [...]}}  (ascending powers of z)\n'
            '  {"Samples": {"values": [...]}}\n'
            '  {"Expression": {"builtin": "paper_f1"}}\n'
            f"Builtins:\n{builtins}\n"
            "Set SPECTRAL_METRICS_THREADS to cap worker threads (0 = one per CPU)."
        ),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, nspec):
        p.add_argument("spectra", nargs="*", metavar="SPEC", help=f"{nspec} spectrum specification(s)")
        p.add_argument("--builtin", action="append", metavar="NAME", help="append a builtin spectrum")
        p.add_argument("--n", type=int, default=DEFAULT_GRID_SIZE, help="grid size (default %(default)s)")
        p.add_argument("--out", metavar="PATH", help="write the result to PATH")

    p = sub.add_parser("dist", help="distance between two spectra")
    common(p, 2)
    p.add_argument("--measure", default="ag", help="ag, sym, kl, smooth or rs(r,s) (default %(default)s)")
    p.add_argument("--json", action="store_true", help="print the JSON record instead of the value")

    p = sub.add_parser("surface", help="triangle-surface experiment as CSV")
    common(p, 3)
    p.add_argument("--steps", type=int, default=40)

    p = sub.add_parser("geodesic", help="log-path length and geodesic residual")
    common(p, 2)
    p.add_argument("--frames", type=int, default=1001)

    p = sub.add_parser("verify", help="Monte Carlo check of the mismatched prediction variance")
    common(p, 2)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--filter-len", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("moments", help="moment-constrained closest spectrum to a prior")
    p.add_argument("source", nargs="?", metavar="SPEC", help="spectrum whose moments are matched")
    p.add_argument("--moments", type=_moment_list, metavar="R0,R1,...", help="explicit moments instead of SPEC")
    p.add_argument("--prior", default=None, metavar="SPEC", help="prior spectrum (default: flat)")
    p.add_argument("--n-moments", type=int, default=None)
    p.add_argument("--tol", type=float, default=moments.DEFAULT_TOL)
    p.add_argument("--max-iter", type=int, default=moments.DEFAULT_MAX_ITER)
    p.add_argument("--n", type=int, default=DEFAULT_GRID_SIZE)
    p.add_argument("--out", metavar="PATH", help="write the solution density as a Samples spec")
    return parser


def _run(args) -> int:
    if args.command == "dist":
        s1, s2 = _specs(args, 2)
        rec = cmd_dist(s1, s2, args.measure, args.n)
        text = dumps(rec)
        if args.out:
            _write(args.out, text)
        print(text, end="") if args.json else print(f"{rec['value']:.12g}")
        return EXIT_OK
    if args.command == "surface":
        if args.steps < 2:
            raise SpecParseError("--steps", f"must be at least 2, got {args.steps}")
        s1, s2, s3 = _specs(args, 3)
        text = format_surface_csv(cmd_surface(s1, s2, s3, args.steps, args.n))
        if args.out:
            _write(args.out, text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    if args.command == "geodesic":
        s1, s2 = _specs(args, 2)
        text = dumps(cmd_geodesic(s1, s2, args.frames, args.n))
        if args.out:
            _write(args.out, text)
        sys.stdout.write(text)
        return EXIT_OK
    if args.command == "verify":
        s1, s2 = _specs(args, 2)
        rec = cmd_verify(s1, s2, args.samples, args.filter_len, args.seed, args.n)
        text = dumps(rec)
        if args.out:
            _write(args.out, text)
        sys.stdout.write(text)
        status = "PASS" if rec["passed"] else "FAIL"
        print(
            f"{status}: empirical {rec['empirical_variance']!r} vs analytic {rec['analytic_variance']!r} "
            f"(z = {rec['z_score']:.3f}); exp(delta_ag)*g_true = {rec['exp_delta_ag_times_g_true']!r}",
            file=sys.stderr,
        )
        return EXIT_OK if rec["passed"] else EXIT_VERIFY
    if args.command == "moments":
        if (args.source is None) == (args.moments is None):
            raise SpecParseError("<source>", "give exactly one of SPEC or --moments")
        source = args.moments if args.moments is not None else load_spec(args.source)
        prior = load_spec(args.prior) if args.prior else load_spec('{"Rational": {"num": [1], "den": [1]}}')
        rec, density = cmd_moments(source, prior, args.n_moments, args.tol, args.n, args.max_iter)
        if args.out:
            _write(args.out, dumps(samples_from_grid(density).to_json()))
            rec["density_out"] = args.out
        sys.stdout.write(dumps(rec))
        return EXIT_OK
    raise AssertionError(args.command)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except SpecParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NotConverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except _IOFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SpectralError, ArithmeticError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
