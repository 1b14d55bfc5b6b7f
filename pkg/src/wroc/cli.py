"""Command line entry points.

Four subcommands:

* ``analyze``  per-stratum wAUC estimates with standard errors
* ``compare``  weighted paired difference with z test and interval
* ``simulate`` Monte Carlo studies (named or from a scenario file)
* ``roc``      empirical ROC curve on a midpoint grid

Exit codes: 0 success, 2 input or usage problems, 3 numerical failures.
Reports embed the package version, the resolved configuration, the seed and
the SHA-256 of the input file so results can be tied back to their inputs.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys

import numpy as np

from . import __version__
from .covariance import bootstrap_covariance, contrast_covariance, sigma_matrix
from .dataset import MarkerDataset, read_dataset_csv, validate
from .designs import StudyDesign, parse_design
from .errors import (
    DataFormatError,
    DegenerateDensityError,
    SingularCovarianceError,
    WrocError,
)
from .estimators import empirical_roc, wauc_vector
from .inference import (
    custom_weights,
    delta_h,
    equal_weights,
    optimal_weights,
    pair_contrast,
    variance_delta,
    z_test,
)
from .measures import parse_measure
from .simulation import (
    parse_scenario_file,
    run_method_comparison,
    run_study,
    study_names,
    table1_scenario,
    table2_scenario,
    table3_scenario,
    table4_scenario,
    null_scenario,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3


def _default_threads() -> int:
    raw = os.environ.get("WROC_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _load_dataset(path: str) -> tuple[MarkerDataset, str]:
    with open(path, "rb") as handle:
        payload = handle.read()
    digest = hashlib.sha256(payload).hexdigest()
    dataset = read_dataset_csv(io.StringIO(payload.decode("utf-8")))
    report = validate(dataset)
    if not report.ok:
        first = report.issues[0]
        raise DataFormatError(f"invalid dataset: {first.message}")
    return dataset, digest


def _resolve_weights(spec: str, design: StudyDesign, cov_diff: np.ndarray,
                     ridge: float | None):
    if spec == "equal":
        return equal_weights(design.n_pairs)
    if spec == "optimal":
        return optimal_weights(cov_diff, ridge=ridge)
    if spec.startswith("custom:"):
        try:
            values = [float(tok) for tok in spec[len("custom:"):].split(",")]
        except ValueError as exc:
            raise DataFormatError(f"bad custom weights {spec!r}: {exc}") from exc
        return custom_weights(values)
    raise DataFormatError(
        f"unknown weights {spec!r}, expected equal, optimal or custom:w1,w2,...")


def _emit(report: dict, args) -> None:
    fmt = getattr(args, "format", "json")
    if fmt == "json":
        text = json.dumps(report, indent=2, sort_keys=False) + "\n"
    else:
        lines = []
        _flatten("", report, lines)
        text = "\n".join(lines) + "\n"
    output = getattr(args, "output", None)
    if output:
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _flatten(prefix: str, node, lines: list[str]) -> None:
    if isinstance(node, dict):
        for key, value in node.items():
            _flatten(f"{prefix}{key}.", value, lines)
    elif isinstance(node, list) and node and isinstance(node[0], dict):
        for idx, value in enumerate(node):
            _flatten(f"{prefix}{idx}.", value, lines)
    else:
        lines.append(f"{prefix[:-1]} = {node}")


def _report_header(command: str, args, digest: str | None) -> dict:
    config = {key: value for key, value in sorted(vars(args).items())
              if key not in ("func", "output", "format") and value is not None}
    header = {
        "tool": "wroc",
        "version": __version__,
        "command": command,
        "config": config,
    }
    if digest is not None:
        header["input_sha256"] = digest
    return header


# -- analyze -------------------------------------------------------------


def _cmd_analyze(args) -> int:
    dataset, digest = _load_dataset(args.input)
    design = parse_design(args.design) if args.design else None
    measure = parse_measure(args.measure)
    omega = wauc_vector(dataset, design, measure, midrank=args.midrank)
    if args.bootstrap:
        cov = bootstrap_covariance(dataset, design, measure,
                                   args.bootstrap, args.seed,
                                   midrank=args.midrank)
    else:
        cov = sigma_matrix(dataset, design, measure, midrank=args.midrank)
    variances = np.diag(cov.sigma)
    report = _report_header("analyze", args, digest)
    report["seed"] = args.seed
    report["results"] = {
        "measure": measure.selector(),
        "labels": list(omega.labels),
        "wauc": [float(v) for v in omega.values],
        "se": [float(np.sqrt(max(v, 0.0))) for v in variances],
        "covariance_method": cov.method,
        "covariance": [[float(v) for v in row] for row in cov.sigma],
        "psd_repaired": cov.repaired,
    }
    _emit(report, args)
    return EXIT_OK


# -- compare -------------------------------------------------------------


def _cmd_compare(args) -> int:
    dataset, digest = _load_dataset(args.input)
    design = parse_design(args.design)
    measure = parse_measure(args.measure)
    omega = wauc_vector(dataset, design, measure, midrank=args.midrank)
    if args.bootstrap:
        cov = bootstrap_covariance(dataset, design, measure,
                                   args.bootstrap, args.seed,
                                   midrank=args.midrank)
    else:
        cov = sigma_matrix(dataset, design, measure, midrank=args.midrank)
    cov_diff = contrast_covariance(cov.sigma, design)
    weights = _resolve_weights(args.weights, design, cov_diff, args.ridge)
    contrast = pair_contrast(design, weights)
    estimate = delta_h(omega, contrast)
    var = variance_delta(cov, contrast)
    test = z_test(estimate, var.total, alpha=args.alpha)
    report = _report_header("compare", args, digest)
    report["seed"] = args.seed
    report["results"] = {
        "measure": measure.selector(),
        "labels": list(omega.labels),
        "wauc": [float(v) for v in omega.values],
        "delta": test.estimate,
        "variance": test.variance,
        "variance_diseased": var.diseased,
        "variance_nondiseased": var.nondiseased,
        "se": float(np.sqrt(test.variance)),
        "z": test.z,
        "p_value": test.p_value,
        "ci_lower": test.ci_lower,
        "ci_upper": test.ci_upper,
        "alpha": test.alpha,
        "weights": [float(w) for w in weights.weights],
        "weight_method": weights.method,
        "weights_fell_back": weights.fell_back,
        "covariance_method": cov.method,
        "psd_repaired": cov.repaired,
    }
    _emit(report, args)
    return EXIT_OK


# -- simulate ------------------------------------------------------------


def _build_scenario(args):
    if args.scenario:
        return parse_scenario_file(args.scenario)
    if not args.study:
        raise DataFormatError("simulate needs a study name or --scenario FILE")
    study = args.study
    reps = args.reps
    seed = args.seed
    if study == "table1":
        return table1_scenario(args.rho, args.n, args.family or "normal",
                               n_reps=reps, seed=seed)
    if study == "table2":
        return table2_scenario(args.rho, args.n, args.family or "lognormal",
                               n_reps=reps, seed=seed)
    if study == "table3":
        return table3_scenario(args.rho, args.n, n_reps=reps, seed=seed)
    if study == "table4":
        return table4_scenario(args.n, args.family or "lognormal",
                               n_reps=reps, seed=seed)
    if study == "null":
        return null_scenario(args.rho, args.n, n_reps=reps, seed=seed)
    raise DataFormatError(f"unknown study {study!r}")


def _cmd_simulate(args) -> int:
    scenario = _build_scenario(args)
    threads = args.threads if args.threads else _default_threads()
    if scenario.name.startswith("table2"):
        result = run_method_comparison(scenario, component=args.component,
                                       n_jobs=threads)
        payload = result.to_dict()
        rows = [cell.to_dict() for cell in result.cells]
    else:
        result = run_study(scenario, n_jobs=threads)
        payload = result.to_dict()
        rows = [cell.to_dict() for cell in result.cells]
    report = _report_header("simulate", args, None)
    report["seed"] = scenario.seed
    report["results"] = payload
    if args.output:
        with open(args.output + ".json", "w", encoding="utf-8") as handle:
            json.dump(report, handle, indent=2)
            handle.write("\n")
        with open(args.output + ".csv", "w", encoding="utf-8", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=list(rows[0].keys()),
                                    lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
    else:
        sys.stdout.write(json.dumps(report, indent=2) + "\n")
    return EXIT_OK


# -- roc -----------------------------------------------------------------


def _cmd_roc(args) -> int:
    dataset, digest = _load_dataset(args.input)
    n = args.grid
    if n < 1:
        raise DataFormatError(f"grid size must be >= 1, got {n}")
    grid = (np.arange(1, n + 1) - 0.5) / n
    values = empirical_roc(dataset, args.marker, grid, time=args.time)
    target = open(args.output, "w", encoding="utf-8", newline="") if args.output else sys.stdout
    try:
        target.write(f"# wroc roc version={__version__} marker={args.marker} "
                     f"grid={n} input_sha256={digest}\n")
        writer = csv.writer(target, lineterminator="\n")
        writer.writerow(["u", "roc"])
        for u, v in zip(grid, values):
            writer.writerow([repr(float(u)), repr(float(v))])
    finally:
        if args.output:
            target.close()
    return EXIT_OK


# -- parser --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wroc",
        description="Weighted-AUC comparison of correlated ROC curves.")
    parser.add_argument("--version", action="version", version=f"wroc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_design=True):
        p.add_argument("--input", required=True, help="long-format CSV file")
        if with_design:
            p.add_argument("--design", help="readers:R or longitudinal:K")
        p.add_argument("--measure", default="auc",
                       help="auc | pauc:<u1>,<u2>[:normalized] | sens:<u0> | "
                            "steps:<u1>=<m1>,...")
        p.add_argument("--midrank", action="store_true",
                       help="use midrank ties handling")
        p.add_argument("--bootstrap", type=int, default=0, metavar="B",
                       help="bootstrap covariance with B replicates instead "
                            "of the analytic estimator")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--alpha", type=float, default=0.05)
        p.add_argument("--output", help="write the report here instead of stdout")
        p.add_argument("--format", choices=("json", "text"), default="json")

    p_analyze = sub.add_parser("analyze", help="per-stratum wAUC estimates")
    add_common(p_analyze)
    p_analyze.set_defaults(func=_cmd_analyze)

    p_compare = sub.add_parser("compare", help="weighted paired difference test")
    add_common(p_compare)
    p_compare.add_argument("--weights", default="equal",
                           help="equal | optimal | custom:w1,w2,...")
    p_compare.add_argument("--ridge", type=float, default=None,
                           help="ridge added to the difference covariance "
                                "when solving optimal weights")
    p_compare.set_defaults(func=_cmd_compare)

    p_sim = sub.add_parser("simulate", help="run a Monte Carlo study")
    p_sim.add_argument("study", nargs="?", choices=study_names(),
                       help="named study; omit when using --scenario")
    p_sim.add_argument("--scenario", help="key = value scenario file")
    p_sim.add_argument("--rho", type=float, default=0.5)
    p_sim.add_argument("--n", type=int, default=50,
                       help="subjects per group")
    p_sim.add_argument("--family", choices=("normal", "lognormal"))
    p_sim.add_argument("--reps", type=int, default=1000)
    p_sim.add_argument("--seed", type=int, default=20240817)
    p_sim.add_argument("--component", type=int, default=1,
                       help="headline marker for method comparisons")
    p_sim.add_argument("--threads", type=int, default=0,
                       help="worker processes; 0 means WROC_THREADS or 1")
    p_sim.add_argument("--output", metavar="BASE",
                       help="write BASE.json and BASE.csv")
    p_sim.set_defaults(func=_cmd_simulate)

    p_roc = sub.add_parser("roc", help="empirical ROC curve as CSV")
    p_roc.add_argument("--input", required=True)
    p_roc.add_argument("--marker", type=int, default=1)
    p_roc.add_argument("--time", type=int, default=None)
    p_roc.add_argument("--grid", type=int, default=512,
                       help="evaluate at u = (i - 0.5)/N for i = 1..N")
    p_roc.add_argument("--output")
    p_roc.set_defaults(func=_cmd_roc)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataFormatError as exc:
        print(f"wroc: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (FileNotFoundError, PermissionError, IsADirectoryError) as exc:
        print(f"wroc: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DegenerateDensityError, SingularCovarianceError,
            np.linalg.LinAlgError) as exc:
        print(f"wroc: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except WrocError as exc:
        print(f"wroc: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"wroc: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
