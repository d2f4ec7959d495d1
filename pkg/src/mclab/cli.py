"""``mclab`` command line: run closures, print matrices, regenerate figure data."""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Iterable, Sequence

from mclab import moment_algebra as ma
from mclab.analysis import error_time_series
from mclab.closures import ClosureDescriptor, Family, assemble, memory_coefficient_table
from mclab.config import ConfigError, ExperimentConfig, parse_config
from mclab.reference import convergence_certificate, reference_solution
from mclab.solver import RunResult, SolverError, run

log = logging.getLogger("mclab")

SNAPSHOT_HEADER = ("closure", "t", "x", "u0")
ERROR_HEADER = ("closure", "t", "l1_abs", "l1_signed")
CERTIFICATE_ORDERS = (11, 21, 31, 41, 51)
REFERENCE_LABEL = "reference"

# file name -> (kind, closures)
PAPER_FIGURES = {
    "fig1_profiles_N0.csv": ("snapshots", ("pn:0", "diffcorr:0", "diffcorr:0:truncated", "diffcorr:0:modified")),
    "fig2_profiles_N1.csv": ("snapshots", ("pn:1", "diffcorr:1", "diffcorr:1:truncated", "diffcorr:1:modified")),
    "fig3_errors_N0.csv": ("errors", ("pn:0", "diffcorr:0", "diffcorr:0:truncated", "diffcorr:0:modified")),
    "fig4_errors_N1.csv": ("errors", ("pn:1", "diffcorr:1", "diffcorr:1:truncated", "diffcorr:1:modified")),
    "fig5_profiles_N3.csv": ("snapshots", ("pn:3", "diffcorr:3", "diffcorr:3:truncated", "diffcorr:3:modified")),
    "fig6_profiles_parabolic.csv": ("snapshots", ("diffcorr:0", "rpn:1", "rpn:8", "sp3")),
    "fig7_errors_N3.csv": ("errors", ("pn:3", "diffcorr:3", "diffcorr:3:truncated", "diffcorr:3:modified")),
    "fig8_errors_parabolic.csv": ("errors", ("diffcorr:0", "rpn:1", "rpn:8", "sp3")),
}


def _num(v: float) -> str:
    return format(float(v), ".12g")


def max_threads() -> int:
    raw = os.environ.get("MCLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map(fn, items: Sequence):
    """Map in a thread pool of ``MCLAB_THREADS`` workers, keeping input order."""
    workers = min(max_threads(), len(items)) or 1
    if workers == 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(fn, items))


def simulate(config: ExperimentConfig, labels: Iterable[str]) -> tuple[RunResult, dict[str, RunResult]]:
    """Reference run plus one run per closure label, sampled at all error times."""
    times = config.error_times()
    grid, solver, decay, profile = config.grid, config.solver, config.decay, config.initial_profile
    descriptors = {d.label: d for d in config.descriptors()}
    labels = list(dict.fromkeys(labels))

    def one(label):
        if label == REFERENCE_LABEL:
            return reference_solution(grid, solver, decay, profile, config.n_ref, times)
        d = descriptors.get(label) or ClosureDescriptor.parse(label)
        if d.family in (Family.SP3, Family.SSP3):
            d = ClosureDescriptor(d.family, alpha=config.alpha)
        try:
            return run(assemble(d, decay), grid, solver, profile, sample_times=times)
        except SolverError as exc:
            raise SolverError(f"{label}: {exc}") from exc

    results = _map(one, [REFERENCE_LABEL] + labels)
    return results[0], dict(zip(labels, results[1:]))


def _snapshot_rows(label: str, result: RunResult, times: Sequence[float]):
    for t in times:
        for x, u in zip(result.x, result.snapshots[t]):
            yield (label, _num(t), _num(x), _num(u))


def _error_rows(label: str, result: RunResult, reference: RunResult, times):
    for t, e_abs, e_signed in error_time_series(result, reference, times):
        yield (label, _num(t), _num(e_abs), _num(e_signed))


def _write_csv(path: Path, header, rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _snapshot_times(config: ExperimentConfig) -> list[float]:
    return sorted({0.0, *config.output_times})


def cmd_run(config: ExperimentConfig, out_dir: str | Path | None = None) -> list[Path]:
    out = Path(out_dir or config.output_dir)
    reference, results = simulate(config, config.closures)
    snap_times = _snapshot_times(config)
    err_times = config.error_times()

    def snapshot_rows():
        yield from _snapshot_rows(REFERENCE_LABEL, reference, snap_times)
        for label, res in results.items():
            yield from _snapshot_rows(label, res, snap_times)

    def error_rows():
        for label, res in results.items():
            yield from _error_rows(label, res, reference, err_times)

    paths = [
        _write_csv(out / "snapshots.csv", SNAPSHOT_HEADER, snapshot_rows()),
        _write_csv(out / "errors.csv", ERROR_HEADER, error_rows()),
    ]
    col = 1 if config.error_mode == "absolute" else 2
    for label, res in results.items():
        final = error_time_series(res, reference, [err_times[-1]])[0]
        print(f"{label:24s} t={final[0]:g}  {config.error_mode} L1 error {final[col]:.6g}")
    return paths


def cmd_paper_suite(out_dir: str | Path, cells: int | None = None) -> list[Path]:
    config = ExperimentConfig()
    if cells is not None:
        config = replace(config, cells=cells)
    config.grid  # validates the override
    labels = [c for _, cl in PAPER_FIGURES.values() for c in cl]
    reference, results = simulate(config, labels)
    out = Path(out_dir)
    snap_times = _snapshot_times(config)
    err_times = config.error_times()
    paths = []
    for name, (kind, closures) in PAPER_FIGURES.items():
        if kind == "snapshots":
            rows = list(_snapshot_rows(REFERENCE_LABEL, reference, snap_times))
            for c in closures:
                rows.extend(_snapshot_rows(c, results[c], snap_times))
            paths.append(_write_csv(out / name, SNAPSHOT_HEADER, rows))
        else:
            rows = [r for c in closures for r in _error_rows(c, results[c], reference, err_times)]
            paths.append(_write_csv(out / name, ERROR_HEADER, rows))
    return paths


def cmd_certify(out_dir: str | Path, config: ExperimentConfig | None = None,
                orders: Sequence[int] = CERTIFICATE_ORDERS) -> tuple[Path, list]:
    config = config or ExperimentConfig()
    table = convergence_certificate(
        config.grid, config.solver, config.decay, config.initial_profile, orders
    )
    rows = [(n, m, _num(d)) for (n, d), m in zip(table, orders[1:])]
    path = _write_csv(Path(out_dir) / "certificate.csv", ("n", "next_n", "l1_distance"), rows)
    for n, m, d in rows:
        print(f"P{n} vs P{m}: {d}")
    decreasing = all(b[1] < a[1] for a, b in zip(table, table[1:]))
    print("strictly decreasing" if decreasing else "NOT strictly decreasing")
    return path, table


def cmd_matrices(closure: str, kappa="3/2", sigma="3/2", alpha="1/3") -> str:
    """Exact and 4-decimal renderings of A, C and D for a closure."""
    d = ClosureDescriptor.parse(closure)
    if d.family in (Family.SP3, Family.SSP3):
        d = ClosureDescriptor(d.family, alpha=alpha)
    system = assemble(d, ma.DecayParameters(kappa, sigma))
    blocks = [f"closure {d.label}  (kappa={system.decay_parameters.kappa}, "
              f"sigma={system.decay_parameters.sigma}, tau={system.decay_parameters.tau})",
              "fields: " + ", ".join(system.field_names),
              memory_coefficient_table(d)]
    for name, m in (("A", system.advection_exact), ("C", system.decay_exact),
                    ("D", system.diffusion_exact)):
        blocks.append(f"\n{name} (exact):\n{ma.format_matrix(m)}")
        blocks.append(f"{name} (decimal):\n{ma.format_matrix(m, exact=False)}")
    if not ma.is_zero(system.diffusion_exact):
        rep = ma.spectral_report(system.diffusion)
        blocks.append(
            "\nD definiteness: min Re(eig) = {min_eig_real:.6g} (positive: {spectrally_positive}); "
            "min eig of symmetric part = {min_symmetric_part_eig:.6g} "
            "(positive: {symmetric_part_positive})".format(**rep)
        )
    text = "\n".join(blocks)
    print(text)
    return text


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mclab", description="Moment closures for slab radiative transfer")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run the closures listed in a config file")
    r.add_argument("--config", required=True)
    r.add_argument("--out", default=None)

    m = sub.add_parser("matrices", help="print the operators of a closure")
    m.add_argument("--closure", required=True)
    m.add_argument("--kappa", default="3/2")
    m.add_argument("--sigma", default="3/2")
    m.add_argument("--alpha", default="1/3")

    s = sub.add_parser("paper-suite", help="write the data behind all eight figures")
    s.add_argument("--out", required=True)
    s.add_argument("--cells", type=int, default=None)

    c = sub.add_parser("certify", help="convergence certificate of the P_N reference")
    c.add_argument("--out", required=True)
    c.add_argument("--config", default=None)
    c.add_argument("--cells", type=int, default=None)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            config = parse_config(Path(args.config).read_text(encoding="utf-8"))
            cmd_run(config, args.out)
        elif args.command == "matrices":
            cmd_matrices(args.closure, args.kappa, args.sigma, args.alpha)
        elif args.command == "paper-suite":
            cmd_paper_suite(args.out, args.cells)
        elif args.command == "certify":
            config = ExperimentConfig()
            if args.config:
                config = parse_config(Path(args.config).read_text(encoding="utf-8"))
            if args.cells is not None:
                config = replace(config, cells=args.cells)
            cmd_certify(args.out, config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
