"""Command-line front end: verify identities, run convergence studies,
run the whole suite, and export Dirichlet-to-Neumann data.

Exit status is 0 exactly when every asserted check passed.  Reports land
in --out (or the config's output_dir) as report.json, errors.csv and
convergence.csv per identity.  VEKUA_LAB_SEED seeds randomized point and
trace selection; VEKUA_LAB_THREADS caps worker threads.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .fields import BoxGrid
from .harness import (
    IDENTITIES,
    SuiteConfig,
    convergence_study,
    run_identity,
    run_suite,
)
from .pde import DtnForm
from .vekua import make_profile

PROFILE_CHOICES = ("exponential", "constant", "linear_z", "quadratic_z")


def _load_config(identity, args):
    if getattr(args, "config", None):
        cfg = SuiteConfig.from_json(args.config, identity=identity)
    else:
        cfg = SuiteConfig.defaults(identity)
    if getattr(args, "out", None):
        cfg.output_dir = args.out
    return cfg


def _print_report(report):
    flag = "PASS" if report.passed else "FAIL"
    print(f"[{flag}] {report.identity}  ({report.runtime_seconds:.1f}s)")
    print(f"       {report.statement}")
    for row in report.rows:
        extras = ""
        if row.get("exterior_error"):
            extras = f"  exterior {row['exterior_error']:.3e}"
        print(
            f"       {row['case']:>28} @ {row['level']:>3}: "
            f"interior {row['interior_error']:.3e}{extras}"
        )
    for case, orders in report.orders.items():
        if orders:
            pretty = ", ".join(f"{o:.2f}" for o in orders)
            print(f"       {case:>28} measured order: {pretty}")
    for key, val in report.extras.items():
        print(f"       {key} = {val}")


def _cmd_verify(args):
    report = run_identity(args.identity, _load_config(args.identity, args))
    _print_report(report)
    return 0 if report.passed else 1


def _cmd_convergence(args):
    cfg = _load_config(args.identity, args)
    report, table = convergence_study(args.identity, cfg)
    _print_report(report)
    print("       h, error, order:")
    for row in table:
        order = "-" if row["order"] is None else f"{row['order']:.2f}"
        print(f"       {row['case']:>28}  h={row['h']:.4g}  err={row['error']:.4e}  order={order}")
    return 0 if report.passed else 1


def _cmd_suite(args):
    if args.target == "all":
        names = list(IDENTITIES)
    else:
        names = [n.strip() for n in args.target.split(",") if n.strip()]
    overrides = {}
    if args.out:
        overrides["output_dir"] = args.out
    reports = run_suite(names, **overrides)
    failures = 0
    for name in names:
        _print_report(reports[name])
        failures += 0 if reports[name].passed else 1
    total = len(names)
    print(f"\n{total - failures}/{total} identity checks passed")
    return 0 if failures == 0 else 1


def _trace_basis(grid: BoxGrid, size, seed):
    rng = np.random.default_rng(seed)
    X = grid.coords()
    traces = [X[..., 0], X[..., 1], X[..., 2]]
    while len(traces) < size:
        a = rng.normal(size=3)
        b = rng.normal(size=3)
        traces.append(np.sin(X @ a) + np.cos(X @ b))
    return traces[:size]


def _boundary_table(grid: BoxGrid):
    """Index, face id and position of every boundary node (nodes on edges
    and corners appear once per face, matching the per-face quadratures)."""
    res = grid.resolution
    rows = []
    coords = grid.coords()
    for axis in range(3):
        for side_id, side in enumerate((0, -1)):
            face = 2 * axis + side_id
            slab = tuple(side if b == axis else slice(None) for b in range(3))
            pos = coords[slab].reshape(-1, 3)
            for p in pos:
                rows.append((face, p))
    return rows


def _cmd_dtn(args):
    grid = BoxGrid.unit_cube(args.resolution)
    profile = make_profile(grid, {"kind": args.profile})
    if args.kind == "conductivity":
        form = DtnForm.conductivity(profile)
    else:
        form = DtnForm.schrodinger(profile)
    seed = int(os.environ.get("VEKUA_LAB_SEED", "2024"))
    traces = _trace_basis(grid, args.basis_size, seed)
    matrix = form.matrix(traces)
    sym = float(np.max(np.abs(matrix - matrix.T)) / (np.max(np.abs(matrix)) + 1e-300))
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    mpath = os.path.join(out_dir, "dtn_matrix.csv")
    with open(mpath, "w") as fh:
        fh.write("i,j,value\n")
        for i in range(matrix.shape[0]):
            for j in range(matrix.shape[1]):
                fh.write(f"{i},{j},{matrix[i, j]:.12e}\n")
    tpath = os.path.join(out_dir, "traces.csv")
    table = _boundary_table(grid)
    with open(tpath, "w") as fh:
        header = "node_index,face,x1,x2,x3," + ",".join(
            f"t{k}" for k in range(len(traces))
        )
        fh.write(header + "\n")
        for idx, (face, p) in enumerate(table):
            vals = ",".join(
                f"{trace[tuple(np.round((p - grid.origin) / grid.spacing).astype(int))]:.10e}"
                for trace in traces
            )
            fh.write(f"{idx},{face},{p[0]:.10g},{p[1]:.10g},{p[2]:.10g},{vals}\n")
    print(f"wrote {mpath} and {tpath}")
    print(f"profile={args.profile} kind={args.kind} resolution={args.resolution}")
    print(f"relative symmetry defect: {sym:.3e}")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="vekua-lab",
        description="Numerical verification of Clifford-analytic integral identities",
    )
    parser.add_argument("--version", action="version", version=f"vekua-lab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="run one identity check")
    p_verify.add_argument("identity", choices=sorted(IDENTITIES))
    p_verify.add_argument("--config", help="JSON config file")
    p_verify.add_argument("--out", help="output directory for reports")
    p_verify.set_defaults(func=_cmd_verify)

    p_conv = sub.add_parser("convergence", help="refinement study for one identity")
    p_conv.add_argument("identity", choices=sorted(IDENTITIES))
    p_conv.add_argument("--config", help="JSON config file")
    p_conv.add_argument("--out", help="output directory for reports")
    p_conv.set_defaults(func=_cmd_convergence)

    p_suite = sub.add_parser("suite", help="run many identity checks")
    p_suite.add_argument("target", help="'all' or a comma-separated identity list")
    p_suite.add_argument("--out", help="output directory for reports")
    p_suite.set_defaults(func=_cmd_suite)

    p_dtn = sub.add_parser("dtn", help="export DtN pairing data for a profile")
    p_dtn.add_argument("--profile", choices=PROFILE_CHOICES, default="exponential")
    p_dtn.add_argument("--kind", choices=("conductivity", "schrodinger"),
                       default="conductivity")
    p_dtn.add_argument("--resolution", type=int, default=12)
    p_dtn.add_argument("--basis-size", type=int, default=8)
    p_dtn.add_argument("--out", help="output directory")
    p_dtn.set_defaults(func=_cmd_dtn)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
