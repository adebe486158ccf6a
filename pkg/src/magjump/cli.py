"""Command-line entry point: ``magjump COMMAND PROBLEM_FILE [--out DIR]``."""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import fki, forms, graph, operator, paths
from .problem import ORIENTATIONS, ProblemSpec, SchemaError, parse
from .verify import format_table, run_suite

COMMANDS = ("validate", "hamiltonian", "spectrum", "semigroup", "simulate", "fki", "hodge", "verify")


def _write_csv(path: Path, header: list[str], rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return path


def _orientation_sign(spec: ProblemSpec, override: str | None) -> float:
    orientation = override or spec.run.orientation
    return 1.0 if orientation == "from_to" else -1.0


def cmd_validate(spec: ProblemSpec, out: Path, args) -> int:
    problems = graph.validate(spec.graph())
    for p in problems:
        print(f"violation: {p}")
    if not problems:
        print("ok")
    return 1 if problems else 0


def cmd_hamiltonian(spec: ProblemSpec, out: Path, args) -> int:
    G = spec.graph()
    op = operator.assemble(G, spec.magnetic_potential(G), spec.electric_potential())
    rows = [(G.vertices[i], G.vertices[j], op.H[i, j].real, op.H[i, j].imag)
            for i in range(G.size) for j in range(G.size)]
    print(_write_csv(out / "hamiltonian.csv", ["row", "col", "real", "imag"], rows))
    return 0


def cmd_spectrum(spec: ProblemSpec, out: Path, args) -> int:
    G = spec.graph()
    op = operator.assemble(G, spec.magnetic_potential(G), spec.electric_potential())
    ev = operator.spectrum(op)
    print(_write_csv(out / "spectrum.csv", ["k", "value"], enumerate(ev)))
    return 0


def cmd_semigroup(spec: ProblemSpec, out: Path, args) -> int:
    G = spec.graph()
    op = operator.assemble(G, spec.magnetic_potential(G), spec.electric_potential())
    f = spec.initial_function()
    rows = []
    for t in spec.run.t:
        u = operator.semigroup_exact(op, t, f)
        rows += [(G.vertices[i], t, u[i].real, u[i].imag) for i in range(G.size)]
    print(_write_csv(out / "semigroup.csv", ["vertex", "t", "real", "imag"], rows))
    return 0


def cmd_simulate(spec: ProblemSpec, out: Path, args) -> int:
    G = spec.graph()
    a = _orientation_sign(spec, args.orientation) * spec.magnetic_potential(G)
    v = spec.electric_potential()
    T = spec.run.t[0]
    ens = paths.simulate_stationary(G, T, spec.run.num_paths, spec.run.seed)
    V = G.vertices
    events = zip(ens.path_index, ens.times, ens.sources, ens.targets)
    print(_write_csv(out / "paths.csv", ["path", "time", "from", "to"],
                     ((int(i), s, V[p], V[q]) for i, s, p, q in events)))
    S = paths.stratonovich_integral(ens, a)
    M = paths.martingale_part(ens, a)
    Lam = paths.divergence_part(ens, a)
    Vt = paths.potential_integral(ens, v)
    rows = [(i, V[ens.starts[i]], V[y], S[i], M[i], Lam[i], Vt[i])
            for i, y in enumerate(ens.final_states)]
    print(_write_csv(out / "functionals.csv", ["path", "start", "end", "S", "M", "Lambda", "V"], rows))
    return 0


def cmd_fki(spec: ProblemSpec, out: Path, args) -> int:
    G = spec.graph()
    a = spec.magnetic_potential(G)
    v = spec.electric_potential()
    f = spec.initial_function()
    op = operator.assemble(G, a, v)
    line_form = _orientation_sign(spec, args.orientation) * a
    threshold = spec.tolerance("z", 4.0)
    rows, status = [], 0
    for t in spec.run.t:
        est = fki.estimate_vector(G, line_form, v, f, t, spec.run.num_paths, spec.run.seed)
        exact = operator.semigroup_exact(op, t, f)
        z = fki.z_scores(est, exact)
        frac = fki.acceptance_fraction(z, threshold)
        print(f"t={t:g}: {frac:.1%} of vertices with z <= {threshold:g}")
        if frac < 0.95:
            status = 1
        rows += [(G.vertices[i], t, est.mean[i].real, est.mean[i].imag, est.stderr_re[i], est.stderr_im[i],
                  exact[i].real, exact[i].imag, z[i]) for i in range(G.size)]
    print(_write_csv(out / "fki.csv", ["vertex", "t", "mean_real", "mean_imag", "stderr_real", "stderr_imag",
                                       "exact_real", "exact_imag", "z"], rows))
    return status


def cmd_hodge(spec: ProblemSpec, out: Path, args) -> int:
    G = spec.graph()
    split = forms.hodge(G, spec.magnetic_potential(G))
    print(_write_csv(out / "hodge_u.csv", ["vertex", "value"],
                     ((G.vertices[i], split.u[i]) for i in range(G.size))))
    print(_write_csv(out / "hodge_eta.csv", ["p", "q", "value"],
                     ((G.vertices[i], G.vertices[j], split.eta[i, j]) for i, j in G.edges())))
    return 0


def cmd_verify(spec: ProblemSpec, out: Path, args) -> int:
    results = run_suite(spec, _orientation_sign(spec, args.orientation))
    print(format_table(results))
    print(_write_csv(out / "verify.csv", ["module", "check", "measured", "tolerance", "passed"],
                     ((r.module, r.name, r.measured, r.tolerance, int(r.passed)) for r in results)))
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="magjump", description=__doc__)
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("problem", help="problem file (JSON or YAML)")
    parser.add_argument("--out", default="magjump-out", help="output directory (default: %(default)s)")
    parser.add_argument("--seed", type=int, help="override run.seed")
    parser.add_argument("--num-paths", type=int, help="override run.num_paths")
    parser.add_argument("--orientation", choices=ORIENTATIONS,
                        help="line-integral increment a(from, to) or a(to, from)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = parse(Path(args.problem))
    except SchemaError as exc:
        for v in exc.violations:
            print(f"violation: {v}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        spec.run.seed = args.seed
    if args.num_paths is not None:
        spec.run.num_paths = args.num_paths
    return HANDLERS[args.command](spec, Path(args.out), args)


if __name__ == "__main__":
    sys.exit(main())
