"""Invariant suite run by ``magjump verify`` on one problem instance."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import fki, forms, graph, operator, paths
from .problem import ProblemSpec


class CheckResult(NamedTuple):
    module: str
    name: str
    measured: float
    tolerance: float
    passed: bool


def _le(module, name, measured, tol) -> CheckResult:
    measured = float(measured)
    return CheckResult(module, name, measured, tol, bool(measured <= tol))


def run_suite(spec: ProblemSpec, sign: float = 1.0) -> list[CheckResult]:
    """Every deterministic identity plus the statistical checks at the run's path count.

    ``sign = -1`` reads line integrals in the ``(to, from)`` orientation.
    """
    G = spec.graph()
    a = spec.magnetic_potential(G)
    v = spec.electric_potential()
    f = spec.initial_function()
    run = spec.run
    tol = spec.tolerance
    rng = np.random.default_rng(run.seed)
    results: list[CheckResult] = []
    add = results.append

    add(_le("graph_core", "validate", len(graph.validate(G)), 0))
    L = graph.generator_matrix(G)
    fr, gr = rng.standard_normal(G.size), rng.standard_normal(G.size)
    E_fr = graph.dirichlet_energy(G, fr).real
    scale = 1.0 + abs(E_fr)
    add(_le("graph_core", "conservativeness |L 1|", np.max(np.abs(L.sum(axis=1))), tol("identity", 1e-12) * scale))
    add(_le("graph_core", "-<Lf,f>_mu vs E(f)", abs(-graph.mu_inner(G, L @ fr, fr) - E_fr), tol("identity", 1e-12) * scale))
    add(_le("graph_core", "generator adjointness",
            abs(graph.mu_inner(G, L @ fr, gr) - graph.mu_inner(G, fr, L @ gr)), tol("identity", 1e-12) * scale))
    add(_le("graph_core", "energy density mass",
            abs(np.sum(graph.energy_density(G, fr) * G.mu) - E_fr), tol("identity", 1e-12) * scale))

    w = forms.random_one_form(G, rng)
    add(_le("one_forms", "<df,w> = <f,d*w>_mu",
            abs(forms.inner(G, forms.derive(G, fr), w) - graph.mu_inner(G, fr, forms.divergence(G, w))),
            tol("identity", 1e-12) * scale))
    add(_le("one_forms", "d*d = -L", np.max(np.abs(
        np.column_stack([forms.divergence(G, forms.derive(G, e)) for e in np.eye(G.size)]) + L)),
        tol("identity", 1e-12) * (1 + np.max(np.abs(L)))))
    split = forms.hodge(G, a)
    du = forms.derive(G, split.u)
    add(_le("one_forms", "hodge reconstruction", forms.norm(G, a - du - split.eta), tol("lstsq", 1e-10)))
    add(_le("one_forms", "hodge orthogonality", abs(forms.inner(G, du, split.eta)), tol("lstsq", 1e-10)))
    add(_le("one_forms", "hodge divergence-free", split.residual, 1e-8))
    lhs, rhs, _ = forms.energy_bound_check(G, a, f)
    add(_le("one_forms", "E^a(f) <= 4E(f) + 4|f|^2|a|^2", lhs - rhs, 1e-12 * max(rhs, 1.0)))

    op = operator.assemble(G, a, v)
    add(_le("magnetic_operator", "mu-Hermiticity", operator.hermiticity_residual(op), tol("identity", 1e-12) * (1 + np.max(np.abs(op.H)))))
    _, _, gap = operator.quadratic_form_check(op, f, fr)
    lhs = graph.mu_inner(G, op.H @ f, fr)
    add(_le("magnetic_operator", "<Hf,g>_mu = E^{a,v}(f,g)", gap, 1e-11 * (1 + abs(lhs))))
    ev = operator.spectrum(op)
    u = rng.standard_normal(G.size)
    add(_le("magnetic_operator", "gauge covariance", np.max(np.abs(operator.spectrum(operator.gauge_shift(op, u)) - ev)), 1e-10))
    add(_le("magnetic_operator", "spectrum under a -> -a",
            np.max(np.abs(operator.spectrum(operator.assemble(G, -a, v)) - ev)), 1e-10))
    ts = sorted(set(run.t) | {0.01, 0.1, 1.0, 10.0})
    add(_le("magnetic_operator", "diamagnetic domination",
            max(operator.diamagnetic_check(op, f, t) for t in ts), 1e-10))
    e_abs, e_mag, _ = operator.energy_diamag_check(G, a, f)
    add(_le("magnetic_operator", "E(|f|) <= E^a(f)", e_abs - e_mag, 1e-12 * abs(e_mag) + 1e-15))
    t0 = run.t[0]
    P = lambda g, t: operator.semigroup_exact(op, t, g)  # noqa: E731
    add(_le("magnetic_operator", "semigroup law", np.max(np.abs(P(P(f, t0), t0) - P(f, 2 * t0))), 1e-10))
    bound = np.exp(t0 * op.v_minus_sup) * np.sqrt(np.sum(G.mu * np.abs(f) ** 2))
    add(_le("magnetic_operator", "L2 bound", np.sqrt(np.sum(G.mu * np.abs(P(f, t0)) ** 2)) - bound, 1e-12 * bound))

    ens = paths.simulate_stationary(G, t0, run.num_paths, run.seed)
    line_form = sign * a
    S = paths.stratonovich_integral(ens, line_form)
    M = paths.martingale_part(ens, line_form)
    Lam = paths.divergence_part(ens, line_form)
    rev = ens.reversed()
    mag = 1.0 + float(np.max(np.abs(S), initial=0.0)) + float(np.max(np.abs(Lam), initial=0.0))
    add(_le("path_simulator", "S = M + Lambda", np.max(np.abs(S - M - Lam), initial=0.0), 1e-12 * mag))
    add(_le("path_simulator", "S(rev) = -S", np.max(np.abs(paths.stratonovich_integral(rev, line_form) + S), initial=0.0), 1e-12 * mag))
    add(_le("path_simulator", "Lambda(rev) = Lambda", np.max(np.abs(paths.divergence_part(rev, line_form) - Lam), initial=0.0), 1e-12 * mag))
    add(_le("path_simulator", "M(rev) = -M - 2 Lambda",
            np.max(np.abs(paths.martingale_part(rev, line_form) + M + 2 * Lam), initial=0.0), 1e-12 * mag))
    V = paths.potential_integral(ens, v)
    add(_le("path_simulator", "V(rev) = V", np.max(np.abs(paths.potential_integral(rev, v) - V), initial=0.0),
            1e-12 * (1 + float(np.max(np.abs(V), initial=0.0)))))
    fk = paths.fukushima(ens, fr)
    add(_le("path_simulator", "A = M + N", np.max(np.abs(fk.A - fk.M - fk.N), initial=0.0), 1e-12 * scale))
    small = 0.5 * float(np.min(np.abs(a[a != 0]), initial=2.0))
    add(_le("path_simulator", "compensated sum at small eps",
            np.max(np.abs(paths.compensated_integral(ens, line_form, small) - S), initial=0.0), 1e-12 * mag))

    energy = paths.martingale_energy(G, line_form, t0, run.num_paths, run.seed, ensemble=ens)
    add(_le("path_simulator", "(1/2T) E_mu[M^2] vs |a|^2 (|z|)", abs(energy.z), tol("energy_sigma", 3.0)))
    energy_f = paths.fukushima_energy(G, fr, t0, run.num_paths, run.seed, ensemble=ens)
    add(_le("path_simulator", "(1/2T) E_mu[(M^f)^2] vs E(f) (|z|)", abs(energy_f.z), tol("energy_sigma", 3.0)))
    phi = np.where(G.edge_mask, 1.0, 0.0)
    levy = paths.levy_system_estimate(G, phi, t0, run.num_paths, run.seed, ensemble=ens)
    add(_le("path_simulator", "Levy system (|z|)", abs(levy.z), tol("z", 4.0)))

    add(_le("fki_estimator", "antisymmetry audit", fki.antisymmetry_audit(ens, line_form), 1e-12 * mag))
    for t in run.t:
        est = fki.estimate_vector(G, line_form, v, f, t, run.num_paths, run.seed)
        z = fki.z_scores(est, operator.semigroup_exact(op, t, f))
        add(CheckResult("fki_estimator", f"FKI vs exact at t={t:g} (fraction z<=4)",
                        fki.acceptance_fraction(z, tol("z", 4.0)), 0.95,
                        fki.acceptance_fraction(z, tol("z", 4.0)) >= 0.95))
    one = fki.estimate_vector(G, None, None, np.ones(G.size), t0, run.num_paths, run.seed)
    add(_le("fki_estimator", "conservativeness P_t 1 = 1",
            float(np.max(np.abs(one.mean - 1))) + float(np.max(one.stderr)), 0.0))
    return results


def format_table(results: list[CheckResult]) -> str:
    rows = [("module", "check", "measured", "tolerance", "status")]
    for r in results:
        bound = f">= {r.tolerance:.3g}" if "fraction" in r.name else f"<= {r.tolerance:.3g}"
        rows.append((r.module, r.name, f"{r.measured:.3e}", bound, "PASS" if r.passed else "FAIL"))
    widths = [max(len(row[i]) for row in rows) for i in range(5)]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in rows)

