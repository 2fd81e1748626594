"""Command-line front end: scenario in, JSON report out.

Exit status: 0 all stages pass, 1 a certification stage failed, 2 the
scenario could not be parsed, 3 a parameter lies outside its domain.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import scenario as sc
from .biharmonic import classify
from .curvature import ConformalMetric, curvature_sign_scan, power_law_sectional
from .errors import DegenerateInputError, DomainError, PreconditionError
from .hypersurface import Hyperplane
from .jets import Constant, PowerLaw, Reciprocal, z_grid
from .report import build_report, dumps, write_atomic
from .solutions import (
    Certificate,
    Counterexample,
    Stage,
    certify_counterexample,
    constraint_radius,
    make_counterexample,
    ode_solve_single,
    product_codim_k,
)

EXIT_PASS, EXIT_FAIL, EXIT_PARSE, EXIT_DOMAIN = 0, 1, 2, 3

log = logging.getLogger("bihyper")


def _factor(fam: dict):
    kind = fam["kind"]
    if kind == "power":
        return PowerLaw(fam["A"], fam["B"], fam["t"])
    if kind == "reciprocal":
        return Reciprocal(fam["A"], fam["B"])
    return Constant(fam["f0"])


def _counterexample(s: sc.Scenario) -> Counterexample:
    fam = s.family
    if fam["kind"] == "power":
        constraint_radius(fam["t"])  # domain check on t
        t = fam["t"]
    else:
        t = None
    hp = s.hyperplane
    if "direction" in hp:
        if t is None:
            raise DomainError("'direction' needs a power-law family to fix the radius")
        return make_counterexample(t, hp["direction"], hp["c"], fam["A"], fam["B"])
    plane = Hyperplane(tuple(hp["a"]), hp["c"])
    return Counterexample(ConformalMetric(plane.m + 1, _factor(fam)), plane, t)


def _grid(factor, s: sc.Scenario):
    return z_grid(factor, s.sampling["z_points"])


def run_certify(s: sc.Scenario):
    ce = _counterexample(s)
    smp = s.sampling
    cert = certify_counterexample(ce, _grid(ce.metric.factor, s), smp["plane_samples"],
                                  smp["seed"], smp["tolerance"])
    extra = {"hyperplane_a": list(ce.hyperplane.a), "sum_a_sq": ce.hyperplane.sum_sq}
    return cert, extra


def run_classify(s: sc.Scenario):
    hp = s.hyperplane
    if "a" not in hp:
        raise DomainError("classify needs explicit coefficients 'a'")
    plane = Hyperplane(tuple(hp["a"]), hp["c"])
    metric = ConformalMetric(plane.m + 1, _factor(s.family))
    tol = s.sampling["tolerance"]
    rep = classify(plane, metric, _grid(metric.factor, s), tol)
    stages = [
        Stage("residual_general", "biharmonic.residual_general", rep.max_abs_residual, tol,
              rep.biharmonic),
        Stage("case", "biharmonic.classify", rep.case_label.value, tol,
              rep.case_label.value != "NotBiharmonic", {"proper": rep.proper}),
    ]
    return Certificate("classification", stages), rep.to_dict()


def run_scan(s: sc.Scenario):
    factor = _factor(s.family)
    dim = s.sampling.get("ambient_dim", 5)
    metric = ConformalMetric(dim, factor)
    z = _grid(factor, s)
    scan = curvature_sign_scan(metric, z, s.sampling["plane_samples"], s.sampling["seed"])
    stages = [Stage("negative_curvature", "curvature.curvature_sign_scan", scan.max_K, 0.0,
                    scan.max_K < 0, scan.to_dict())]
    extra = {}
    if isinstance(factor, PowerLaw):
        # K is affine in the squared vertical extent of the plane, which ranges over [0, 1]
        bound = max(max(power_law_sectional(factor.A, factor.B, factor.t, zz, v) for v in (0.0, 1.0))
                    for zz in z)
        extra["closed_form_sup_K"] = bound
    return Certificate("curvature_scan", stages), extra


def run_ode(s: sc.Scenario):
    o = s.ode
    fam = s.family
    if "sum_a_sq" in o:
        S = o["sum_a_sq"]
    elif s.hyperplane and "a" in s.hyperplane:
        S = float(np.sum(np.square(s.hyperplane["a"])))
    elif fam["kind"] == "power":
        S = constraint_radius(fam["t"]) ** 2
    else:
        raise DomainError("ode needs 'ode.sum_a_sq', hyperplane coefficients, or a power law")
    factor = _factor(fam)
    if "initial" in o:
        init = o["initial"]
    else:
        j = factor.formula(o["z0"])
        init = [j.v0, j.v1, j.v2]
    tr = ode_solve_single(S, init, (o["z0"], o["z_end"]), o["tolerance"])
    stages = [
        Stage("integration_complete", "solutions.ode_solve_single", float(tr.z[-1]), 0.0,
              tr.complete, {"blow_up": tr.blow_up, "blow_down": tr.blow_down}),
        Stage("trajectory_residual", "biharmonic.residual_single", float(tr.residual.max()),
              o["tolerance"], bool(tr.residual.max() <= o["tolerance"])),
    ]
    if o["compare_family"]:
        ref = np.array([factor.formula(zz).v0 for zz in tr.z])
        rel = float(np.max(np.abs(tr.state[:, 0] / ref - 1)))
        stages.append(Stage("closed_form_agreement", "solutions.ode_solve_single", rel, 1e-6,
                            rel <= 1e-6))
    meta = dict(tr.metadata)
    meta["sum_a_sq"] = S
    meta["initial"] = list(init)
    return Certificate("ode", stages), meta


def run_product(s: sc.Scenario):
    ce = _counterexample(s)
    smp = s.sampling
    space, cert = product_codim_k(ce, s.product["n"], s.product["k"],
                                  _grid(ce.metric.factor, s), smp["plane_samples"],
                                  smp["seed"], smp["tolerance"])
    extra = {"ambient_dim": space.ambient_dim, "submanifold_dim": space.submanifold_dim,
             "codimension": space.codimension}
    return cert, extra


PIPELINES = {
    "certify": run_certify,
    "classify": run_classify,
    "scan-curvature": run_scan,
    "ode": run_ode,
    "product": run_product,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bihyper",
        description="Certify biharmonic hyperplanes in conformally flat spaces.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", default=False)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in PIPELINES:
        p = sub.add_parser(name)
        p.add_argument("--scenario", required=True,
                       help="scenario TOML file (bundled names such as example.toml work too)")
        p.add_argument("--out", help="report path (default: scenario output.path, else stdout)")
        p.add_argument("--seed", type=int, help="override sampling.seed")
        p.add_argument("--tolerance", type=float, help="override sampling.tolerance")
        p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    return parser


def run(argv=None, timestamp: str | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        s = sc.load(args.scenario, args.command)
    except sc.ScenarioError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    if args.seed is not None:
        s.sampling["seed"] = args.seed
    if args.tolerance is not None:
        s.sampling["tolerance"] = args.tolerance

    try:
        cert, extra = PIPELINES[s.command](s)
    except (DomainError, DegenerateInputError, PreconditionError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN

    report = build_report(s.command, s.echo(), s.sampling["seed"], s.sampling["tolerance"],
                          cert, extra, timestamp)
    text = dumps(report)
    out = args.out or s.output
    if out:
        write_atomic(out, text)
        log.info("report written to %s", out)
    else:
        sys.stdout.write(text)
    for st in cert.stages:
        log.info("stage %-24s %s value=%s", st.name, "pass" if st.passed else "FAIL", st.value)
    return EXIT_PASS if cert.passed else EXIT_FAIL


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
