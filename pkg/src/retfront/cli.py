"""Command-line entry point.

Exit codes: 0 success, 1 a check ran and failed, 2 inconclusive (unknown
determinacy, unresolved sign), 3 input error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import catalog, equivalence, propagation, stability, wavefront
from .jetalg import JetPoly, RingContext

EXIT_OK, EXIT_FAILED, EXIT_UNKNOWN, EXIT_INPUT = 0, 1, 2, 3
PARSE_TRUNCATION = 40
_T_FLAGS = ("--t", "--t-values")


class InputError(Exception):
    pass


def _write_json(out: Path, name: str, payload) -> None:
    out.mkdir(parents=True, exist_ok=True)
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    (out / name).write_text(text, encoding="utf-8")
    sys.stdout.write(text)


def _parse_germ(text: str, r: int, k: int) -> JetPoly:
    try:
        return JetPoly.parse(text, RingContext(r=r, k=k), PARSE_TRUNCATION)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _signs(text: str | None):
    if not text:
        return None
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok in ("+", "+1", "1"):
            out.append(1)
        elif tok in ("-", "-1"):
            out.append(-1)
        else:
            raise InputError(f"bad sign {tok!r}; use + or -")
    return tuple(out)


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise InputError(f"bad number list {text!r}") from exc


# ---------------------------------------------------------------------------
# commands


def cmd_determinacy(args) -> int:
    f0 = _parse_germ(args.germ, args.r, args.k)
    try:
        verdict = equivalence.determinacy_order(f0, args.l_max)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    payload = {"germ": f0.to_text(), "r": args.r, "k": args.k, "status": verdict.status.value,
               "order": verdict.order, "order_tested": verdict.order_tested,
               "l_max": args.l_max, "truncation": verdict.order_tested + 1}
    _write_json(args.out, "determinacy.json", payload)
    return EXIT_OK if verdict.determined else EXIT_UNKNOWN


def cmd_classify(args) -> int:
    f0 = _parse_germ(args.germ, args.r, args.k)
    try:
        rec = catalog.recognize(f0, args.n)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    payload = {"germ": f0.to_text(), "r": args.r, "k": args.k, **rec.to_json()}
    _write_json(args.out, "classify.json", payload)
    if rec.reason.startswith("not finitely") or (rec.classified and rec.sign is None
                                                  and len(rec.candidates) > 1):
        return EXIT_UNKNOWN
    return EXIT_OK


def _family_from_args(args) -> tuple[JetPoly, str | None]:
    if args.label:
        try:
            entry = catalog.find_entry(args.label, _signs(args.signs), args.variant)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        return entry.polynomial(), entry.label
    if not args.family:
        raise InputError("give a family polynomial or --label")
    try:
        ctx = stability.family_context(args.r, args.k, args.n, with_t=True)
        return JetPoly.parse(args.family, ctx, PARSE_TRUNCATION), None
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def cmd_check_stability(args) -> int:
    F, label = _family_from_args(args)
    if F.constant_term != 0:
        raise InputError("family must vanish at the origin")
    if not stability.is_PC_nondegenerate(F):
        raise InputError("family is not P-C-non-degenerate (x, t, F, F_x, F_y must be independent)")
    try:
        report = stability.check_generating_family_stable(F, args.truncation, label)
    except stability.NotFinitelyDetermined as exc:
        _write_json(args.out, "stability.json", {"label": label, "stable": None, "error": str(exc)})
        return EXIT_UNKNOWN
    payload = report.to_json()
    payload["family"] = F.to_text()
    payload["versal"] = stability.is_infinitesimally_versal(
        stability.UnfoldingSpec(F), report.truncation_used).versal
    _write_json(args.out, "stability.json", payload)
    return EXIT_OK


def cmd_verify_catalog(args) -> int:
    entries = catalog.all_entries() if args.r is None else catalog.list_entries(args.r, args.n)
    report = catalog.verify_catalog(entries)
    args.out.mkdir(parents=True, exist_ok=True)
    text = json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n"
    (args.out / "catalog_verification.json").write_text(text, encoding="utf-8")
    (args.out / "catalog.json").write_text(
        json.dumps(catalog.export_catalog_json(entries), indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    print(report.table())
    print(f"{sum(c.passed for c in report.checks)}/{len(report.checks)} entries passed")
    return EXIT_OK if report.all_passed else EXIT_FAILED


def _sampling(args) -> wavefront.Sampling:
    base = wavefront.Sampling()
    return wavefront.Sampling(
        window=args.window if args.window is not None else base.window,
        curve_points=args.grid or base.curve_points,
        surface_points=args.grid or base.surface_points)


def _summary(series: wavefront.BifurcationSeries, files) -> dict:
    return {
        "label": series.label,
        "t_values": [wavefront._num(t) for t in series.t_values],
        "files": [p.name for p in files],
        "sheets": [{"sigma": list(s), "t": wavefront._num(t), "vertices": len(sh.vertices),
                    "interior_cusps": len(sh.interior_cusps()),
                    "boundary_cusps": len(sh.markers_of("boundary-cusp")),
                    "method": sh.method, "parameters": list(sh.param_names)}
                   for (s, t), sh in sorted(series.sheets.items(),
                                            key=lambda kv: (kv[0][1], len(kv[0][0]), kv[0][0]))],
    }


def cmd_wavefront(args) -> int:
    F, label = _family_from_args(args)
    t_values = _floats(args.t)
    if not t_values:
        raise InputError("need at least one t value")
    try:
        series = wavefront.bifurcation_series(label or "family", F=F, t_values=t_values,
                                              sampling=_sampling(args))
        fmt = args.format or ("svg" if series.ambient_dim == 2 else "obj")
        files = wavefront.export_geometry(series, fmt, args.out)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    payload = _summary(series, files)
    _write_json(args.out, f"{series.label}_summary.json", payload)
    return EXIT_OK


def _metric(text: str, dim: int) -> propagation.MetricSpec:
    if text == "euclidean":
        return propagation.MetricSpec.euclidean(dim)
    if text.startswith("diag:"):
        vals = _floats(text[5:])
        if len(vals) != dim or min(vals) <= 0:
            raise InputError(f"diag metric needs {dim} positive entries")
        return propagation.MetricSpec.diagonal(vals)
    raise InputError(f"unknown metric {text!r}; use euclidean or diag:a,b,...")


def cmd_propagate(args) -> int:
    try:
        if args.front_json:
            front = propagation.InitialFront.from_json(Path(args.front_json).read_text())
        else:
            front = propagation.builtin_front(args.shape, args.samples)
    except (OSError, ValueError, KeyError) as exc:
        raise InputError(str(exc)) from exc
    metric = _metric(args.metric, front.dim)
    t_values = _floats(args.t)
    if not t_values or any(t < 0 for t in t_values):
        raise InputError("t values must be non-negative")
    bundle = propagation.flow(propagation.lift_all(front, metric, args.rays), max(t_values), args.dt)
    sheets = {}
    for t in t_values:
        for sh in propagation.project_front(bundle, t):
            sheets[(sh.sigma, float(t))] = sh
    series = wavefront.BifurcationSeries(front.name, tuple(float(t) for t in t_values), sheets)
    fmt = args.format or ("svg" if front.dim == 2 else "obj")
    try:
        files = wavefront.export_geometry(series, fmt, args.out)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    drift = max(float(abs(propagation.hamiltonian(metric, e.q[-1], e.p[-1]) - 1).max())
                for e in bundle.edges.values())
    payload = {"shape": front.name, "metric": metric.name, "t_values": t_values, "dt": args.dt,
               "files": [p.name for p in files], "max_H_drift": drift}
    _write_json(args.out, f"{front.name}_propagation.json", payload)
    return EXIT_OK


def cmd_verify_lift(args) -> int:
    if args.family == "identity":
        fam = propagation.identity_family
    elif args.family == "translation":
        fam = propagation.translation_family(_floats(args.v), args.c)
    elif args.family == "scaling":
        fam = propagation.scaling_family
    else:
        raise InputError(f"unknown family {args.family!r}")
    n = len(_floats(args.v)) if args.family == "translation" else args.n
    points = [(t, [0.3 * (i + 1) * t + 0.1 * i for i in range(n)], 0.4 - t, 0.7 * t,
               [0.5 - 0.2 * i + t for i in range(n)]) for t in (-0.5, 0.0, 0.25, 1.0)]
    check = propagation.verify_big_jet_lift(fam, points, step=args.step)
    payload = {"family": args.family, "step": args.step, "max_residual": check.max_residual,
               "residuals": check.residuals, "h": check.h_values, "alpha": check.alpha_values,
               "passed": check.max_residual < args.tol}
    _write_json(args.out, f"lift_{args.family}.json", payload)
    return EXIT_OK if payload["passed"] else EXIT_FAILED


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="retfront",
                                description="Wavefront bifurcations on a corner: algebra and geometry")
    p.add_argument("--out", type=Path, default=Path("retfront-out"), help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def with_out(sp):
        sp.add_argument("--out", type=Path, default=argparse.SUPPRESS, help="output directory")
        return sp

    d = with_out(sub.add_parser("determinacy", help="reticular K-determinacy order of a germ"))
    d.add_argument("germ")
    d.add_argument("--r", type=int, default=1)
    d.add_argument("--k", type=int, default=0)
    d.add_argument("--l-max", type=int, default=equivalence.DEFAULT_L_MAX)
    d.set_defaults(func=cmd_determinacy)

    c = with_out(sub.add_parser("classify", help="match a germ against the catalog"))
    c.add_argument("germ")
    c.add_argument("--r", type=int, default=1)
    c.add_argument("--k", type=int, default=0)
    c.add_argument("--n", type=int, default=None, help="restrict to entries with at most n q's")
    c.set_defaults(func=cmd_classify)

    def family_args(sp):
        sp.add_argument("family", nargs="?", help="family polynomial in x, y, t, q1.., z")
        sp.add_argument("--label", help="catalog label, e.g. 1B3 or 0C3-")
        sp.add_argument("--variant", type=int, default=1)
        sp.add_argument("--signs", help="extra sign slots, e.g. +,-")
        sp.add_argument("--r", type=int, default=1)
        sp.add_argument("--k", type=int, default=0)
        sp.add_argument("--n", type=int, default=1)

    s = with_out(sub.add_parser("check-stability", help="stability of a generating family"))
    family_args(s)
    s.add_argument("--truncation", type=int, default=None)
    s.set_defaults(func=cmd_check_stability)

    v = with_out(sub.add_parser("verify-catalog", help="check every normal form"))
    v.add_argument("--r", type=int, default=None)
    v.add_argument("--n", type=int, default=None)
    v.set_defaults(func=cmd_verify_catalog)

    w = with_out(sub.add_parser("wavefront", help="sample and export fronts W_{sigma,t}"))
    family_args(w)
    w.add_argument("--t", "--t-values", dest="t", default="-1,0,1")
    w.add_argument("--format", choices=("svg", "obj", "json"))
    w.add_argument("--window", type=float, default=None)
    w.add_argument("--grid", type=int, default=None)
    w.set_defaults(func=cmd_wavefront)

    g = with_out(sub.add_parser("propagate", help="characteristic propagation of a front"))
    g.add_argument("--shape", default="segment-with-endpoint", choices=propagation.BUILTIN_SHAPES)
    g.add_argument("--front-json", help="sampled immersion in JSON instead of a built-in shape")
    g.add_argument("--metric", default="euclidean")
    g.add_argument("--t", "--t-values", dest="t", default="0.5")
    g.add_argument("--dt", type=float, default=1e-3)
    g.add_argument("--rays", type=int, default=64, help="directions per point on higher-codim edges")
    g.add_argument("--samples", type=int, default=201)
    g.add_argument("--format", choices=("svg", "obj", "json"))
    g.set_defaults(func=cmd_propagate)

    f = with_out(sub.add_parser("verify-lift", help="numeric check of the big 1-jet lift"))
    f.add_argument("--family", default="identity", choices=("identity", "translation", "scaling"))
    f.add_argument("--vector", dest="v", default="1,0", help="translation vector")
    f.add_argument("--c", type=float, default=0.5)
    f.add_argument("--n", type=int, default=2)
    f.add_argument("--step", type=float, default=1e-5)
    f.add_argument("--tol", type=float, default=1e-6)
    f.set_defaults(func=cmd_verify_lift)
    return p


def _join_t(argv: list[str]) -> list[str]:
    """Let "--t -1,0,1" through: argparse would read -1,0,1 as an option."""
    out, i = [], 0
    while i < len(argv):
        if argv[i] in _T_FLAGS and i + 1 < len(argv):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_join_t(argv))
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
