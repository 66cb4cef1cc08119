"""Verification harness: claim registry, suites, JSON/text reports."""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace
from functools import lru_cache
from typing import Callable

import numpy as np

SUITES = ("structure", "planes", "orbits", "deform", "twistor", "all")
FORMATS = ("json", "text")


@dataclass(frozen=True)
class Config:
    suite: str = "all"
    case: str | None = None
    tolerance: float = 1e-9
    samples: int = 100
    seed: int = 42
    nmax: int = 10
    gamma_max: int = 4
    format: str = "text"
    spectrum_out: str | None = None
    jobs: int = 1
    timings: bool = False

    def echo(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out.pop("timings")
        out.pop("jobs")
        return out


@dataclass
class Report:
    claim_id: str
    status: str                      # pass | fail | error
    residual: float
    tolerance: float
    witness: object = None
    runtime_ms: float = 0.0

    def as_dict(self, timings: bool = False) -> dict:
        d = {"claim_id": self.claim_id, "status": self.status,
             "residual": _jsonable(self.residual), "tolerance": _jsonable(self.tolerance),
             "witness": _jsonable(self.witness)}
        if timings:
            d["runtime_ms"] = round(self.runtime_ms, 3)
        return d


@dataclass(frozen=True)
class Outcome:
    residual: float
    tolerance: float
    witness: object = None


@dataclass(frozen=True)
class Claim:
    claim_id: str
    suite: str
    fn: Callable[[Config], Outcome]
    case: str | None = None
    criterion: int | None = None     # acceptance criterion addressed, if any


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, complex):
        return [_jsonable(x.real), _jsonable(x.imag)]
    return x


def _negative(observed: float, bound: float) -> float:
    """Residual of a claim asserting observed > bound."""
    return max(0.0, bound - observed)


def _composite(parts: dict) -> Outcome:
    """parts: name -> Outcome. Residual is the worst excess over the part tolerances."""
    excess = max(max(0.0, o.residual - o.tolerance) for o in parts.values())
    wit = {k: {"residual": o.residual, "tolerance": o.tolerance,
               "pass": o.residual <= o.tolerance, "witness": o.witness}
           for k, o in sorted(parts.items())}
    return Outcome(excess, 0.0, wit)


# ---------------------------------------------------------------- structure


def _nearly_parallel(cfg: Config) -> Outcome:
    from .squashed import verify_nearly_parallel
    r = verify_nearly_parallel(n_points=cfg.samples, n_tuples=20, seed=cfg.seed)
    return Outcome(r.nearly_parallel, cfg.tolerance)


def _st_pairs(seed: int, n: int = 5):
    rng = np.random.default_rng(seed)
    return [(float(a), float(b)) for a, b in rng.uniform(0.3, 2.0, size=(n, 2))]


def _parametric_identity(cfg: Config) -> Outcome:
    from .squashed import VariationParams, verify_nearly_parallel
    worst, corrected, pairs = 0.0, 0.0, _st_pairs(cfg.seed)
    for s, t in pairs:
        r = verify_nearly_parallel(VariationParams(s, t), n_points=10, n_tuples=5, seed=cfg.seed)
        worst = max(worst, r.parametric)
        corrected = max(corrected, r.parametric_corrected)
    return Outcome(worst, cfg.tolerance, {"st_pairs": pairs, "corrected_residual": corrected})


def _hodge_duality(cfg: Config) -> Outcome:
    from .squashed import random_sphere_points, squashed_structure, star_deviation
    st = squashed_structure()
    P = random_sphere_points(np.random.default_rng(cfg.seed), cfg.samples)
    devs = [star_deviation(st, p) for p in P]
    i = int(np.argmax(devs))
    return Outcome(devs[i], cfg.tolerance, {"worst_point": P[i]})


# ---------------------------------------------------------------- planes


@lru_cache(maxsize=None)
def _enumeration():
    from .classification import enumerate_plane_solutions
    return enumerate_plane_solutions()


def _plane_global(V, cfg: Config) -> Outcome:
    from .classification import plane_global_associativity
    r = plane_global_associativity(V, n_samples=max(cfg.samples, 200), seed=cfg.seed,
                                   tol=cfg.tolerance)
    return Outcome(r.worst_residual, cfg.tolerance, r.witness)


def _plane_v1(cfg: Config) -> Outcome:
    from .classification import V1_PLANE
    return _plane_global(V1_PLANE, cfg)


def _plane_v2(cfg: Config) -> Outcome:
    from .classification import V2_PLANE
    return _plane_global(V2_PLANE, cfg)


WITNESS_BOUND = 1e-3


def _sol1_counterexample(cfg: Config) -> Outcome:
    """Negative claim: the sol 1 plane is not globally associative."""
    from .classification import REFERENCE_PLANE_SOLUTIONS, plane_global_associativity, plane_of
    r = plane_global_associativity(plane_of(REFERENCE_PLANE_SOLUTIONS["sol1"]),
                                   n_samples=max(cfg.samples, 200), seed=cfg.seed,
                                   tol=cfg.tolerance)
    return Outcome(_negative(r.worst_residual, WITNESS_BOUND), 0.0,
                   {"observed": r.worst_residual, "point": r.witness})


def _sol1_reference_witness(cfg: Config) -> Outcome:
    from .classification import witness_contraction
    v = witness_contraction()
    return Outcome(_negative(v, WITNESS_BOUND), 0.0, {"observed": v})


def _plane_enumeration(cfg: Config) -> Outcome:
    from .classification import REFERENCE_PLANE_SOLUTIONS, match_reference
    en = _enumeration()
    per = {}
    for name in REFERENCE_PLANE_SOLUTIONS:
        hits = en.matched.get(name) or []
        per[name] = min((match_reference(t)[1] for t in hits), default=math.inf)
    extra = [match_reference(t)[1] for _, t in en.unmatched]
    res = max(list(per.values()) + extra)
    return Outcome(res, 1e-6, {"match_distance": per, "unmatched": [t for _, t in en.unmatched],
                               "n_solutions": len(en.solutions)})


def _plane_classification(cfg: Config) -> Outcome:
    return _composite({
        "plane_V1_global": _plane_v1(cfg),
        "plane_V2_global": _plane_v2(cfg),
        "sol1_reference_witness": _sol1_reference_witness(cfg),
        "plane_enumeration": _plane_enumeration(cfg),
    })


# ---------------------------------------------------------------- orbits


T3_EXPECTED = np.array([[0.5, 0.5, 0.5, 0.0, 0.5], [0.5, 0.5, 0.5, 0.0, -0.5]])


@lru_cache(maxsize=None)
def _t3_slice():
    from .classification import t3_slice_solve
    return t3_slice_solve()


def _t3_zero_set(cfg: Config) -> Outcome:
    S = _t3_slice().solutions
    if len(S) == 0:
        return Outcome(math.inf, 1e-6, {"solutions": []})
    D = np.linalg.norm(S[:, None, :] - T3_EXPECTED[None, :, :], axis=2)
    haus = max(D.min(axis=1).max(), D.min(axis=0).max())
    return Outcome(float(haus), 1e-6, {"solutions": S})


def _t3_associative(cfg: Config) -> Outcome:
    from .classification import A1_BASE, orbit_is_associative
    r = orbit_is_associative("T3", A1_BASE, tol=cfg.tolerance)
    return Outcome(r.residual, cfg.tolerance)


def _t3_orbit(cfg: Config) -> Outcome:
    return _composite({"t3_zero_set": _t3_zero_set(cfg), "t3_associative": _t3_associative(cfg)})


def _calibration_values(cfg: Config) -> Outcome:
    from .classification import A1_BASE, A2_BASE, A3_BASE, orbit_calibration
    from .squashed import random_sphere_points
    from .symmetry import eta_matrix, get_action
    vals = {
        "A2": (orbit_calibration("SU2_irr", A2_BASE)[0], -243 / 25),
        "A3": (orbit_calibration("SU2_irr", A3_BASE)[0], 513 / 125),
        "A1": (orbit_calibration("T3", A1_BASE)[0], -81 / 250),
    }
    act = get_action("SU2_irr")
    P = random_sphere_points(np.random.default_rng(cfg.seed), cfg.samples)
    eta_sq = max(abs(float(np.sum(eta_matrix(act, p) ** 2)) - 9.0) for p in P)
    res = max([abs(a - b) for a, b in vals.values()] + [eta_sq])
    return Outcome(res, cfg.tolerance, {"values": {k: v[0] for k, v in vals.items()},
                                        "eta_square_sum_deviation": eta_sq})


def _induced_metrics(cfg: Config) -> Outcome:
    from .classification import REFERENCE_METRICS, orbit_metrics
    got = orbit_metrics()
    dev = {k: float(np.abs(got[k] - REFERENCE_METRICS[k]).max()) for k in REFERENCE_METRICS}
    return Outcome(max(dev.values()), 1e-10,
                   {"deviation": dev, "computed": {k: got[k] for k in sorted(got)}})


CASE1_MUS = (1.8, 2.0, 3.0)


def _su2_irr_case1(cfg: Config) -> Outcome:
    from .classification import su2_irr_case1, su2_irr_case1_closed_form
    diff = max(abs(su2_irr_case1(m) - su2_irr_case1_closed_form(m)) for m in CASE1_MUS)
    grid = np.linspace(math.sqrt(3) + 1e-3, 20.0, 400)
    worst_pos = min(su2_irr_case1(float(m)) for m in grid)
    return Outcome(max(diff, _negative(worst_pos, 0.0)), 1e-8,
                   {"closed_form_diff": diff, "min_value_above_sqrt3": worst_pos})


# ---------------------------------------------------------------- deform


EXPECTED_KERNEL = {"L1": 4, "L2": 8, "A2": 16, "A3": 16, "A1": 10}
EXPECTED_TRIVIAL = {"L1": 4, "L2": 8, "A1": 10, "A2": 9, "A3": 10}
REFERENCE_T3_MODES = tuple(sorted(
    tuple(s * x for x in g) for g in [(2, 0, 0), (0, 2, 0), (0, 0, 2), (0, 1, 1), (0, 1, -1)] for s in (1, -1)
))
NMAX_LEVELS = (8, 10, 12)


def _connection_matrices(cfg: Config) -> Outcome:
    from .deformation import CASE_TAGS, connection_deviation
    dev = {c: connection_deviation(c) for c in CASE_TAGS}
    return Outcome(max(dev.values()), cfg.tolerance, dev)


def _kernel_values(case: str, nmax: int, gamma_max: int) -> dict:
    from .deformation import brute_force_kernel, kernel_dimension, t3_brute_force, t3_kernel
    if case == "A1":
        k = t3_kernel(gamma_max)
        return {"kernel_dimension": k.dimension, "brute_force": t3_brute_force(gamma_max),
                "modes": k.modes}
    return {"kernel_dimension": kernel_dimension(case, nmax),
            "brute_force": brute_force_kernel(case, nmax)}


def _kernel_claim(case: str):
    def fn(cfg: Config) -> Outcome:
        v = _kernel_values(case, cfg.nmax, cfg.gamma_max)
        exp = EXPECTED_KERNEL[case]
        res = max(abs(v["kernel_dimension"] - exp), abs(v["brute_force"] - exp))
        if case == "A1":
            res = max(res, 0 if tuple(v["modes"]) == REFERENCE_T3_MODES else 1)
        return Outcome(float(res), 0.0, {"value": v["kernel_dimension"], "expected": exp, **v})
    return fn


def _deformation_dimensions(cfg: Config) -> Outcome:
    parts = {}
    for c in ("L1", "L2", "A2", "A3"):
        for n in NMAX_LEVELS:
            parts[f"kernel_dim_{c}_n{n}"] = _kernel_claim(c)(replace(cfg, nmax=n))
    parts["kernel_dim_A1"] = _kernel_claim("A1")(cfg)
    return _composite(parts)


GAP_BOUND = 1e3


def _trivial_claim(case: str):
    def fn(cfg: Config) -> Outcome:
        from .deformation import trivial_deformation_rank
        r = trivial_deformation_rank(case, seed=cfg.seed)
        res = max(abs(r.rank - EXPECTED_TRIVIAL[case]), _negative(r.gap, GAP_BOUND))
        return Outcome(float(res), 0.0, {"rank": r.rank, "expected": EXPECTED_TRIVIAL[case],
                                         "gap": r.gap, "equation_residual": r.equation_residual})
    return fn


def _trivial_ranks(cfg: Config) -> Outcome:
    from .deformation import CASE_TAGS
    return _composite({f"trivial_rank_{c}": _trivial_claim(c)(cfg) for c in CASE_TAGS})


# ---------------------------------------------------------------- twistor


def _hat_containment(cfg: Config) -> Outcome:
    from .twistor import hat_containment
    return Outcome(hat_containment("A3", n_samples=max(cfg.samples, 200), seed=cfg.seed), 1e-6)


def _holomorphic_claim(case: str):
    def fn(cfg: Config) -> Outcome:
        from .twistor import holomorphic_curve_check
        r = holomorphic_curve_check(case, n_samples=cfg.samples, seed=cfg.seed, tol=cfg.tolerance)
        want_horizontal = case == "A2"
        res = r.residual
        if r.horizontal != want_horizontal:
            res = max(res, 1.0)
        return Outcome(res, cfg.tolerance, {"horizontal": r.horizontal,
                                            "horizontal_residual": r.horizontal_residual})
    return fn


def _twistor_hat(cfg: Config) -> Outcome:
    parts = {"hat_A3_in_A2": _hat_containment(cfg)}
    for c in ("A1", "A2", "A3"):
        parts[f"holomorphic_{c}"] = _holomorphic_claim(c)(cfg)
    return _composite(parts)


def _veronese_stabilizer(cfg: Config) -> Outcome:
    from .twistor import veronese_stabilizer_check
    r = veronese_stabilizer_check(n_pairs=cfg.samples, seed=cfg.seed)
    res = max(0.0, r.multiplicativity - 1e-8) + abs(r.intersection_dimension - 6)
    return Outcome(float(res), 0.0, {"multiplicativity": r.multiplicativity,
                                     "intersection_dimension": r.intersection_dimension,
                                     "su2_agreement": r.su2_agreement})


# ---------------------------------------------------------------- determinism


def _determinism(cfg: Config) -> Outcome:
    sub = replace(cfg, suite="structure", case=None, jobs=1, timings=False)
    a = render_json(run("structure", sub), sub)
    b = render_json(run("structure", sub), sub)
    return Outcome(0.0 if a == b else 1.0, 0.0, {"bytes": len(a)})


# ---------------------------------------------------------------- registry


def _registry() -> tuple[Claim, ...]:
    claims = [
        Claim("nearly_parallel", "structure", _nearly_parallel, criterion=1),
        Claim("parametric_identity", "structure", _parametric_identity, criterion=2),
        Claim("hodge_duality", "structure", _hodge_duality, criterion=3),
        Claim("plane_classification", "planes", _plane_classification, criterion=4),
        Claim("plane_V1_global", "planes", _plane_v1),
        Claim("plane_V2_global", "planes", _plane_v2),
        Claim("sol1_counterexample", "planes", _sol1_counterexample),
        Claim("sol1_reference_witness", "planes", _sol1_reference_witness),
        Claim("plane_enumeration", "planes", _plane_enumeration),
        Claim("t3_orbit", "orbits", _t3_orbit, "A1", criterion=5),
        Claim("calibration_values", "orbits", _calibration_values, criterion=6),
        Claim("induced_metrics", "orbits", _induced_metrics, criterion=7),
        Claim("su2_irr_case1", "orbits", _su2_irr_case1, criterion=13),
        Claim("connection_matrices", "deform", _connection_matrices, criterion=8),
        Claim("deformation_dimensions", "deform", _deformation_dimensions, criterion=9),
        Claim("trivial_ranks", "deform", _trivial_ranks, criterion=10),
        Claim("twistor_hat", "twistor", _twistor_hat, criterion=11),
        Claim("veronese_stabilizer", "twistor", _veronese_stabilizer, criterion=12),
        Claim("determinism", "all", _determinism, criterion=14),
    ]
    for c in ("L1", "L2", "A1", "A2", "A3"):
        claims.append(Claim(f"kernel_dim_{c}", "deform", _kernel_claim(c), c))
        claims.append(Claim(f"trivial_rank_{c}", "deform", _trivial_claim(c), c))
    for c in ("A1", "A2", "A3"):
        claims.append(Claim(f"holomorphic_{c}", "twistor", _holomorphic_claim(c), c))
    return tuple(claims)


REGISTRY = {c.claim_id: c for c in _registry()}
CRITERIA = {c.criterion: c.claim_id for c in REGISTRY.values() if c.criterion is not None}


def select(suite: str, case: str | None = None) -> list[Claim]:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; expected one of {', '.join(SUITES)}")
    out = [c for c in REGISTRY.values() if suite == "all" or c.suite == suite]
    if case is not None:
        out = [c for c in out if c.case == case]
    return sorted(out, key=lambda c: c.claim_id)


def run_claim(claim: Claim, cfg: Config) -> Report:
    t0 = time.perf_counter()
    try:
        o = claim.fn(cfg)
        status = "pass" if o.residual <= o.tolerance else "fail"
        rep = Report(claim.claim_id, status, float(o.residual), float(o.tolerance), o.witness)
    except Exception as exc:  # reported, not raised
        rep = Report(claim.claim_id, "error", math.inf, 0.0, f"{type(exc).__name__}: {exc}")
    rep.runtime_ms = (time.perf_counter() - t0) * 1e3
    return rep


def run(suite: str, config: Config | None = None) -> list[Report]:
    cfg = config or Config(suite=suite)
    claims = select(suite, cfg.case)
    if cfg.jobs > 1:
        with ThreadPoolExecutor(cfg.jobs) as ex:
            reports = list(ex.map(lambda c: run_claim(c, cfg), claims))
    else:
        reports = [run_claim(c, cfg) for c in claims]
    return sorted(reports, key=lambda r: r.claim_id)


def summary(reports) -> dict:
    out = {"pass": 0, "fail": 0, "error": 0}
    for r in reports:
        out[r.status] += 1
    out["total"] = len(reports)
    return out


def render_json(reports, cfg: Config) -> str:
    doc = {"config": _jsonable(cfg.echo()),
           "claims": [r.as_dict(cfg.timings) for r in reports],
           "summary": summary(reports)}
    return json.dumps(doc, indent=2, sort_keys=True)


def _short(x) -> str:
    return f"{x:.3e}" if isinstance(x, float) and math.isfinite(x) else str(x)


def render_text(reports, cfg: Config) -> str:
    lines = []
    w = max((len(r.claim_id) for r in reports), default=10)
    for r in reports:
        line = f"{r.status.upper():5s}  {r.claim_id:<{w}}  residual={_short(r.residual)}  tol={_short(r.tolerance)}"
        if cfg.timings:
            line += f"  {r.runtime_ms:.0f} ms"
        if r.status == "error":
            line += f"  {r.witness}"
        lines.append(line)
    s = summary(reports)
    lines.append(f"{s['pass']} passed, {s['fail']} failed, {s['error']} errors")
    return "\n".join(lines)


# ---------------------------------------------------------------- argument handling


_CASTS = {"tolerance": float, "samples": int, "seed": int, "nmax": int, "gamma_max": int,
          "jobs": int, "suite": str, "case": str, "format": str, "spectrum_out": str,
          "timings": lambda v: str(v).strip().lower() in ("1", "true", "yes", "on")}


def read_config_file(path) -> dict:
    """key=value lines; '#' starts a comment; dashes in keys are read as underscores."""
    out = {}
    with open(path) as fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{n}: expected key=value")
            k, v = (s.strip() for s in line.split("=", 1))
            k = k.replace("-", "_")
            if k not in _CASTS:
                raise ValueError(f"{path}:{n}: unknown key {k!r}")
            out[k] = _CASTS[k](v)
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="squashed-s7",
                                description="Run numerical verification suites for the squashed S^7.")
    S = argparse.SUPPRESS
    p.add_argument("--suite", choices=SUITES, default=S)
    p.add_argument("--case", choices=("L1", "L2", "A1", "A2", "A3"), default=S)
    p.add_argument("--tolerance", type=float, default=S, help="default 1e-9")
    p.add_argument("--samples", type=int, default=S, help="default 100")
    p.add_argument("--seed", type=int, default=S, help="default 42")
    p.add_argument("--nmax", type=int, default=S, help="Peter-Weyl truncation, default 10")
    p.add_argument("--gamma-max", dest="gamma_max", type=int, default=S, help="default 4")
    p.add_argument("--format", choices=FORMATS, default=S, help="default text")
    p.add_argument("--spectrum-out", dest="spectrum_out", default=S, metavar="PATH",
                   help="write the Gamma spectrum as CSV")
    p.add_argument("--config", default=None, metavar="PATH", help="key=value file")
    p.add_argument("--jobs", type=int, default=S, help="worker threads, default 1")
    p.add_argument("--timings", action="store_true", default=S,
                   help="include runtime_ms (breaks byte-identical output)")
    p.add_argument("--list", action="store_true", help="list claim ids and exit")
    return p


def resolve_config(argv=None) -> tuple[Config, argparse.Namespace]:
    parser = build_parser()
    ns = parser.parse_args(argv)
    values = {}
    if ns.config:
        try:
            values.update(read_config_file(ns.config))
        except (OSError, ValueError) as exc:
            parser.error(str(exc))
    values.update({k: v for k, v in vars(ns).items() if k not in ("config", "list")})
    if values.get("suite", "all") not in SUITES:
        parser.error(f"unknown suite {values['suite']!r}")
    if values.get("format", "text") not in FORMATS:
        parser.error(f"unknown format {values['format']!r}")
    return Config(**values), ns


def main(argv=None) -> int:
    cfg, ns = resolve_config(argv)
    if ns.list:
        for c in select(cfg.suite, cfg.case):
            crit = f"  (criterion {c.criterion})" if c.criterion else ""
            print(f"{c.claim_id}  [{c.suite}]{crit}")
        return 0
    reports = run(cfg.suite, cfg)
    if cfg.spectrum_out:
        from .deformation import SU2_CASES, write_spectrum_csv
        cases = [c for c in SU2_CASES if cfg.case in (None, c)]
        write_spectrum_csv(cfg.spectrum_out, cases, cfg.nmax)
    out = render_json(reports, cfg) if cfg.format == "json" else render_text(reports, cfg)
    print(out)
    return 1 if any(r.status != "pass" for r in reports) else 0


if __name__ == "__main__":
    sys.exit(main())
