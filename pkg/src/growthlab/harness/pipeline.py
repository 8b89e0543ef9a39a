"""End-to-end trace-growth pipeline, its replay check, and the trichotomy report.

Pipeline stages, in order:

1. enumerate the ball B(k) over Q
2. pick the smallest prime in the window that separates the examined elements of B(k)
3. confirm reduction mod p is injective on B(k)
4. BFS over reduced words: radius n* at which pi_p(B(n*)) is all of SL_d(F_p)
5. census of traces of pi_p(B(n*)); every residue must occur
6. distinct integer traces in B(n*) over Q, which must be at least p
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from growthlab.cayley import DEFAULT_BUDGET, BallLevels, GeneratorSet, enumerate_ball
from growthlab.exact_linalg import determinant, trace
from growthlab.finitegrp import (
    DEFAULT_GROUP_CAP,
    CapExceededError,
    image_mod_p,
    is_injective_mod_p,
    slm_order,
    surjectivity_radius,
    triple_product_size,
    tripling_exponent,
    value_census,
)
from growthlab.growth import (
    GrowthSeries,
    TooFewLevelsError,
    classify_growth,
    count_series,
    estimate_rate,
)
from growthlab.harness.genset_io import census_csv, dump_json, genset_to_json, load_genset, parse_genset, resolve_gens_path
from growthlab.primesieve import (
    DEFAULT_SAMPLE_CAP,
    InjectivePrimeCertificate,
    NoCleanPrimeError,
    find_injective_prime,
    primes_in,
    replay_certificate,
)

SCHEMA = 1
DEFAULT_TRACE_BUDGET = 1_000_000


@dataclass
class ExperimentManifest:
    gens_file: str
    k: int = 5
    window: tuple[int, int] = (100, 1000)
    auto_window: bool = False
    d_cap: int = 64
    budget: int = DEFAULT_BUDGET
    trace_budget: int = DEFAULT_TRACE_BUDGET
    group_cap: int = DEFAULT_GROUP_CAP
    sample_cap: int = DEFAULT_SAMPLE_CAP
    seed: int = 0
    out: str = "runs"

    def validate(self) -> None:
        resolve_gens_path(self.gens_file)
        lo, hi = self.window
        if self.k < 0:
            raise ValueError("k must be >= 0")
        if not self.auto_window and not 2 <= lo <= hi <= 2**40:
            raise ValueError(f"window {self.window} outside [2, 2^40]")
        for name in ("budget", "trace_budget", "group_cap", "sample_cap", "d_cap"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentManifest":
        obj = dict(obj)
        obj.pop("schema", None)
        if "window" in obj:
            obj["window"] = tuple(obj["window"])
        return cls(**obj)

    def to_json(self) -> dict:
        d = asdict(self)
        d["window"] = list(self.window)
        d["schema"] = SCHEMA
        return d


class PipelineError(RuntimeError):
    def __init__(self, stage: int, name: str, msg: str, label: str = "failure"):
        super().__init__(f"stage {stage} ({name}): {msg}")
        self.stage = stage
        self.stage_name = name
        self.label = label


@dataclass
class PipelineReport:
    gens_digest: str
    manifest: dict
    generators: dict
    status: str = "ok"
    failure: dict | None = None
    k: int = 0
    ball_size: int = 0
    window: tuple[int, int] = (0, 0)
    implied_alpha: float | None = None
    certificate: dict | None = None
    prime: int | None = None
    injective: bool | None = None
    group_order: int | None = None
    sl_order: int | None = None
    surjectivity_radius: int | None = None
    image_ball_sizes: list[int] = field(default_factory=list)
    cover_exponent: int | None = None
    tripling: dict | None = None
    modp_distinct_traces: int | None = None
    modp_distinct_charpolys: int | None = None
    max_trace_level: int | None = None
    integer_trace_radius: int | None = None
    integer_trace_count: int | None = None
    integer_trace_exact: bool | None = None
    good_prime_fraction: float | None = None
    invariants: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "ok" and all(self.invariants.values())

    def to_json(self) -> dict:
        d = asdict(self)
        d["window"] = list(self.window)
        d["schema"] = SCHEMA
        return d


def _files(out: Path, digest: str) -> dict[str, Path]:
    return {
        "report": out / f"{digest}_report.json",
        "manifest": out / f"{digest}_manifest.json",
        "ball": out / f"{digest}_ball_series.csv",
        "certificate": out / f"{digest}_certificate.json",
        "census_trace": out / f"{digest}_census_trace.csv",
        "census_charpoly": out / f"{digest}_census_charpoly.csv",
        "integer_traces": out / f"{digest}_integer_traces.csv",
    }


def auto_window(gens: GeneratorSet, k: int, budget: int) -> tuple[int, int]:
    """Window [e^(3ak), e^(4ak)] with a fitted from the element series of B(k)."""
    ball = enumerate_ball(gens, max(k, 4), budget)
    series = count_series(ball, "element")
    top = series.radii[-1]
    alpha = estimate_rate(series, (max(1, top - 3), top)).slope
    lo = max(2, math.floor(math.exp(3 * alpha * k)))
    hi = min(2**40, max(lo, math.ceil(math.exp(4 * alpha * k))))
    return lo, hi


def integer_trace_series(gens: GeneratorSet, n: int, budget: int) -> tuple[GrowthSeries, bool]:
    """Distinct traces of B(r) for r up to n, stopping early if the ball outgrows budget."""
    ball = enumerate_ball(gens, n, budget)
    series = count_series(ball, "trace")
    return series, ball.radius == n


def run_pipeline(manifest: ExperimentManifest, persist: bool = True) -> PipelineReport:
    """Run all six stages; a failing stage is recorded in the report and stops the run."""
    manifest.validate()
    gens = load_genset(manifest.gens_file)
    digest = gens.digest()
    report = PipelineReport(digest, manifest.to_json(), genset_to_json(gens), k=manifest.k)
    out = Path(manifest.out)
    files = _files(out, digest)
    if persist:
        out.mkdir(parents=True, exist_ok=True)
        dump_json(manifest.to_json(), files["manifest"])
    clock = time.perf_counter
    t0 = clock()
    k = manifest.k
    try:
        # 1
        ball = enumerate_ball(gens, k, manifest.budget)
        if ball.partial:
            raise PipelineError(1, "ball", f"budget {manifest.budget} exhausted before radius {k}")
        report.ball_size = ball.counts[k]
        if persist:
            files["ball"].write_text(count_series(ball, "element").to_csv())
        report.timings["ball"] = clock() - t0

        # 2
        t = clock()
        window = auto_window(gens, k, manifest.budget) if manifest.auto_window else tuple(manifest.window)
        report.window = window
        if k > 0:
            report.implied_alpha = math.log(window[0]) / (3 * k)
        pw = primes_in(*window)
        if not pw.primes:
            raise PipelineError(2, "prime window", f"no primes in {window}")
        try:
            cert = find_injective_prime(ball, k, pw, manifest.sample_cap, manifest.seed)
        except NoCleanPrimeError as exc:
            raise PipelineError(2, "prime window", str(exc)) from None
        p = cert.prime
        report.prime = p
        report.certificate = cert.to_json()
        report.good_prime_fraction = cert.good_fraction
        if persist:
            dump_json(cert.to_json(), files["certificate"])
        report.timings["pigeonhole"] = clock() - t

        # 3
        t = clock()
        report.injective = is_injective_mod_p(ball, k, p)
        report.timings["injectivity"] = clock() - t
        if not report.injective:
            raise PipelineError(3, "injectivity", f"reduction mod {p} is not injective on B({k})")

        # 4
        t = clock()
        d = gens.dim
        report.sl_order = slm_order(d, p) if d >= 2 else 1
        if any(determinant(g) != 1 for g in gens.gens):
            raise PipelineError(4, "surjectivity", "generators do not all have determinant 1")
        try:
            n_star, cl = surjectivity_radius(gens, p, manifest.group_cap)
        except CapExceededError as exc:
            raise PipelineError(4, "surjectivity", str(exc)) from None
        report.group_order = cl.order
        report.image_ball_sizes = list(cl.ball_sizes)
        report.timings["surjectivity"] = clock() - t
        if cl.order == 1:
            raise PipelineError(4, "surjectivity", "closure is trivial", label="degenerate")
        if cl.order != report.sl_order:
            raise PipelineError(
                4, "surjectivity",
                f"closure is proper subgroup of SL_{d}(F_{p}): order {cl.order} < {report.sl_order}",
            )
        report.surjectivity_radius = n_star
        report.cover_exponent = -(-n_star // k) if k else None
        a = image_mod_p(ball.level(k), p)
        aaa = triple_product_size(a)
        # small tripling is only flagged, never certified as structure
        report.tripling = {"size": a.size, "triple_size": aaa, "exponent": tripling_exponent(a),
                           "small_tripling": aaa <= 3 * a.size}

        # 5
        t = clock()
        tc = value_census(cl.group, "trace")
        cc = value_census(cl.group, "charpoly")
        report.modp_distinct_traces = tc.distinct
        report.modp_distinct_charpolys = cc.distinct
        report.max_trace_level = tc.max_level
        if persist:
            files["census_trace"].write_text(census_csv(tc))
            files["census_charpoly"].write_text(census_csv(cc))
        report.timings["census"] = clock() - t
        if tc.distinct != p:
            raise PipelineError(5, "trace census", f"{tc.distinct} distinct traces mod {p}, expected {p}")

        # 6
        t = clock()
        series, exact = integer_trace_series(gens, n_star, manifest.trace_budget)
        report.integer_trace_radius = series.radii[-1]
        report.integer_trace_count = series.counts[-1]
        report.integer_trace_exact = exact
        if persist:
            files["integer_traces"].write_text(series.to_csv())
        report.timings["integer_traces"] = clock() - t
        if series.counts[-1] < p:
            raise PipelineError(
                6, "integer traces",
                f"{series.counts[-1]} distinct traces in B({series.radii[-1]}) < p = {p}",
            )
    except PipelineError as exc:
        report.status = exc.label
        report.failure = {"stage": exc.stage, "name": exc.stage_name, "message": str(exc)}
    report.invariants = _invariants(report)
    report.timings["total"] = clock() - t0
    if persist:
        dump_json(report.to_json(), files["report"])
    return report


def _invariants(r: PipelineReport) -> dict:
    inv = {}
    if r.certificate is not None:
        inv["certificate_prime_in_window"] = r.window[0] <= r.prime <= r.window[1]
    if r.group_order is not None and r.image_ball_sizes:
        inv["surjectivity_radius_minimal"] = (
            r.image_ball_sizes[-1] == r.group_order
            and all(s < r.group_order for s in r.image_ball_sizes[:-1])
        )
    if r.modp_distinct_traces is not None and r.status == "ok":
        inv["modp_traces_equal_p"] = r.modp_distinct_traces == r.prime
        if r.generators["dim"] == 2:
            inv["lang_weil_level_bound"] = r.max_trace_level <= 2 * r.prime**2
    if r.integer_trace_count is not None and r.modp_distinct_traces is not None:
        inv["integer_traces_at_least_modp"] = r.integer_trace_count >= r.modp_distinct_traces
    return inv


def strip_timings(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "timings"}


def verify_run(out: str | Path) -> list[tuple[str, bool, str]]:
    """Replay every claim of the persisted report(s) in ``out`` from the stored artifacts."""
    out = Path(out)
    reports = sorted(out.glob("*_report.json"))
    if not reports:
        return [("report present", False, f"no *_report.json in {out}")]
    checks: list[tuple[str, bool, str]] = []

    def check(name, ok, detail=""):
        checks.append((name, bool(ok), detail))

    for path in reports:
        rep = json.loads(path.read_text())
        digest = rep["gens_digest"]
        files = _files(out, digest)
        gens = parse_genset(rep["generators"])
        check("generator digest", gens.digest() == digest)
        k = rep["k"]
        ball = enumerate_ball(gens, k, rep["manifest"]["budget"])
        if files["ball"].exists():
            check("ball series CSV", files["ball"].read_text() == count_series(ball, "element").to_csv())
        if rep["certificate"] is None:
            continue
        cert = InjectivePrimeCertificate.from_json(json.loads(files["certificate"].read_text()))
        check("certificate file matches report", cert.to_json() == rep["certificate"])
        check("certificate replay", replay_certificate(ball, cert))
        p = cert.prime
        lower = [q for q in primes_in(*rep["window"]).primes if q < p]
        check("certificate minimal prime", [q for q, _ in cert.bad_primes_seen] == lower)
        if rep["injective"] is not None:
            check("injectivity", is_injective_mod_p(ball, k, p) == rep["injective"])
        if rep["group_order"] is None:
            continue
        n_star, cl = surjectivity_radius(gens, p, rep["manifest"]["group_cap"])
        check("closure order", cl.order == rep["group_order"])
        check("image ball sizes", list(cl.ball_sizes) == rep["image_ball_sizes"])
        if rep["surjectivity_radius"] is None:
            continue
        check("surjectivity radius", n_star == rep["surjectivity_radius"])
        check("closure is SL_d(F_p)", cl.order == slm_order(gens.dim, p))
        tc = value_census(cl.group, "trace")
        check("trace census CSV", files["census_trace"].read_text() == census_csv(tc))
        check("census total equals group order", tc.total == cl.order)
        check("every residue is a trace", tc.distinct == p == rep["modp_distinct_traces"])
        cc = value_census(cl.group, "charpoly")
        check("charpoly census CSV", files["census_charpoly"].read_text() == census_csv(cc))
        if rep["integer_trace_count"] is None:
            continue
        series = GrowthSeries.from_csv(files["integer_traces"].read_text())
        r = series.radii[-1]
        replay, _ = integer_trace_series(gens, r, rep["manifest"]["trace_budget"])
        check("integer trace series", replay.counts == series.counts)
        check("integer traces >= p", series.counts[-1] >= p and r <= n_star)
        check("report invariants", all(rep["invariants"].values()))
    return checks


ROW_LABELS = {
    ("poly", "poly"): "v. nilpotent-like",
    ("exp", "poly"): "v. solvable-like",
    ("exp", "exp"): "not v. solvable-like",
}


def _coarse(label: str) -> str:
    return "exp" if label == "exponential" else "poly"


def trichotomy_report(gens_file: str | Path, n_max: int, budget: int = DEFAULT_BUDGET) -> dict:
    """Growth classes of the element and charpoly series and the resulting row label."""
    gens = load_genset(gens_file)
    ball = enumerate_ball(gens, n_max, budget)
    row = {
        "gens": Path(resolve_gens_path(gens_file)).stem,
        "gens_digest": gens.digest(),
        "n_max": n_max,
        "radius_reached": ball.radius,
        "partial": ball.partial,
    }
    classes = {}
    for kind in ("element", "charpoly"):
        series = count_series(ball, kind)
        row[f"{kind}_counts"] = list(series.counts)
        try:
            cls = classify_growth(series)
        except TooFewLevelsError as exc:
            row["label"] = None
            row["error"] = str(exc)
            return row
        classes[kind] = cls.label
        row[f"{kind}_class"] = cls.label
        top = series.radii[-1]
        lo = max(1, top - max(2, top // 2))
        row[f"{kind}_rate"] = estimate_rate(series, (lo, top)).slope
    pair = (_coarse(classes["element"]), _coarse(classes["charpoly"]))
    row["label"] = ROW_LABELS.get(pair, "inconsistent")
    return row
