"""Seeded, fading-averaged sweeps and the oracle verification suite."""
from __future__ import annotations

import csv
import dataclasses
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels, detection
from .detection import DetectionParams, detection_params, mc_detection
from .errors import InvalidArgumentError
from .feasibility import CovertnessSpec, covert_exact, max_feasible_alpha
from .geometry import DEFAULT_POSITIONS, NetworkGeometry, draw_fading_batch
from .rate import FJ, GNJ, RateScenario, covert_rate
from .solver import SolverConfig, grid_oracle, solve_fj, solve_gnj_dc

DISTANCE_SWEEPS = {
    "alice-bob": "d_ab",
    "alice-eve": "d_ae",
    "jammer-bob": "d_jb",
    "jammer-eve": "d_je",
}


def _int_list(text):
    if isinstance(text, (list, tuple)):
        return tuple(int(x) for x in text)
    return tuple(int(x) for x in str(text).replace(";", ",").split(",") if x.strip())


def _point(text):
    if text is None or text == "":
        return None
    if isinstance(text, (list, tuple)):
        return tuple(float(x) for x in text)
    x, y = (float(v) for v in str(text).split(","))
    return (x, y)


def _optional_int(text):
    if text is None or str(text).strip().lower() in ("", "none"):
        return None
    return int(text)


@dataclass(frozen=True)
class ExperimentConfig:
    m_t: int = 10
    nd: Optional[int] = None  # overrides nd_list / random_nd_list when set
    nd_list: tuple = (1, 2, 4, 6)
    random_nd_list: tuple = (4,)
    selection: str = "both"  # best | random | both
    mode: str = "both"  # gnj | fj | both
    epsilon: float = 0.1
    beta: float = 2.0
    alice: Optional[tuple] = DEFAULT_POSITIONS["alice"]
    bob: Optional[tuple] = DEFAULT_POSITIONS["bob"]
    jammer: Optional[tuple] = DEFAULT_POSITIONS["jammer"]
    eve: Optional[tuple] = DEFAULT_POSITIONS["eve"]
    d_ab: Optional[float] = None  # explicit distances win over positions
    d_ae: Optional[float] = None
    d_jb: Optional[float] = None
    d_je: Optional[float] = None
    sigma_b2: float = 1.0
    sigma_e2: float = 1.0
    p_total: float = 5.0
    p_min: float = 0.01
    p_max: float = 1e5
    p_points: int = 15
    p_scale: str = "log"
    which: str = "alice-bob"
    d_min: float = 1.0
    d_max: float = 15.0
    d_points: int = 15
    n_fading: int = 10_000
    seed: int = 1
    workers: int = 1
    max_iters: int = 100
    rate_tol: float = 1e-9
    alpha_tol: float = 1e-8

    def __post_init__(self):
        if self.m_t < 1:
            raise InvalidArgumentError("m_t must be positive")
        for nd in self.best_nds() + self.random_nds():
            if not 1 <= nd <= self.m_t:
                raise InvalidArgumentError(f"N_D={nd} must lie in [1, M_T={self.m_t}]")
        if self.selection not in ("best", "random", "both"):
            raise InvalidArgumentError(f"selection must be best|random|both, got {self.selection!r}")
        if self.mode not in ("gnj", "fj", "both"):
            raise InvalidArgumentError(f"mode must be gnj|fj|both, got {self.mode!r}")
        if self.p_scale not in ("log", "linear"):
            raise InvalidArgumentError("p_scale must be log|linear")
        if not (0 < self.p_min <= self.p_max) or self.p_points < 1:
            raise InvalidArgumentError("power sweep range must be nonempty and positive")
        if not (0 < self.d_min <= self.d_max) or self.d_points < 1:
            raise InvalidArgumentError("distance sweep range must be nonempty and positive")
        if self.which not in DISTANCE_SWEEPS:
            raise InvalidArgumentError(f"which must be one of {sorted(DISTANCE_SWEEPS)}")
        if self.n_fading < 1 or self.workers < 1:
            raise InvalidArgumentError("n_fading and workers must be positive")
        for name in ("sigma_b2", "sigma_e2", "p_total"):
            if not getattr(self, name) > 0:
                raise InvalidArgumentError(f"{name} must be positive")
        CovertnessSpec(self.epsilon)
        self.geometry()

    def best_nds(self) -> tuple:
        return (self.nd,) if self.nd is not None else tuple(self.nd_list)

    def random_nds(self) -> tuple:
        return (self.nd,) if self.nd is not None else tuple(self.random_nd_list)

    def policies(self) -> list[tuple[str, int]]:
        out = []
        if self.selection in ("best", "both"):
            out += [("best", nd) for nd in self.best_nds()]
        if self.selection in ("random", "both"):
            out += [("random", nd) for nd in self.random_nds()]
        return out

    def modes(self) -> tuple:
        return (GNJ, FJ) if self.mode == "both" else (self.mode,)

    def geometry(self) -> NetworkGeometry:
        pos = dict(alice=self.alice, bob=self.bob, jammer=self.jammer, eve=self.eve)
        dist = {}
        pairs = {"d_ab": ("alice", "bob"), "d_ae": ("alice", "eve"),
                 "d_jb": ("jammer", "bob"), "d_je": ("jammer", "eve")}
        for key, (p, q) in pairs.items():
            value = getattr(self, key)
            if value is None:
                if pos[p] is None or pos[q] is None:
                    raise InvalidArgumentError(f"{key} needs either a distance or both positions")
                value = math.dist(pos[p], pos[q])
            dist[key] = float(value)
        return NetworkGeometry(beta=self.beta, **dist)

    def spec(self) -> CovertnessSpec:
        return CovertnessSpec(self.epsilon)

    def solver_config(self) -> SolverConfig:
        return SolverConfig(max_iters=self.max_iters, rate_tol=self.rate_tol, alpha_tol=self.alpha_tol)

    def powers(self) -> np.ndarray:
        if self.p_scale == "log":
            return np.geomspace(self.p_min, self.p_max, self.p_points)
        return np.linspace(self.p_min, self.p_max, self.p_points)

    def distances(self) -> np.ndarray:
        return np.linspace(self.d_min, self.d_max, self.d_points)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_mapping(cls, values: dict) -> "ExperimentConfig":
        return cls().with_overrides(values)

    def with_overrides(self, values: dict) -> "ExperimentConfig":
        parsed = {}
        for key, raw in values.items():
            key = key.replace("-", "_")
            if key not in _PARSERS:
                raise InvalidArgumentError(f"unknown config key {key!r}")
            parsed[key] = _PARSERS[key](raw)
        return dataclasses.replace(self, **parsed)


def _optional_float(text):
    if text is None or str(text).strip().lower() in ("", "none"):
        return None
    return float(text)


_PARSERS = {
    "m_t": int, "nd": _optional_int, "nd_list": _int_list, "random_nd_list": _int_list,
    "selection": str, "mode": str, "epsilon": float, "beta": float,
    "alice": _point, "bob": _point, "jammer": _point, "eve": _point,
    "d_ab": _optional_float, "d_ae": _optional_float, "d_jb": _optional_float, "d_je": _optional_float,
    "sigma_b2": float, "sigma_e2": float, "p_total": float, "p_min": float, "p_max": float,
    "p_points": int, "p_scale": str, "which": str, "d_min": float, "d_max": float, "d_points": int,
    "n_fading": int, "seed": int, "workers": int, "max_iters": int, "rate_tol": float, "alpha_tol": float,
}
CONFIG_KEYS = tuple(_PARSERS)


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidArgumentError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = value
    return values


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return ExperimentConfig.from_mapping(parse_config_text(fh.read()))


# ---------------------------------------------------------------------------
# tables

@dataclass
class Table:
    columns: tuple
    rows: list = field(default_factory=list)

    def column(self, name):
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    def where(self, **match) -> "Table":
        idx = {self.columns.index(k): v for k, v in match.items()}
        rows = [r for r in self.rows if all(r[i] == v for i, v in idx.items())]
        return Table(self.columns, rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_fmt(v) for v in row])
        return buf.getvalue()


def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.9g}"
    return str(value)


def write_csv(table: Table, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(table.to_csv())


# ---------------------------------------------------------------------------
# fading ensemble shared by every sweep point (common random numbers)

@dataclass(frozen=True)
class Ensemble:
    h_ab: np.ndarray
    h_jb: np.ndarray
    random_index: np.ndarray  # (n, m_t) random permutation per realization

    def gains(self, selection: str, n_d: int) -> np.ndarray:
        if selection == "best":
            return _kernels.topk_gain_batch(self.h_ab, n_d)
        power = np.abs(self.h_ab) ** 2
        picked = np.take_along_axis(power, self.random_index[:, :n_d], axis=1)
        return picked.sum(axis=1)

    @property
    def g_jb(self) -> np.ndarray:
        return np.abs(self.h_jb) ** 2


def draw_ensemble(config: ExperimentConfig) -> Ensemble:
    fading_seq, select_seq = np.random.SeedSequence(config.seed).spawn(2)
    h_ab, _, h_jb, _ = draw_fading_batch(np.random.default_rng(fading_seq), config.m_t, config.n_fading)
    sel_rng = np.random.default_rng(select_seq)
    random_index = sel_rng.permuted(np.tile(np.arange(config.m_t), (config.n_fading, 1)), axis=1)
    return Ensemble(h_ab=h_ab, h_jb=h_jb, random_index=random_index)


def ensemble_rates(g_ab, g_jb, p_total, geometry, config: ExperimentConfig, mode: str):
    """Per-realization optimal rates and alphas; ``None`` if infeasible."""
    region = max_feasible_alpha(geometry, config.spec())
    if region.empty:
        return None
    hi = region.alpha_max
    if mode == FJ:
        snr = hi * p_total * g_ab / (geometry.loss_ab * config.sigma_b2)
        return np.full(g_ab.shape, hi), np.log1p(snr) / math.log(2.0)
    a = p_total * g_ab * geometry.loss_jb
    b = np.full(g_ab.shape, geometry.loss_jb * geometry.loss_ab * config.sigma_b2)
    c = p_total * g_jb * geometry.loss_ab
    x, rate, _, _ = _kernels.dc_batch(a, b, c, np.full(g_ab.shape, hi), np.full(g_ab.shape, 0.5 * hi),
                                      config.max_iters, config.rate_tol, config.alpha_tol)
    return np.asarray(x), np.asarray(rate)


def _summary(result, n):
    if result is None:
        return math.nan, math.nan, math.nan, 0, n
    alpha, rate = result
    return float(np.mean(alpha)), float(np.mean(rate)), float(np.std(rate)), n, 0


def _power_point(args):
    config, ensemble, p_total = args
    geometry = config.geometry()
    rows = []
    for selection, n_d in config.policies():
        g_ab = ensemble.gains(selection, n_d)
        for mode in config.modes():
            res = ensemble_rates(g_ab, ensemble.g_jb, p_total, geometry, config, mode)
            a_mean, r_mean, r_std, n_used, n_bad = _summary(res, g_ab.shape[0])
            rows.append((float(p_total), selection, n_d, mode, a_mean, r_mean, r_std, n_used, n_bad))
    return rows


def _map(fn, jobs, workers):
    if workers == 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


POWER_COLUMNS = ("p_total", "selection", "n_d", "mode", "alpha_mean", "rate_mean", "rate_std",
                 "n_used", "n_infeasible")
DISTANCE_COLUMNS = ("distance", "alpha_max", "gnj_rate_mean", "gnj_rate_std", "fj_rate_mean",
                    "fj_rate_std", "n_used", "n_infeasible")


def run_power_sweep(config: ExperimentConfig) -> Table:
    """Average optimal covert rate versus total power, one row per (power, policy, mode)."""
    ensemble = draw_ensemble(config)
    jobs = [(config, ensemble, p) for p in config.powers()]
    table = Table(POWER_COLUMNS)
    for rows in _map(_power_point, jobs, config.workers):
        table.rows.extend(rows)
    return table


def _distance_point(args):
    config, ensemble, which, distance = args
    geometry = config.geometry().replace(**{DISTANCE_SWEEPS[which]: float(distance)})
    n_d = config.best_nds()[-1] if config.nd is None else config.nd
    selection = "random" if config.selection == "random" else "best"
    g_ab = ensemble.gains(selection, n_d)
    region = max_feasible_alpha(geometry, config.spec())
    gnj = ensemble_rates(g_ab, ensemble.g_jb, config.p_total, geometry, config, GNJ)
    fj = ensemble_rates(g_ab, ensemble.g_jb, config.p_total, geometry, config, FJ)
    _, g_mean, g_std, n_used, n_bad = _summary(gnj, g_ab.shape[0])
    _, f_mean, f_std, _, _ = _summary(fj, g_ab.shape[0])
    return (float(distance), region.alpha_max, g_mean, g_std, f_mean, f_std, n_used, n_bad)


def run_distance_sweep(config: ExperimentConfig, which: Optional[str] = None) -> Table:
    """GNJ and FJ average rates versus one link distance, others held fixed.

    Uses ``config.nd`` (or the largest entry of ``nd_list``) with best
    selection unless ``selection == "random"``.
    """
    which = which or config.which
    if which not in DISTANCE_SWEEPS:
        raise InvalidArgumentError(f"which must be one of {sorted(DISTANCE_SWEEPS)}")
    ensemble = draw_ensemble(config)
    jobs = [(config, ensemble, which, d) for d in config.distances()]
    return Table(DISTANCE_COLUMNS, _map(_distance_point, jobs, config.workers))


# ---------------------------------------------------------------------------
# verification

@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    limit: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: measured={self.measured:.3e} limit={self.limit:.3e} {self.detail}".rstrip()


@dataclass
class VerifyReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def text(self) -> str:
        lines = [c.line() for c in self.checks]
        lines.append("ALL PASS" if self.passed else "FAILURES: " + ", ".join(c.name for c in self.checks if not c.passed))
        return "\n".join(lines)


def random_geometry(rng, beta=None) -> NetworkGeometry:
    d = rng.uniform(1.0, 20.0, 4)
    return NetworkGeometry(*d, beta=float(rng.uniform(2.0, 4.0)) if beta is None else beta)


def random_scenario(rng, m_t: int = 10) -> tuple:
    """A GNJ scenario and covertness spec drawn from the sweep regime.

    Path-loss exponent 2, unit receiver noise, link distances U(1, 20),
    power log-uniform on [0.01, 1e4], gains from one fading draw with
    best selection of a random number of antennas.
    """
    geo = NetworkGeometry(*rng.uniform(1.0, 20.0, 4), beta=2.0)
    h_ab, _, h_jb, _ = draw_fading_batch(rng, m_t, 1)
    g_ab = float(_kernels.topk_gain_batch(h_ab, int(rng.integers(1, m_t + 1)))[0])
    scen = RateScenario(float(10 ** rng.uniform(-2, 4)), g_ab, float(abs(h_jb[0]) ** 2), geo, 1.0)
    return scen, CovertnessSpec(float(rng.uniform(0.01, 0.5)))


def _check_mc(config, rng, n_cases=5, n_trials=100_000):
    worst = 0.0
    for _ in range(n_cases):
        geo = random_geometry(rng)
        alpha = float(rng.uniform(0.05, 0.95))
        p_total = float(10 ** rng.uniform(-1, 2))
        params = detection_params(alpha, p_total, geo, config.sigma_e2)
        v = detection.optimal_threshold(params)
        est = mc_detection(rng, alpha, p_total, geo, config.sigma_e2, v, n_trials=n_trials)
        for exact, hat in ((detection.p_fa(v, params), est.p_fa_hat), (detection.p_md(v, params), est.p_md_hat)):
            bound = 4.0 * math.sqrt(max(exact * (1 - exact), 1e-12) / n_trials)
            worst = max(worst, abs(exact - hat) / bound)
    return CheckResult("mc_vs_closed_form", worst <= 1.0, worst, 1.0, "(deviation / 4-sigma bound)")


def _check_threshold(config, rng, n_sets=20, n_grid=10_000):
    worst = -math.inf
    for _ in range(n_sets):
        phi0, phi1 = 10 ** rng.uniform(-2, 2, 2)
        params = DetectionParams(float(phi0), float(phi1), config.sigma_e2)
        grid = params.sigma_e2 + np.linspace(0.0, 20.0 * max(phi0, phi1), n_grid)
        at_opt = detection.detection_error_sum(detection.optimal_threshold(params), params)
        gap = at_opt - float(np.min(detection.detection_error_sum(grid, params)))
        worst = max(worst, gap)
    return CheckResult("threshold_optimality", worst <= 1e-6, worst, 1e-6, "(error at V* minus grid minimum)")


def _check_worked_point():
    params = DetectionParams(1.0, 2.0, 1.0)
    v = detection.optimal_threshold(params)
    errs = [abs(v - (1 + 2 * math.log(2))), abs(detection.p_fa(v, params) - 0.25),
            abs(detection.p_md(v, params) - 0.25), abs(detection.min_detection_error(params) - 0.5)]
    worst = max(errs)
    return CheckResult("worked_point", worst <= 1e-12, worst, 1e-12)


def _check_scale(rng, n_sets=20):
    worst = 0.0
    for _ in range(n_sets):
        phi0, phi1 = 10 ** rng.uniform(-2, 2, 2)
        base = DetectionParams(float(phi0), float(phi1), 1.0)
        m0 = detection.min_detection_error(base)
        u0 = detection.optimal_threshold_excess(base)
        for c in (1e-3, 1.0, 1e3):
            sc = base.scaled(c)
            worst = max(worst, abs(detection.min_detection_error(sc) - m0))
            worst = max(worst, abs(detection.optimal_threshold_excess(sc) / (c * u0) - 1.0))
    return CheckResult("scale_invariance", worst <= 1e-12, worst, 1e-12)


def _check_solver(config, rng, n_cases=10):
    worst_a = worst_r = 0.0
    monotone = True
    for _ in range(n_cases):
        scen, spec = random_scenario(rng)
        for mode in (GNJ, FJ):
            s = scen.with_mode(mode)
            res = solve_gnj_dc(s, spec) if mode == GNJ else solve_fj(s, spec)
            ora = grid_oracle(s, spec, mode, grid_points=10_000, refine=True)
            worst_a = max(worst_a, abs(res.alpha_star - ora.alpha_star))
            worst_r = max(worst_r, abs(res.rate - ora.rate))
            monotone &= all(b[3] >= a[3] for a, b in zip(res.trace, res.trace[1:]))
    ok = worst_a <= 1e-3 and worst_r <= 1e-4 and monotone
    return CheckResult("solver_vs_grid_oracle", ok, max(worst_a, worst_r), 1e-4,
                       f"(alpha dev {worst_a:.2e}, rate dev {worst_r:.2e}, monotone={monotone})")


def feasible_by_power(alphas, p_total, geometry, spec):
    """Constraint evaluated through the power-dependent detector parameters."""
    limit = 1.0 - spec.epsilon
    return [detection.min_detection_error(detection_params(float(a), p_total, geometry)) >= limit
            for a in alphas]


def _check_boundary(rng, n_cases=20):
    bad = 0
    for _ in range(n_cases):
        geo = random_geometry(rng)
        spec = CovertnessSpec(float(rng.uniform(0.01, 0.9)))
        tol = 1e-8
        region = max_feasible_alpha(geo, spec, tol)
        if region.alpha_max >= 1.0:
            continue
        lo_ok = covert_exact(region.alpha_max - 2 * tol, geo, spec)
        hi_bad = not covert_exact(region.alpha_max + 2 * tol, geo, spec)
        grid = np.arange(1, 1001) / 1001
        feas = covert_exact(grid, geo, spec)
        left_interval = not np.any(~feas[:-1] & feas[1:])
        p_inv = len({tuple(feasible_by_power(grid[::5], p, geo, spec)) for p in (0.1, 1.0, 100.0)}) == 1
        bad += not (lo_ok and hi_bad and left_interval and p_inv)
    return CheckResult("constraint_boundary", bad == 0, float(bad), 0.0, "(inconsistent geometries)")


def _check_kernels(rng):
    h_ab, h_ae, h_jb, _ = draw_fading_batch(rng, 8, 2000)
    dev = float(np.max(np.abs(_kernels.topk_gain_numpy(h_ab, 3) - _kernels.topk_gain_jit(h_ab, 3))))
    dev = max(dev, float(np.max(np.abs(_kernels.eve_gain_numpy(h_ab, h_ae, 3) - _kernels.eve_gain_jit(h_ab, h_ae, 3)))))
    g = _kernels.topk_gain_numpy(h_ab, 3)
    a, b, c = 5 * g * 25, np.full(g.shape, 625.0), 5 * np.abs(h_jb) ** 2 * 25
    hi = np.full(g.shape, 0.12)
    x1, r1, _, _ = _kernels.dc_batch_numpy(a, b, c, hi, hi / 2, 100, 1e-9, 1e-8)
    x2, r2, _, _ = _kernels.dc_batch_jit(a, b, c, hi, hi / 2, 100, 1e-9, 1e-8)
    dev = max(dev, float(np.max(np.abs(x1 - x2))), float(np.max(np.abs(r1 - r2))))
    return CheckResult("kernel_parity", dev <= 1e-10, dev, 1e-10, "(numpy vs compiled path)")


def run_verify(config: Optional[ExperimentConfig] = None) -> VerifyReport:
    """Run every closed-form-vs-oracle check; ``report.passed`` is the verdict."""
    config = config or ExperimentConfig()
    rng = np.random.default_rng(config.seed)
    report = VerifyReport()
    report.checks.append(_check_mc(config, rng))
    report.checks.append(_check_threshold(config, rng))
    report.checks.append(_check_worked_point())
    report.checks.append(_check_scale(rng))
    report.checks.append(_check_solver(config, rng))
    report.checks.append(_check_boundary(rng))
    report.checks.append(_check_kernels(rng))
    return report
