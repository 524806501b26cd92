"""Monte-Carlo experiment harness.

Instance generators for the four gap families, error-probability estimation
with Wilson confidence intervals, budget sweeps, bound-vs-empirical tables,
and the group-mean distribution study. Trials are independently seeded work
items: the per-trial stream is fixed by (master_seed, stream_id), so results
are bit-identical no matter how many workers run them (BAI_THREADS).
"""

from __future__ import annotations

import csv
import json
import math
import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import (
    BanditInstance,
    Bernoulli,
    BoundedUnit,
    Family,
    Gaussian,
    RngStream,
    family_from_json,
    gap_profile,
)
from .errors import BestArmError, ConfigParse
from .hardness import (
    HardnessProfile,
    bound_re,
    bound_sh,
    bound_sr,
    bound_ue,
    hardness,
)
from .policies import BanditEnv, Environment, ReOptions, run_policy

_WILSON_Z = 1.959963984540054  # standard normal 97.5% quantile

GENERATORS = (
    "arithmetic",
    "one_real_competitor",
    "two_groups",
    "single_gap",
    "explicit",
)


def wilson_interval(errors: int, trials: int, z: float = _WILSON_Z) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ConfigParse(f"need trials >= 1, got {trials}")
    p = errors / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2.0 * trials)) / denom
    half = (
        z
        * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials))
        / denom
    )
    lo = 0.0 if errors == 0 else max(0.0, center - half)
    hi = 1.0 if errors == trials else min(1.0, center + half)
    return lo, hi


@dataclass(frozen=True)
class InstanceSpec:
    """Recipe for a generated instance; the best-arm slot is seed-randomized."""

    K: int
    generator: str
    family: Family
    mu_star: float = 1.0
    delta_min: float = 0.1
    delta_max: float = 0.1
    means: tuple[float, ...] | None = None  # explicit generator only
    seed: int = 0
    label: str | None = None

    @property
    def instance_id(self) -> str:
        if self.label:
            return self.label
        fam = {Gaussian: "gaussian", Bernoulli: "bernoulli", BoundedUnit: "bounded"}[
            type(self.family)
        ]
        return f"{self.generator}-K{self.K}-{fam}"


def generate_instance(spec: InstanceSpec) -> BanditInstance:
    """Materialize an InstanceSpec into a BanditInstance."""
    if spec.generator not in GENERATORS:
        raise ConfigParse(f"unknown generator {spec.generator!r}")
    if spec.generator == "explicit":
        if spec.means is None:
            raise ConfigParse("explicit generator needs means")
        return BanditInstance(means=tuple(spec.means), family=spec.family)
    K = spec.K
    if K < 2:
        raise ConfigParse(f"need K >= 2, got {K}")
    lo, hi = spec.delta_min, spec.delta_max
    if lo > hi:
        raise ConfigParse(f"delta_min {lo} > delta_max {hi}")
    if spec.generator == "single_gap" and lo != hi:
        raise ConfigParse("single_gap needs delta_min == delta_max")
    mu = spec.mu_star
    if spec.generator == "arithmetic":
        others = np.linspace(mu - hi, mu - lo, K - 1)
    elif spec.generator == "one_real_competitor":
        others = np.full(K - 1, mu - hi)
        others[0] = mu - lo
    elif spec.generator == "two_groups":
        n_close = math.ceil((K - 1) / 2)
        others = np.concatenate([np.full(n_close, mu - lo), np.full(K - 1 - n_close, mu - hi)])
    else:  # single_gap
        others = np.full(K - 1, mu - lo)
    rng = np.random.default_rng(spec.seed)
    pos = int(rng.integers(0, K))
    means = np.empty(K)
    means[pos] = mu
    means[np.arange(K) != pos] = others
    return BanditInstance(means=tuple(means), family=spec.family)


@dataclass(frozen=True)
class ExperimentConfig:
    instance: InstanceSpec
    budgets: tuple[int, ...]
    algorithms: tuple[str, ...] = ("UE", "SR", "SH", "RE")
    trials: int = 500
    master_seed: int = 0
    re_options: ReOptions = field(default_factory=ReOptions)


@dataclass
class CellResult:
    """One (instance, algorithm, T) cell of an experiment table."""

    instance_id: str
    algorithm: str
    T: int
    trials: int
    errors: int | None
    p_hat: float | None
    ci_lo: float | None
    ci_hi: float | None
    wall_time: float = 0.0
    failure: str | None = None  # error code when the cell is absent


def resolve_threads(threads: int | None = None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("BAI_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigParse(f"BAI_THREADS must be an integer, got {env!r}") from exc
    return max(1, os.cpu_count() or 1)


def _run_cell(
    env: Environment,
    algorithm: str,
    T: int,
    trials: int,
    master_seed: int,
    cell_index: int,
    re_options: ReOptions,
    pool: ThreadPoolExecutor,
) -> tuple[int | None, str | None]:
    """Error count over `trials` runs, or a failure code for absent cells."""

    def one(j: int) -> bool:
        rng = RngStream(master_seed, cell_index * trials + j).generator()
        return run_policy(algorithm, env, T, rng, re_options).correct

    try:
        outcomes = list(pool.map(one, range(trials)))
    except BestArmError as exc:
        return None, exc.code
    return sum(1 for ok in outcomes if not ok), None


def run_cells(
    env: Environment,
    algorithms,
    budgets,
    trials: int,
    master_seed: int,
    instance_id: str,
    re_options: ReOptions | None = None,
    threads: int | None = None,
    re_options_by_name: dict | None = None,
) -> list[CellResult]:
    """Shared runner: every (algorithm, T) cell over a fixed environment.

    `re_options_by_name` lets callers run the same policy under several
    configurations (e.g. oracle vs plug-in priors) as distinct algorithm
    labels of the form "RE-oracle"; a label's base name before the dash picks
    the policy.
    """
    opts_default = re_options or ReOptions()
    results: list[CellResult] = []
    n_workers = resolve_threads(threads)
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        cell_index = 0
        for algorithm in algorithms:
            base = algorithm.split("-")[0]
            opts = (re_options_by_name or {}).get(algorithm, opts_default)
            for T in budgets:
                start = time.perf_counter()
                errors, failure = _run_cell(
                    env, base, int(T), trials, master_seed, cell_index, opts, pool
                )
                elapsed = time.perf_counter() - start
                if failure is None:
                    lo, hi = wilson_interval(errors, trials)
                    results.append(
                        CellResult(
                            instance_id=instance_id,
                            algorithm=algorithm,
                            T=int(T),
                            trials=trials,
                            errors=errors,
                            p_hat=errors / trials,
                            ci_lo=lo,
                            ci_hi=hi,
                            wall_time=elapsed,
                        )
                    )
                else:
                    results.append(
                        CellResult(
                            instance_id=instance_id,
                            algorithm=algorithm,
                            T=int(T),
                            trials=trials,
                            errors=None,
                            p_hat=None,
                            ci_lo=None,
                            ci_hi=None,
                            wall_time=elapsed,
                            failure=failure,
                        )
                    )
                cell_index += 1
    return results


def run_experiment(
    config: ExperimentConfig, threads: int | None = None
) -> list[CellResult]:
    """Monte-Carlo error table for one generated instance."""
    instance = generate_instance(config.instance)
    env = BanditEnv(instance)
    return run_cells(
        env,
        config.algorithms,
        config.budgets,
        config.trials,
        config.master_seed,
        config.instance.instance_id,
        re_options=config.re_options,
        threads=threads,
    )


RESULT_COLUMNS = (
    "instance_id",
    "algorithm",
    "T",
    "trials",
    "errors",
    "p_hat",
    "ci_lo",
    "ci_hi",
)


def result_rows(results) -> list[list]:
    """CellResults as CSV value rows; absent cells keep empty value fields."""
    rows: list[list] = []
    for r in results:
        rows.append(
            [
                r.instance_id,
                r.algorithm,
                r.T,
                r.trials,
                "" if r.errors is None else r.errors,
                "" if r.p_hat is None else float(r.p_hat),
                "" if r.ci_lo is None else float(r.ci_lo),
                "" if r.ci_hi is None else float(r.ci_hi),
            ]
        )
    return rows


def results_to_csv(results, path) -> None:
    """Write cells as CSV; absent cells keep their row with empty values."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        writer.writerows(result_rows(results))


def theoretical_bound(
    algorithm: str,
    instance: BanditInstance,
    T: int,
    hp: HardnessProfile | None = None,
) -> float | None:
    """Clipped bound for one algorithm at one budget; None when inapplicable."""
    if hp is None:
        hp = hardness(gap_profile(instance))
    K = instance.K
    if isinstance(instance.family, Gaussian):
        fam, s2 = "gaussian", instance.family.sigma2
        if s2 <= 0:
            return None
    else:
        fam, s2 = "bounded", None
    try:
        if algorithm == "UE":
            return bound_ue(fam, K, T, hp.H3, s2)
        if algorithm == "SR":
            return bound_sr(fam, K, T, hp.H2, s2)
        if algorithm == "SH":
            return bound_sh(fam, K, T, hp.H2, s2)
        if algorithm.startswith("RE"):
            if K & (K - 1) or hp.eta is None or hp.eta <= 0:
                return None
            return bound_re(fam, K, T, hp.H4, hp.eta, s2)
    except BestArmError:
        return None
    return None


def bound_vs_empirical(
    config: ExperimentConfig, threads: int | None = None
) -> tuple[list[str], list[list]]:
    """Per-budget table of empirical error rates next to theoretical bounds.

    Returns (header, rows); empty strings mark cells whose bound or run is
    not applicable at that budget.
    """
    results = run_experiment(config, threads=threads)
    instance = generate_instance(config.instance)
    hp = hardness(gap_profile(instance))
    by_cell = {(r.algorithm, r.T): r for r in results}
    header = ["T"]
    for algorithm in config.algorithms:
        header += [
            f"{algorithm}_p_hat",
            f"{algorithm}_ci_lo",
            f"{algorithm}_ci_hi",
            f"{algorithm}_bound",
        ]
    rows: list[list] = []
    for T in config.budgets:
        row: list = [int(T)]
        for algorithm in config.algorithms:
            cell = by_cell[(algorithm, int(T))]
            bound = theoretical_bound(algorithm, instance, int(T), hp)
            row += [
                "" if cell.p_hat is None else cell.p_hat,
                "" if cell.ci_lo is None else cell.ci_lo,
                "" if cell.ci_hi is None else cell.ci_hi,
                "" if bound is None else bound,
            ]
        rows.append(row)
    return header, rows


def parse_grid(text: str) -> tuple[float, ...]:
    """Parse a sweep grid: "a:b:step", "a:b:xfactor" (geometric), or "v1,v2,...".

    The a:b forms are inclusive of b up to float tolerance.
    """
    s = str(text).strip()
    if not s:
        raise ConfigParse("empty grid")
    if ":" in s:
        parts = s.split(":")
        if len(parts) != 3:
            raise ConfigParse(f"grid must be a:b:step, got {text!r}")
        try:
            a, b = float(parts[0]), float(parts[1])
        except ValueError as exc:
            raise ConfigParse(f"bad grid endpoint in {text!r}") from exc
        step = parts[2].strip()
        vals: list[float] = []
        if step.lower().startswith("x"):
            try:
                q = float(step[1:])
            except ValueError as exc:
                raise ConfigParse(f"bad grid factor in {text!r}") from exc
            if q <= 1.0 or a <= 0:
                raise ConfigParse("geometric grid needs a > 0 and factor > 1")
            v = a
            while v <= b * (1.0 + 1e-12):
                vals.append(v)
                v *= q
        else:
            try:
                d = float(step)
            except ValueError as exc:
                raise ConfigParse(f"bad grid step in {text!r}") from exc
            if d <= 0:
                raise ConfigParse("grid step must be positive")
            v = a
            while v <= b + d * 1e-9:
                vals.append(v)
                v += d
        if not vals:
            raise ConfigParse(f"grid {text!r} is empty")
        return tuple(vals)
    try:
        vals = [float(p) for p in s.split(",") if p.strip()]
    except ValueError as exc:
        raise ConfigParse(f"bad grid value in {text!r}") from exc
    if not vals:
        raise ConfigParse(f"grid {text!r} is empty")
    return tuple(vals)


_CONFIG_KEYS = {"instance", "budgets", "algorithms", "trials", "master_seed", "re_options"}
_INSTANCE_KEYS = {
    "K",
    "generator",
    "family",
    "mu_star",
    "delta_min",
    "delta_max",
    "means",
    "seed",
    "label",
}
_RE_OPTION_KEYS = {"alpha", "prior_mode", "eta_override"}
_ALGORITHMS = {"UE", "SR", "SH", "RE"}


def _canonical_generator(name) -> str:
    squashed = re.sub(r"[-_ ]", "", str(name).lower())
    for gen in GENERATORS:
        if squashed == gen.replace("_", ""):
            return gen
    raise ConfigParse(f"unknown generator {name!r}")


def _reject_unknown(payload: dict, allowed: set, what: str) -> None:
    unknown = set(payload) - allowed
    if unknown:
        raise ConfigParse(f"unknown {what} keys: {sorted(unknown)}")


def experiment_config_from_json(text: str) -> ExperimentConfig:
    """Parse a simulate config; mirrors ExperimentConfig, unknown keys rejected."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParse(f"invalid config JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigParse("config must be a JSON object")
    _reject_unknown(payload, _CONFIG_KEYS, "config")
    for required in ("instance", "budgets"):
        if required not in payload:
            raise ConfigParse(f"config missing {required!r}")
    inst = payload["instance"]
    if not isinstance(inst, dict):
        raise ConfigParse("instance must be a JSON object")
    _reject_unknown(inst, _INSTANCE_KEYS, "instance")
    if "family" not in inst or "generator" not in inst:
        raise ConfigParse("instance needs family and generator")
    family = family_from_json(inst["family"])
    generator = _canonical_generator(inst["generator"])
    means = inst.get("means")
    if means is not None:
        try:
            means = tuple(float(x) for x in means)
        except (TypeError, ValueError) as exc:
            raise ConfigParse(f"bad means list: {exc}") from exc
    if "K" in inst:
        K = int(inst["K"])
    elif means is not None:
        K = len(means)
    else:
        raise ConfigParse("instance needs K (or explicit means)")
    try:
        spec = InstanceSpec(
            K=K,
            generator=generator,
            family=family,
            mu_star=float(inst.get("mu_star", 1.0)),
            delta_min=float(inst.get("delta_min", 0.1)),
            delta_max=float(inst.get("delta_max", 0.1)),
            means=means,
            seed=int(inst.get("seed", 0)),
            label=inst.get("label"),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigParse(f"bad instance field: {exc}") from exc
    budgets_raw = payload["budgets"]
    if isinstance(budgets_raw, str):
        budgets = tuple(int(round(v)) for v in parse_grid(budgets_raw))
    elif isinstance(budgets_raw, list) and budgets_raw:
        try:
            budgets = tuple(int(v) for v in budgets_raw)
        except (TypeError, ValueError) as exc:
            raise ConfigParse(f"bad budget value: {exc}") from exc
    else:
        raise ConfigParse("budgets must be a nonempty list or a grid string")
    if any(T < 1 for T in budgets):
        raise ConfigParse(f"budgets must be >= 1, got {budgets}")
    algorithms_raw = payload.get("algorithms", list(("UE", "SR", "SH", "RE")))
    if isinstance(algorithms_raw, str):
        algorithms_raw = [p.strip() for p in algorithms_raw.split(",") if p.strip()]
    algorithms = tuple(str(a) for a in algorithms_raw)
    if not algorithms:
        raise ConfigParse("algorithms must be nonempty")
    for a in algorithms:
        if a not in _ALGORITHMS:
            raise ConfigParse(f"unknown algorithm {a!r} (choose from {sorted(_ALGORITHMS)})")
    re_raw = payload.get("re_options", {})
    if not isinstance(re_raw, dict):
        raise ConfigParse("re_options must be a JSON object")
    _reject_unknown(re_raw, _RE_OPTION_KEYS, "re_options")
    try:
        re_options = ReOptions(
            alpha=float(re_raw.get("alpha", 0.0)),
            prior_mode=str(re_raw.get("prior_mode", "oracle")),
            eta_override=(
                None
                if re_raw.get("eta_override") is None
                else float(re_raw["eta_override"])
            ),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigParse(f"bad re_options: {exc}") from exc
    trials = int(payload.get("trials", 500))
    if trials < 1:
        raise ConfigParse(f"need trials >= 1, got {trials}")
    return ExperimentConfig(
        instance=spec,
        budgets=budgets,
        algorithms=algorithms,
        trials=trials,
        master_seed=int(payload.get("master_seed", 0)),
        re_options=re_options,
    )


@dataclass(frozen=True)
class GroupMeanDistribution:
    """Sampled laws of the group means with and without the best arm."""

    K: int
    delta_min: float
    delta_max: float
    mu_star: float
    samples: int
    edges_H: np.ndarray
    counts_H: np.ndarray
    edges_L: np.ndarray
    counts_L: np.ndarray
    emp_mean_H: float
    emp_var_H: float
    emp_mean_L: float
    emp_var_L: float
    th_mean_H: float
    th_var_H: float
    th_mean_L: float
    th_var_L: float


def group_mean_distribution(
    K: int,
    delta_min: float,
    delta_max: float,
    samples: int,
    mu_star: float = 1.0,
    bins: int = 60,
    master_seed: int = 0,
) -> GroupMeanDistribution:
    """Group means under i.i.d. Uniform[delta_min, delta_max] gap draws.

    mu_H averages the best arm with K/2 - 1 random sub-optimal means; mu_L
    averages K/2 of them. The centered sums follow Irwin-Hall laws, so the
    moments below admit closed forms; the mu_H variance carries an extra
    (1 - 2/K) factor relative to mu_L since one summand is deterministic.
    """
    if K < 2 or K % 2:
        raise ConfigParse(f"need even K >= 2, got {K}")
    if samples < 1:
        raise ConfigParse(f"need samples >= 1, got {samples}")
    if delta_min > delta_max:
        raise ConfigParse(f"delta_min {delta_min} > delta_max {delta_max}")
    rng = np.random.default_rng([master_seed, K, samples])
    half = K // 2
    gaps_h = rng.uniform(delta_min, delta_max, size=(samples, half - 1))
    gaps_l = rng.uniform(delta_min, delta_max, size=(samples, half))
    mu_h = mu_star - gaps_h.sum(axis=1) / half
    mu_l = mu_star - gaps_l.mean(axis=1)
    counts_h, edges_h = np.histogram(mu_h, bins=bins)
    counts_l, edges_l = np.histogram(mu_l, bins=bins)
    spread = delta_max - delta_min
    mid = (delta_min + delta_max) / 2.0
    th_var_l = spread**2 / (6.0 * K)
    return GroupMeanDistribution(
        K=K,
        delta_min=delta_min,
        delta_max=delta_max,
        mu_star=mu_star,
        samples=samples,
        edges_H=edges_h,
        counts_H=counts_h,
        edges_L=edges_l,
        counts_L=counts_l,
        emp_mean_H=float(mu_h.mean()),
        emp_var_H=float(mu_h.var(ddof=1)) if samples > 1 else 0.0,
        emp_mean_L=float(mu_l.mean()),
        emp_var_L=float(mu_l.var(ddof=1)) if samples > 1 else 0.0,
        th_mean_H=mu_star - (1.0 - 2.0 / K) * mid,
        th_var_H=th_var_l * (1.0 - 2.0 / K),
        th_mean_L=mu_star - mid,
        th_var_L=th_var_l,
    )


def _clt_density(x: np.ndarray, mean: float, var: float) -> np.ndarray:
    if var <= 0.0:
        return np.zeros_like(x)
    return np.exp(-((x - mean) ** 2) / (2.0 * var)) / math.sqrt(2.0 * math.pi * var)


def group_mean_distribution_rows(dist: GroupMeanDistribution):
    """Histogram rows (variable, bin_lo, bin_hi, count, density, clt_density)."""
    rows = []
    for name, edges, counts, mean, var in (
        ("mu_H", dist.edges_H, dist.counts_H, dist.th_mean_H, dist.th_var_H),
        ("mu_L", dist.edges_L, dist.counts_L, dist.th_mean_L, dist.th_var_L),
    ):
        widths = np.diff(edges)
        total = counts.sum()
        centers = (edges[:-1] + edges[1:]) / 2.0
        clt = _clt_density(centers, mean, var)
        for i in range(len(counts)):
            density = (
                counts[i] / (total * widths[i]) if total > 0 and widths[i] > 0 else 0.0
            )
            rows.append(
                [
                    name,
                    float(edges[i]),
                    float(edges[i + 1]),
                    int(counts[i]),
                    float(density),
                    float(clt[i]),
                ]
            )
    return rows
