"""Bandit instances, gap bookkeeping, and reward sampling.

Arms are 1-indexed throughout the public API. Reward families:

* ``Gaussian(sigma2)`` -- N(mu_a, sigma2) rewards, sigma2 >= 0 (zero gives a
  point mass, handy for noiseless checks).
* ``Bernoulli()`` -- {0,1} rewards with mean mu_a in [0,1].
* ``BoundedUnit()`` -- rewards in [0,1]; sampled as Bernoulli(mu_a), which is
  the tested default for the bounded family.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigParse,
    DuplicateBestArm,
    EmptyGroup,
    IndexOutOfRange,
    SupportViolation,
)


@dataclass(frozen=True)
class Gaussian:
    sigma2: float

    def __post_init__(self):
        if self.sigma2 < 0:
            raise SupportViolation(f"sigma2 must be >= 0, got {self.sigma2}")


@dataclass(frozen=True)
class Bernoulli:
    pass


@dataclass(frozen=True)
class BoundedUnit:
    pass


Family = Gaussian | Bernoulli | BoundedUnit


def _is_unit_family(family: Family) -> bool:
    return isinstance(family, (Bernoulli, BoundedUnit))


@dataclass(frozen=True)
class BanditInstance:
    """A K-armed instance: mean vector plus reward family."""

    means: tuple[float, ...]
    family: Family

    def __post_init__(self):
        means = tuple(float(m) for m in self.means)
        object.__setattr__(self, "means", means)
        if len(means) < 1:
            raise SupportViolation("instance needs at least one arm")
        if _is_unit_family(self.family):
            if min(means) < 0.0 or max(means) > 1.0:
                raise SupportViolation(
                    "Bernoulli/BoundedUnit means must lie in [0,1]"
                )

    @property
    def K(self) -> int:
        return len(self.means)

    @property
    def best_arm(self) -> int:
        """1-indexed position of the unique maximal mean."""
        arr = np.asarray(self.means)
        top = arr.max()
        winners = np.flatnonzero(arr == top)
        if winners.size != 1:
            raise DuplicateBestArm(
                f"max mean {top} attained by arms {list(winners + 1)}"
            )
        return int(winners[0]) + 1


@dataclass(frozen=True)
class GapProfile:
    """Sorted means and the nondecreasing gap vector of an instance.

    gaps[i] follows the convention Delta_[1] = Delta_[2]: the best arm's own
    gap is defined as its distance to the runner-up, so the two smallest
    entries coincide by construction.
    """

    sorted_means: tuple[float, ...]  # descending
    gaps: tuple[float, ...]  # ascending, gaps[0] == gaps[1]
    delta_min: float
    delta_max: float

    @property
    def K(self) -> int:
        return len(self.gaps)


def gap_profile(instance: BanditInstance) -> GapProfile:
    """Sub-optimality gaps of an instance with a unique best arm.

    Raises DuplicateBestArm when the maximal mean is attained twice.
    """
    instance.best_arm  # raises DuplicateBestArm on ties
    mu = np.sort(np.asarray(instance.means))[::-1]
    sub_gaps = mu[0] - mu[1:]  # Delta_a for a != a*, ascending after sort
    sub_gaps = np.sort(sub_gaps)
    gaps = np.concatenate(([sub_gaps[0]], sub_gaps))  # best arm duplicates the min
    return GapProfile(
        sorted_means=tuple(float(x) for x in mu),
        gaps=tuple(float(x) for x in gaps),
        delta_min=float(gaps[0]),
        delta_max=float(gaps[-1]),
    )


@dataclass(frozen=True)
class RngStream:
    """Counter-style RNG handle: (master_seed, stream_id) fixes the stream.

    Streams with equal fields produce bit-identical draws regardless of the
    order in which trials execute, so parallel runs stay reproducible.
    """

    master_seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        return np.random.default_rng([self.master_seed, self.stream_id])


def _check_arm(instance: BanditInstance, arm: int) -> int:
    if not 1 <= arm <= instance.K:
        raise IndexOutOfRange(f"arm {arm} outside [1, {instance.K}]")
    return arm - 1


def sample_arm(instance: BanditInstance, arm: int, rng: np.random.Generator) -> float:
    """One reward draw from a single arm."""
    idx = _check_arm(instance, arm)
    mu = instance.means[idx]
    if isinstance(instance.family, Gaussian):
        return float(rng.normal(mu, np.sqrt(instance.family.sigma2)))
    return float(rng.random() < mu)


def sample_group(
    instance: BanditInstance, members, rng: np.random.Generator
) -> float:
    """Average of one fresh draw from each member arm.

    For the Gaussian family the result is N(mean of member means,
    sigma2/|members|).
    """
    members = sorted(set(int(a) for a in members))
    if not members:
        raise EmptyGroup("group pull needs at least one member")
    idx = np.array([_check_arm(instance, a) for a in members])
    mu = np.asarray(instance.means)[idx]
    if isinstance(instance.family, Gaussian):
        draws = rng.normal(mu, np.sqrt(instance.family.sigma2))
    else:
        draws = (rng.random(len(idx)) < mu).astype(float)
    return float(draws.mean())


def sample_arm_sum(
    instance: BanditInstance, arm: int, n: int, rng: np.random.Generator
) -> float:
    """Sum of n i.i.d. draws from one arm, sampled via sufficient statistics.

    Distributionally identical to summing n sample_arm calls: the Gaussian
    sum is N(n*mu, n*sigma2) and the Bernoulli sum is Binomial(n, mu).
    """
    idx = _check_arm(instance, arm)
    if n <= 0:
        return 0.0
    mu = instance.means[idx]
    if isinstance(instance.family, Gaussian):
        return float(rng.normal(n * mu, np.sqrt(n * instance.family.sigma2)))
    return float(rng.binomial(n, mu))


def sample_arms_sum(
    instance: BanditInstance, arms, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Vector of n-pull reward sums, one independent entry per arm in `arms`.

    Same law as calling sample_arm_sum per arm; one batched draw keeps
    K-phase schedules like successive rejects cheap at large K.
    """
    idx = np.array([_check_arm(instance, a) for a in arms])
    if n <= 0:
        return np.zeros(len(idx))
    mu = np.asarray(instance.means)[idx]
    if isinstance(instance.family, Gaussian):
        sums = n * mu
        if instance.family.sigma2 > 0.0:
            sums = sums + rng.normal(
                0.0, np.sqrt(n * instance.family.sigma2), size=len(idx)
            )
        return np.asarray(sums, dtype=float)
    return rng.binomial(n, mu).astype(float)


def sample_group_sum(
    instance: BanditInstance, members, n: int, rng: np.random.Generator
) -> float:
    """Sum over n pulls of the group-average reward, via sufficient stats."""
    members = sorted(set(int(a) for a in members))
    if not members:
        raise EmptyGroup("group pull needs at least one member")
    idx = np.array([_check_arm(instance, a) for a in members])
    if n <= 0:
        return 0.0
    mu = np.asarray(instance.means)[idx]
    g = len(idx)
    if isinstance(instance.family, Gaussian):
        group_mu = float(mu.mean())
        var = instance.family.sigma2 / g
        return float(rng.normal(n * group_mu, np.sqrt(n * var)))
    counts = rng.binomial(n, mu)  # per-member success counts over the n pulls
    return float(counts.sum()) / g


def dummy_mean(instance: BanditInstance) -> float:
    """Point-mass mean for padding arms: well below the worst real arm.

    mu_dummy = mu_[K] - Delta_max, floored at 0 for the [0,1] families (the
    floor is the support clip; Gaussian means are unconstrained).
    """
    prof = gap_profile(instance)
    raw = prof.sorted_means[-1] - prof.delta_max
    if _is_unit_family(instance.family):
        return max(0.0, raw)
    return raw


def instance_to_json(instance: BanditInstance) -> str:
    if isinstance(instance.family, Gaussian):
        family = {"gaussian": {"sigma2": instance.family.sigma2}}
    elif isinstance(instance.family, Bernoulli):
        family = "bernoulli"
    else:
        family = "bounded"
    payload = {"K": instance.K, "means": list(instance.means), "family": family}
    return json.dumps(payload)


def family_from_json(family_spec) -> Family:
    """Parse the family part of an instance/config JSON payload."""
    if family_spec == "bernoulli":
        return Bernoulli()
    if family_spec == "bounded":
        return BoundedUnit()
    if isinstance(family_spec, dict) and "gaussian" in family_spec:
        try:
            return Gaussian(float(family_spec["gaussian"]["sigma2"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigParse(f"bad gaussian family spec: {exc}") from exc
    raise ConfigParse(f"unknown family spec: {family_spec!r}")


def instance_from_json(text: str) -> BanditInstance:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParse(f"invalid instance JSON: {exc}") from exc
    try:
        means = [float(x) for x in payload["means"]]
        family_spec = payload["family"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigParse(f"instance JSON missing/invalid fields: {exc}") from exc
    if "K" in payload and int(payload["K"]) != len(means):
        raise ConfigParse(
            f"K={payload['K']} does not match {len(means)} means"
        )
    return BanditInstance(means=tuple(means), family=family_from_json(family_spec))
