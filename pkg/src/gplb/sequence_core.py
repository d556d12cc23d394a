"""Conjugate Gaussian-process inference in the white-noise sequence model.

Observations follow Y_k = theta_k + w_k / sqrt(n) with independent standard
Gaussian noise w_k, one coordinate per basis function of an orthonormal
system on the sample space.  A centered Gaussian-process prior with
Karhunen-Loeve eigenvalues lambda_k makes every coordinate conjugate:

    theta_k | Y_k  ~  N(a_k Y_k, lambda_k / (n lambda_k + 1)),
    a_k = n lambda_k / (n lambda_k + 1).

The posterior mean estimator fbar_n with coordinates a_k Y_k has the exact
frequentist squared risk

    E_theta || fbar_n - theta ||^2 = sum_k (a_k - 1)^2 theta_k^2 + a_k^2 / n,

which this module evaluates in closed form and by Monte Carlo.  All
randomness flows through numpy Generators supplied by the caller, so every
randomized operation is a pure function of (inputs, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import zeta as _hurwitz_zeta

from .errors import ContractError, DomainError

__all__ = [
    "Spectrum",
    "SequenceObservation",
    "GPPosterior",
    "TruthCoefficients",
    "StreamingMoments",
    "sample_observation",
    "posterior_update",
    "exact_risk",
    "mc_risk",
    "contraction_probability",
    "polynomial_spectrum",
    "exponential_spectrum",
    "flat_spectrum",
]


def _frozen_array(values, name: str, *, allow_negative: bool) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise DomainError(f"{name} must be a one-dimensional array with at least one entry")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    if not allow_negative and np.any(arr < 0.0):
        raise DomainError(f"{name} must be nonnegative")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Spectrum:
    """Prior eigenvalues lambda_k truncated at K entries, tied to a basis.

    Zero eigenvalues are permitted and describe coordinates the prior does
    not model (shrinkage weight 0, posterior variance 0), which covers
    finite-rank priors.  ``tail_trace`` optionally records the neglected
    prior trace sum_{k > K} lambda_k when a closed form is available;
    ``None`` declares the truncation exact by fiat.
    """

    eigenvalues: np.ndarray
    basis_id: str
    tail_trace: float | None = None

    def __post_init__(self):
        arr = _frozen_array(self.eigenvalues, "eigenvalues", allow_negative=False)
        object.__setattr__(self, "eigenvalues", arr)
        if self.tail_trace is not None and not (
            math.isfinite(self.tail_trace) and self.tail_trace >= 0.0
        ):
            raise DomainError("tail_trace must be a finite nonnegative number when given")

    @property
    def size(self) -> int:
        return int(self.eigenvalues.size)


@dataclass(frozen=True)
class TruthCoefficients:
    """Coefficients of the true regression function in a named basis."""

    theta: np.ndarray
    basis_id: str

    def __post_init__(self):
        arr = _frozen_array(self.theta, "theta", allow_negative=True)
        object.__setattr__(self, "theta", arr)

    @property
    def size(self) -> int:
        return int(self.theta.size)


@dataclass(frozen=True)
class SequenceObservation:
    """Observed sequence-model coefficients Y_k at noise level 1/sqrt(n)."""

    coefficients: np.ndarray
    n: float
    basis_id: str

    def __post_init__(self):
        arr = _frozen_array(self.coefficients, "coefficients", allow_negative=True)
        object.__setattr__(self, "coefficients", arr)
        if not (self.n > 0 and math.isfinite(self.n)):
            raise DomainError("sample size n must be positive and finite")


@dataclass(frozen=True)
class GPPosterior:
    """Coordinatewise conjugate posterior: N(means_k, variances_k)."""

    means: np.ndarray
    variances: np.ndarray
    weights: np.ndarray
    basis_id: str
    n: float

    def __post_init__(self):
        for name in ("means", "variances", "weights"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def _check_same_basis(basis_a: str, basis_b: str, what: str) -> None:
    if basis_a != basis_b:
        raise ContractError(f"{what}: basis {basis_a!r} does not match basis {basis_b!r}")


def _check_same_length(size_a: int, size_b: int, what: str) -> None:
    if size_a != size_b:
        raise ContractError(f"{what}: coordinate counts differ ({size_a} vs {size_b})")


def _shrinkage(lam: np.ndarray, n: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (weights a_k, 1 - a_k, posterior variances), overflow-safe.

    Uses variance = 1 / (n + 1/lambda) and a = n * variance, which stay
    accurate across the whole eigenvalue range, including lambda = 0.
    """
    with np.errstate(divide="ignore", over="ignore"):
        inv_lam = np.where(lam > 0.0, 1.0 / lam, np.inf)
        variances = 1.0 / (n + inv_lam)
        weights = n * variances
        one_minus = np.where(lam > 0.0, 1.0 / (1.0 + n * lam), 1.0)
    return weights, one_minus, variances


def sample_observation(theta: TruthCoefficients, n: float, rng: np.random.Generator) -> SequenceObservation:
    """Draw Y_k = theta_k + w_k / sqrt(n) with iid standard Gaussian w_k."""
    if not (n > 0 and math.isfinite(n)):
        raise DomainError("sample size n must be positive and finite")
    noise = rng.standard_normal(theta.size) / math.sqrt(n)
    return SequenceObservation(theta.theta + noise, float(n), theta.basis_id)


def posterior_update(spectrum: Spectrum, observation: SequenceObservation) -> GPPosterior:
    """Exact conjugate update of the prior spectrum against one observation."""
    _check_same_basis(spectrum.basis_id, observation.basis_id, "posterior_update")
    _check_same_length(spectrum.size, observation.coefficients.size, "posterior_update")
    weights, _, variances = _shrinkage(spectrum.eigenvalues, observation.n)
    return GPPosterior(
        means=weights * observation.coefficients,
        variances=variances,
        weights=weights,
        basis_id=spectrum.basis_id,
        n=observation.n,
    )


def exact_risk(spectrum: Spectrum, theta: TruthCoefficients, n: float) -> float:
    """Exact squared risk of the posterior mean at the given truth.

    Computes sum_k (a_k - 1)^2 theta_k^2 + a_k^2 / n over the truncated
    coordinates.
    """
    if not (n > 0 and math.isfinite(n)):
        raise DomainError("sample size n must be positive and finite")
    _check_same_basis(spectrum.basis_id, theta.basis_id, "exact_risk")
    _check_same_length(spectrum.size, theta.size, "exact_risk")
    weights, one_minus, _ = _shrinkage(spectrum.eigenvalues, n)
    bias_sq = float(np.sum((one_minus * theta.theta) ** 2))
    variance = float(np.sum(weights**2)) / n
    return bias_sq + variance


class StreamingMoments:
    """Streaming mean and variance with batch updates (Chan-style merge).

    Supports chunked Monte Carlo accumulation: results do not depend on
    how the replications are partitioned into batches.
    """

    def __init__(self):
        self.count = 0
        self.mean = 0.0
        self._m2 = 0.0

    def add(self, values: np.ndarray) -> None:
        values = np.asarray(values, dtype=float)
        b = values.size
        if b == 0:
            return
        b_mean = float(values.mean())
        b_m2 = float(((values - b_mean) ** 2).sum())
        if self.count == 0:
            self.count, self.mean, self._m2 = b, b_mean, b_m2
            return
        delta = b_mean - self.mean
        total = self.count + b
        self._m2 += b_m2 + delta**2 * self.count * b / total
        self.mean += delta * b / total
        self.count = total

    @property
    def variance(self) -> float:
        if self.count < 2:
            return 0.0
        return self._m2 / (self.count - 1)

    @property
    def stderr(self) -> float:
        if self.count < 2:
            return 0.0
        return math.sqrt(self.variance / self.count)


_MC_CHUNK_BUDGET = 4_000_000  # scalars per Monte Carlo chunk


def mc_risk(
    spectrum: Spectrum,
    theta: TruthCoefficients,
    n: float,
    replications: int,
    rng: np.random.Generator,
) -> tuple[float, float]:
    """Monte Carlo estimate of the posterior-mean squared risk.

    Returns (estimate, standard error).  Each replication draws a fresh
    observation and evaluates ||posterior mean - theta||^2; the exact
    counterpart is :func:`exact_risk`.
    """
    if replications < 2:
        raise DomainError("mc_risk needs at least 2 replications")
    if not (n > 0 and math.isfinite(n)):
        raise DomainError("sample size n must be positive and finite")
    _check_same_basis(spectrum.basis_id, theta.basis_id, "mc_risk")
    _check_same_length(spectrum.size, theta.size, "mc_risk")

    weights, one_minus, _ = _shrinkage(spectrum.eigenvalues, n)
    # fbar_k - theta_k = (a_k - 1) theta_k + a_k w_k / sqrt(n)
    base = -one_minus * theta.theta
    scale = weights / math.sqrt(n)
    moments = StreamingMoments()
    chunk = max(1, min(replications, _MC_CHUNK_BUDGET // max(1, spectrum.size)))
    done = 0
    while done < replications:
        b = min(chunk, replications - done)
        w = rng.standard_normal((b, spectrum.size))
        errors = base[None, :] + scale[None, :] * w
        moments.add(np.einsum("ij,ij->i", errors, errors))
        done += b
    return moments.mean, moments.stderr


def contraction_probability(
    spectrum: Spectrum,
    theta: TruthCoefficients,
    n: float,
    radius: float,
    outer: int,
    inner: int,
    rng: np.random.Generator,
) -> tuple[float, float]:
    """Nested Monte Carlo estimate of E_theta Pi(||f - theta|| >= radius | Y).

    The outer loop draws observations, the inner loop draws posterior
    samples coordinatewise from N(mean_k, variance_k) and checks whether
    the squared distance to the truth reaches radius^2.  Returns
    (estimate, standard error across outer draws).
    """
    if not (radius > 0 and math.isfinite(radius)):
        raise DomainError("radius must be positive and finite")
    if outer < 1 or inner < 1:
        raise DomainError("outer and inner sample counts must be at least 1")
    if not (n > 0 and math.isfinite(n)):
        raise DomainError("sample size n must be positive and finite")
    _check_same_basis(spectrum.basis_id, theta.basis_id, "contraction_probability")
    _check_same_length(spectrum.size, theta.size, "contraction_probability")

    weights, one_minus, variances = _shrinkage(spectrum.eigenvalues, n)
    sd = np.sqrt(variances)
    base = -one_minus * theta.theta
    scale = weights / math.sqrt(n)
    r_sq = radius * radius
    K = spectrum.size

    fractions = np.empty(outer)
    inner_chunk = max(1, min(inner, _MC_CHUNK_BUDGET // max(1, K)))
    for o in range(outer):
        w = rng.standard_normal(K)
        center = base + scale * w  # posterior mean minus theta
        exceed = 0
        done = 0
        while done < inner:
            b = min(inner_chunk, inner - done)
            z = rng.standard_normal((b, K))
            dev = center[None, :] + sd[None, :] * z
            dist_sq = np.einsum("ij,ij->i", dev, dev)
            exceed += int(np.count_nonzero(dist_sq >= r_sq))
            done += b
        fractions[o] = exceed / inner
    estimate = float(fractions.mean())
    stderr = float(fractions.std(ddof=1) / math.sqrt(outer)) if outer >= 2 else 0.0
    return estimate, stderr


# ---------------------------------------------------------------------------
# Spectrum presets
# ---------------------------------------------------------------------------

def _check_preset_args(K: int, tau: float) -> None:
    if K < 1:
        raise DomainError("spectrum length K must be at least 1")
    if not (tau > 0 and math.isfinite(tau)):
        raise DomainError("scale tau must be positive and finite")


def polynomial_spectrum(K: int, *, basis_id: str, tau: float = 1.0, alpha: float = 1.0, d: int = 1) -> Spectrum:
    """lambda_k = tau * k^{-(1 + 2 alpha / d)}, the classical smoothness scale.

    The neglected tail trace is recorded via the Hurwitz zeta function.
    """
    _check_preset_args(K, tau)
    if alpha <= 0 or d < 1:
        raise DomainError("polynomial spectrum needs alpha > 0 and d >= 1")
    p = 1.0 + 2.0 * alpha / d
    k = np.arange(1, K + 1, dtype=float)
    tail = tau * float(_hurwitz_zeta(p, K + 1))
    return Spectrum(tau * k**-p, basis_id, tail_trace=tail)


def exponential_spectrum(K: int, *, basis_id: str, tau: float = 1.0, beta: float = 1.0) -> Spectrum:
    """lambda_k = tau * exp(-beta k) with a geometric tail trace."""
    _check_preset_args(K, tau)
    if beta <= 0:
        raise DomainError("exponential spectrum needs beta > 0")
    k = np.arange(1, K + 1, dtype=float)
    decay = math.exp(-beta)
    tail = tau * math.exp(-beta * (K + 1)) / (1.0 - decay)
    return Spectrum(tau * np.exp(-beta * k), basis_id, tail_trace=tail)


def flat_spectrum(K: int, *, basis_id: str, tau: float = 1.0) -> Spectrum:
    """lambda_k = tau for every retained coordinate (no tail closed form)."""
    _check_preset_args(K, tau)
    return Spectrum(np.full(K, tau), basis_id, tail_trace=None)
