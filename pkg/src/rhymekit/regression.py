"""Bayesian mixed-effects logistic regression of annotator agreement.

Model: agreement_i ~ Bernoulli(sigmoid(alpha_{c(i)} + beta_p * phon_i
+ beta_l * line_i)) with partial pooling alpha_c ~ Normal(mu_alpha,
sigma_alpha). Fitting is componentwise adaptive random-walk Metropolis.

Internally the sampler works in a shifted basis (intercepts absorb the
predictor means) that decorrelates intercepts from slopes; the map is
linear with unit Jacobian and all priors are evaluated on the original
parameters, so the posterior is exactly the declared model's.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    ConfigError,
    DegenerateDesignError,
    InsufficientDataError,
    SchemaError,
    SeparabilityError,
)
from .evaluation import AgreementRow

RHAT_WARN = 1.05


@dataclass(frozen=True)
class LogitModelConfig:
    prior_beta_sd: float = 2.5
    prior_mu_alpha_sd: float = 5.0
    prior_sigma_alpha_scale: float = 2.0
    chains: int = 4
    draws: int = 5000  # total iterations per chain, warmup included
    warmup: int = 1000
    hdi_mass: float = 0.94
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.hdi_mass < 1.0:
            raise ConfigError(f"hdi_mass must be in (0,1), got {self.hdi_mass}")
        if not self.draws > self.warmup >= 0:
            raise ConfigError(
                f"need draws > warmup >= 0, got draws={self.draws} "
                f"warmup={self.warmup}")
        if self.chains < 1:
            raise ConfigError(f"chains must be >= 1, got {self.chains}")
        for name in ("prior_beta_sd", "prior_mu_alpha_sd", "prior_sigma_alpha_scale"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")


@dataclass(frozen=True)
class ParameterSummary:
    mean: float
    sd: float
    hdi_low: float
    hdi_high: float
    rhat: float
    ess: float


@dataclass(frozen=True)
class PosteriorSummary:
    parameters: dict[str, ParameterSummary]
    hdi_mass: float
    acceptance_rates: dict[str, float]
    warnings: tuple[str, ...]
    metadata: dict[str, float] = field(default_factory=dict)

    def __getitem__(self, name: str) -> ParameterSummary:
        return self.parameters[name]


def hdi(samples: Sequence[float], mass: float) -> tuple[float, float]:
    """Narrowest contiguous interval holding ceil(mass * n) sorted samples.

    Ties in width resolve to the smallest low endpoint.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n == 0:
        raise SchemaError("hdi of an empty sample")
    if not 0.0 < mass < 1.0:
        raise SchemaError(f"hdi mass must be in (0,1), got {mass}")
    # the epsilon keeps ceil from overshooting on floats like 0.94*100
    k = max(1, math.ceil(mass * n - 1e-9))
    k = min(k, n)
    widths = x[k - 1:] - x[: n - k + 1]
    i = int(np.argmin(widths))
    return float(x[i]), float(x[i + k - 1])


def _split_rhat(draws: np.ndarray) -> float:
    """Split-R-hat over (chains, draws); each chain halved first."""
    m, n = draws.shape
    half = n // 2
    splits = np.concatenate([draws[:, :half], draws[:, half: 2 * half]], axis=0)
    sn = splits.shape[1]
    means = splits.mean(axis=1)
    variances = splits.var(axis=1, ddof=1)
    w = variances.mean()
    b = sn * means.var(ddof=1)
    if w <= 0:
        return 1.0 if b <= 0 else float("inf")
    var_hat = (sn - 1) / sn * w + b / sn
    return float(np.sqrt(var_hat / w))


def _ess(draws: np.ndarray) -> float:
    """Effective sample size over (chains, draws) via autocorrelation with
    Geyer initial-positive-pair truncation."""
    m, n = draws.shape
    if n < 4:
        return float(m * n)
    means = draws.mean(axis=1)
    variances = draws.var(axis=1, ddof=1)
    w = variances.mean()
    b = n * means.var(ddof=1) if m > 1 else 0.0
    var_hat = (n - 1) / n * w + b / n
    if var_hat <= 0:
        return float(m * n)
    # per-chain autocovariance via FFT
    centered = draws - means[:, None]
    size = 2 ** int(np.ceil(np.log2(2 * n)))
    freq = np.fft.rfft(centered, n=size, axis=1)
    acov = np.fft.irfft(freq * np.conj(freq), n=size, axis=1)[:, :n].real / n
    rho = 1.0 - (w - acov.mean(axis=0)) / var_hat
    total = 0.0
    t = 1
    while t + 1 < n:
        pair = rho[t] + rho[t + 1]
        if pair < 0:
            break
        total += pair
        t += 2
    ess = m * n / (1.0 + 2.0 * total)
    return float(min(ess, m * n))


@dataclass
class _Design:
    y: np.ndarray
    phon: np.ndarray
    line: np.ndarray
    corpus_index: np.ndarray
    corpora: list[str]
    rows_by_corpus: list[np.ndarray]
    phon_mean: float
    line_mean: float


def _build_design(rows: Sequence[AgreementRow]) -> _Design:
    if len(rows) < 50:
        raise InsufficientDataError(
            f"need at least 50 agreement rows, got {len(rows)}")
    corpora = sorted({r.corpus for r in rows})
    if len(corpora) < 2:
        raise InsufficientDataError(
            f"need rows from at least 2 corpora, got {corpora}")
    index = {c: i for i, c in enumerate(corpora)}
    y = np.array([float(r.agreement) for r in rows])
    phon = np.array([r.phon_distance for r in rows])
    line = np.array([float(r.line_distance) for r in rows])
    cidx = np.array([index[r.corpus] for r in rows])
    if np.unique(phon).size < 2:
        raise DegenerateDesignError("phon_distance is constant across rows")
    if np.unique(line).size < 2:
        raise DegenerateDesignError("line_distance is constant across rows")
    if y.min() == y.max():
        raise SeparabilityError(
            "agreement is identical on every row; the model is unidentified")
    rows_by_corpus = [np.nonzero(cidx == i)[0] for i in range(len(corpora))]
    return _Design(y, phon, line, cidx, corpora, rows_by_corpus,
                   float(phon.mean()), float(line.mean()))


class _ChainState:
    """One chain's parameters in the shifted basis plus cached likelihood.

    Layout: [beta_p, beta_l, a'_0..a'_{C-1}, mu', log_sigma] where
    a'_c = alpha_c + beta_p*phon_mean + beta_l*line_mean and mu' shifts the
    same way, so eta = a'_c + beta_p*(phon-mean) + beta_l*(line-mean).
    """

    def __init__(self, design: _Design, config: LogitModelConfig):
        self.design = design
        self.config = config
        self.n_corpora = len(design.corpora)
        self.phon_c = design.phon - design.phon_mean
        self.line_c = design.line - design.line_mean
        c_rate = np.array([
            design.y[idx].mean() for idx in design.rows_by_corpus])
        c_rate = np.clip(c_rate, 0.02, 0.98)
        a0 = np.log(c_rate / (1.0 - c_rate))
        self.theta = np.concatenate([
            [0.0, 0.0], a0, [a0.mean()], [math.log(0.5)]])
        self.i_mu = 2 + self.n_corpora
        self.i_ls = self.i_mu + 1
        self.eta = self._full_eta()
        self.ll_rows = self._row_loglik(self.eta)

    def _full_eta(self) -> np.ndarray:
        alphas = self.theta[2:2 + self.n_corpora]
        return (alphas[self.design.corpus_index]
                + self.theta[0] * self.phon_c + self.theta[1] * self.line_c)

    def _row_loglik(self, eta: np.ndarray) -> np.ndarray:
        return self.design.y * eta - np.logaddexp(0.0, eta)

    def log_prior(self, theta: np.ndarray) -> float:
        cfg = self.config
        bp, bl = theta[0], theta[1]
        shift = bp * self.design.phon_mean + bl * self.design.line_mean
        mu = theta[self.i_mu] - shift  # original-basis mu_alpha
        log_sigma = theta[self.i_ls]
        sigma = math.exp(log_sigma)
        a_shift = theta[2:2 + self.n_corpora] - theta[self.i_mu]
        lp = -(bp * bp + bl * bl) / (2.0 * cfg.prior_beta_sd ** 2)
        lp += -(mu * mu) / (2.0 * cfg.prior_mu_alpha_sd ** 2)
        # alpha_c - mu_alpha is basis-invariant: both shift identically
        lp += (-self.n_corpora * log_sigma
               - float(a_shift @ a_shift) / (2.0 * sigma * sigma))
        # half-normal scale prior plus the log-transform Jacobian
        lp += -(sigma * sigma) / (2.0 * cfg.prior_sigma_alpha_scale ** 2) + log_sigma
        return lp


def _run_chain(design: _Design, config: LogitModelConfig, chain_index: int
               ) -> tuple[np.ndarray, dict[str, float]]:
    """Returns (kept draws in the ORIGINAL basis, acceptance rates)."""
    rng = np.random.default_rng(
        np.random.SeedSequence([config.seed, chain_index]))
    state = _ChainState(design, config)
    dim = state.theta.size
    steps = np.full(dim, 0.2)
    accepts = np.zeros(dim)
    proposals = np.zeros(dim)
    batch_accepts = np.zeros(dim)
    batch_size = 25
    kept = np.empty((config.draws - config.warmup, dim))
    log_prior = state.log_prior(state.theta)
    ll_total = float(state.ll_rows.sum())

    for it in range(config.draws):
        noise = rng.standard_normal(dim)
        uniforms = rng.random(dim)
        for k in range(dim):
            proposal = state.theta.copy()
            proposal[k] += steps[k] * noise[k]
            new_prior = state.log_prior(proposal)
            if k == 0 or k == 1:
                delta = proposal[k] - state.theta[k]
                x = state.phon_c if k == 0 else state.line_c
                new_eta = state.eta + delta * x
                new_rows = state._row_loglik(new_eta)
                new_ll = float(new_rows.sum())
            elif 2 <= k < 2 + state.n_corpora:
                idx = design.rows_by_corpus[k - 2]
                delta = proposal[k] - state.theta[k]
                new_eta_slice = state.eta[idx] + delta
                new_rows_slice = (design.y[idx] * new_eta_slice
                                  - np.logaddexp(0.0, new_eta_slice))
                new_ll = ll_total + float(
                    new_rows_slice.sum() - state.ll_rows[idx].sum())
            else:
                new_ll = ll_total  # mu' and log_sigma do not enter eta
            log_ratio = (new_ll + new_prior) - (ll_total + log_prior)
            proposals[k] += 1
            if math.log(uniforms[k]) < log_ratio:
                accepts[k] += 1
                batch_accepts[k] += 1
                state.theta = proposal
                log_prior = new_prior
                ll_total = new_ll
                if k == 0 or k == 1:
                    state.eta = new_eta
                    state.ll_rows = new_rows
                elif 2 <= k < 2 + state.n_corpora:
                    state.eta[idx] = new_eta_slice
                    state.ll_rows[idx] = new_rows_slice
        if it < config.warmup:
            if (it + 1) % batch_size == 0:
                rates = batch_accepts / batch_size
                gamma = min(0.5, 2.0 / math.sqrt((it + 1) / batch_size))
                steps *= np.exp(gamma * (rates - 0.44))
                steps = np.clip(steps, 1e-4, 10.0)
                batch_accepts[:] = 0.0
        else:
            kept[it - config.warmup] = state.theta

    # back to the original basis: subtract the shift from intercept terms
    shift = (kept[:, 0] * design.phon_mean + kept[:, 1] * design.line_mean)
    out = kept.copy()
    out[:, 2:2 + state.n_corpora] -= shift[:, None]
    out[:, state.i_mu] -= shift
    out[:, state.i_ls] = np.exp(out[:, state.i_ls])  # report sigma itself
    names = _parameter_names(design)
    rates = {names[k]: float(accepts[k] / proposals[k]) for k in range(dim)}
    return out, rates


def _parameter_names(design: _Design) -> list[str]:
    return (["beta_phon", "beta_line"]
            + [f"alpha_{c}" for c in design.corpora]
            + ["mu_alpha", "sigma_alpha"])


def fit_hierarchical_logit(rows: Sequence[AgreementRow],
                           config: LogitModelConfig = LogitModelConfig()
                           ) -> PosteriorSummary:
    """Fit the partial-pooling logistic model; deterministic under seed."""
    design = _build_design(rows)
    names = _parameter_names(design)
    all_draws = []
    rate_sums: dict[str, float] = {n: 0.0 for n in names}
    for chain in range(config.chains):
        draws, rates = _run_chain(design, config, chain)
        all_draws.append(draws)
        for name, rate in rates.items():
            rate_sums[name] += rate
    stacked = np.stack(all_draws)  # (chains, kept, dim)

    parameters: dict[str, ParameterSummary] = {}
    warnings: list[str] = []
    for k, name in enumerate(names):
        per_chain = stacked[:, :, k]
        flat = per_chain.reshape(-1)
        low, high = hdi(flat, config.hdi_mass)
        rhat = _split_rhat(per_chain)
        ess = _ess(per_chain)
        parameters[name] = ParameterSummary(
            mean=float(flat.mean()), sd=float(flat.std(ddof=1)),
            hdi_low=low, hdi_high=high, rhat=rhat, ess=ess)
        if rhat > RHAT_WARN:
            warnings.append(f"{name}: split R-hat {rhat:.3f} > {RHAT_WARN}")
    acceptance = {n: rate_sums[n] / config.chains for n in names}
    return PosteriorSummary(
        parameters=parameters,
        hdi_mass=config.hdi_mass,
        acceptance_rates=acceptance,
        warnings=tuple(warnings),
        metadata={
            "phon_mean": design.phon_mean,
            "line_mean": design.line_mean,
            "n_rows": float(design.y.size),
            "n_corpora": float(len(design.corpora)),
        },
    )


SUMMARY_CSV_HEADER = ["parameter", "mean", "sd", "hdi_low", "hdi_high",
                      "rhat", "ess"]


def write_summary_csv(summary: PosteriorSummary, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_CSV_HEADER)
        for name, p in summary.parameters.items():
            writer.writerow([name, f"{p.mean:.6f}", f"{p.sd:.6f}",
                             f"{p.hdi_low:.6f}", f"{p.hdi_high:.6f}",
                             f"{p.rhat:.4f}", f"{p.ess:.1f}"])


def read_summary_csv(path: str | Path) -> dict[str, ParameterSummary]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SUMMARY_CSV_HEADER:
            raise SchemaError(f"{path}: expected header {SUMMARY_CSV_HEADER}, "
                              f"got {header}")
        out = {}
        for record in reader:
            if not record:
                continue
            out[record[0]] = ParameterSummary(
                mean=float(record[1]), sd=float(record[2]),
                hdi_low=float(record[3]), hdi_high=float(record[4]),
                rhat=float(record[5]), ess=float(record[6]))
    return out
