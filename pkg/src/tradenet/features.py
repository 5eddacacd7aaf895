"""Daily price/trader-count series and per-stock detection features.

The feature set mirrors what separates manipulated from honest stocks:
power-law tail lower bounds of the degree and strength distributions, the
network's average degree, and the correlation between the daily log price
return and the seller-buyer ratio r(t) = N_s(t) / N_b(t).
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

import numpy as np

from .ingest import TransactionLog
from .network import average_degree, build_network, degree_sequences, strength_sequences
from .powerlaw import GofConfig, TailFit, fit_tail

# Distinct strength values can approach the node count; a geometric grid of
# this many lower-bound candidates keeps the scan cheap without visibly
# moving the KS minimum.
STRENGTH_XMIN_CANDIDATES = 160


class UndefinedCorrelationError(ValueError):
    """Correlation is undefined (constant input or too few points)."""


@dataclass(frozen=True, eq=False)
class DailySeries:
    """Per-trading-day aggregates; days with no trades are absent."""

    days: tuple[dt.date, ...]
    avg_price: np.ndarray
    n_sellers: np.ndarray
    n_buyers: np.ndarray

    @property
    def n_days(self) -> int:
        return len(self.days)


@dataclass(frozen=True)
class StockFeatures:
    """Detection features of one stock over one analysis window.

    Tail fits or the correlation may be None when a component could not be
    computed (tiny tails, constant series); consumers treat None as missing.
    """

    symbol: str
    degree_fits: dict[str, TailFit | None]
    strength_fits: dict[str, TailFit | None]
    avg_degree: float
    return_ratio_corr: float | None
    n_days: int

    def to_dict(self) -> dict:
        return {
            "symbol": self.symbol,
            "n_days": self.n_days,
            "avg_degree": self.avg_degree,
            "return_ratio_corr": self.return_ratio_corr,
            "degree_fits": {k: (f.to_dict() if f else None)
                            for k, f in self.degree_fits.items()},
            "strength_fits": {k: (f.to_dict() if f else None)
                              for k, f in self.strength_fits.items()},
        }


def daily_series(log: TransactionLog, *, weighted: bool = True) -> DailySeries:
    """Daily average price and distinct seller/buyer counts.

    P(t) is the volume-weighted mean trade price by default; pass
    weighted=False for the plain mean (sensitivity checks).
    """
    if log.n_records == 0:
        raise ValueError("empty log has no daily series")
    day_vals, day_idx = np.unique(log.dates, return_inverse=True)
    n_days = day_vals.size
    vol = log.volumes.astype(np.float64)
    if weighted:
        price_sum = np.bincount(day_idx, weights=vol * log.prices, minlength=n_days)
        denom = np.bincount(day_idx, weights=vol, minlength=n_days)
    else:
        price_sum = np.bincount(day_idx, weights=log.prices, minlength=n_days)
        denom = np.bincount(day_idx, minlength=n_days).astype(np.float64)
    avg_price = price_sum / denom

    k = len(log.accounts)
    sell_pairs = np.unique(day_idx * k + log.sellers)
    buy_pairs = np.unique(day_idx * k + log.buyers)
    n_sellers = np.bincount(sell_pairs // k, minlength=n_days)
    n_buyers = np.bincount(buy_pairs // k, minlength=n_days)

    days = tuple(dt.date.fromordinal(int(d)) for d in day_vals)
    return DailySeries(days=days, avg_price=avg_price,
                       n_sellers=n_sellers, n_buyers=n_buyers)


def log_returns(series: DailySeries) -> np.ndarray:
    """pr(t) = ln P(t) - ln P(t-1) over consecutive trading days."""
    if series.n_days < 2:
        raise ValueError("need at least 2 trading days for returns")
    if np.any(series.avg_price <= 0):
        raise ValueError("prices must be positive")
    logp = np.log(series.avg_price)
    return np.diff(logp)


def seller_buyer_ratio(series: DailySeries) -> np.ndarray:
    """r(t) = N_s(t) / N_b(t) per trading day."""
    return series.n_sellers / series.n_buyers


def pearson_corr(x, y) -> float:
    """Pearson product-moment correlation with explicit degeneracy errors."""
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != ya.shape:
        raise ValueError(f"length mismatch: {xa.shape} vs {ya.shape}")
    if xa.size < 3:
        raise ValueError("need at least 3 points")
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    sx = float(np.sqrt((dx * dx).sum()))
    sy = float(np.sqrt((dy * dy).sum()))
    if sx == 0.0 or sy == 0.0:
        raise UndefinedCorrelationError("correlation undefined for constant series")
    r = float((dx * dy).sum() / (sx * sy))
    return min(1.0, max(-1.0, r))


def return_ratio_correlation(series: DailySeries, *, lag: int = 0,
                             log_ratio: bool = False) -> float:
    """Correlation of pr(t) with r(t - lag), same-day pairing by default.

    log_ratio swaps r for ln r (exploration switch; raw r is the default).
    """
    pr = log_returns(series)
    ratio = seller_buyer_ratio(series)
    if log_ratio:
        ratio = np.log(ratio)
    n = series.n_days
    t = np.arange(1, n)
    valid = (t - lag >= 0) & (t - lag < n)
    if valid.sum() < 3:
        raise ValueError("too few aligned days for the chosen lag")
    return pearson_corr(pr[t[valid] - 1], ratio[t[valid] - lag])


def _try_fit(samples, cfg: GofConfig, with_pvalue: bool,
             max_candidates: int | None) -> TailFit | None:
    try:
        return fit_tail(samples, cfg, with_pvalue=with_pvalue,
                        max_candidates=max_candidates)
    except ValueError:
        return None


def compute_features(log: TransactionLog, cfg: GofConfig | None = None, *,
                     with_pvalue: bool = True, corr_lag: int = 0,
                     log_ratio: bool = False,
                     weighted_price: bool = True) -> StockFeatures:
    """Assemble the full per-stock feature vector.

    Component failures (degenerate tails, constant series, too few days)
    leave the corresponding feature as None instead of aborting the stock.
    """
    cfg = cfg or GofConfig()
    net = build_network(log)
    deg = degree_sequences(net)
    stren = strength_sequences(net)

    degree_fits = {
        "in": _try_fit(deg.in_deg[deg.in_deg > 0], cfg, with_pvalue, None),
        "out": _try_fit(deg.out_deg[deg.out_deg > 0], cfg, with_pvalue, None),
    }
    strength_fits = {
        "in": _try_fit(stren.s_in[stren.s_in > 0], cfg, with_pvalue,
                       STRENGTH_XMIN_CANDIDATES),
        "out": _try_fit(stren.s_out[stren.s_out > 0], cfg, with_pvalue,
                        STRENGTH_XMIN_CANDIDATES),
        "total": _try_fit(stren.s_tot, cfg, with_pvalue,
                          STRENGTH_XMIN_CANDIDATES),
    }

    series = daily_series(log, weighted=weighted_price)
    corr: float | None
    try:
        corr = return_ratio_correlation(series, lag=corr_lag, log_ratio=log_ratio)
    except ValueError:
        corr = None

    return StockFeatures(symbol=log.meta.symbol, degree_fits=degree_fits,
                         strength_fits=strength_fits,
                         avg_degree=average_degree(net),
                         return_ratio_corr=corr, n_days=series.n_days)
