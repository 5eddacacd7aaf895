"""Reference-group comparison and manipulation flagging.

A target stock is compared against the mean features of its reference
stocks: the non-manipulated stocks sharing its capitalization bucket and
industry sector.  Manipulation signatures are an elevated power-law tail
lower bound (per fitted statistic), an elevated average degree, and a
return/seller-buyer-ratio correlation below threshold.  Flags combine by a
configurable flag-fraction vote (majority by default), which tolerates a
single dissenting feature.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .features import StockFeatures, compute_features
from .ingest import StockMeta, TransactionLog, filter_period
from .powerlaw import GofConfig

XMIN_FEATURES = (
    "degree_in_xmin",
    "degree_out_xmin",
    "strength_in_xmin",
    "strength_out_xmin",
    "strength_total_xmin",
)
FEATURE_KEYS = XMIN_FEATURES + ("avg_degree", "return_ratio_corr")


@dataclass(frozen=True)
class DetectorConfig:
    """Thresholds of the flag vote.

    elevation_factor encodes "materially larger than the reference": at 1.0
    sampling noise alone flags about half of all honest stocks per feature,
    so the default demands a 25% margin, which manipulated stocks (typically
    2x and more) clear easily.
    """

    corr_threshold: float = 0.2
    elevation_factor: float = 1.25
    decision_threshold: float = 0.5

    def to_dict(self) -> dict:
        return {
            "corr_threshold": self.corr_threshold,
            "elevation_factor": self.elevation_factor,
            "decision_threshold": self.decision_threshold,
        }


@dataclass(frozen=True)
class ReferenceGroup:
    """Reference stocks of one target (same bucket and sector, not labeled
    manipulated, never the target itself)."""

    target: str
    members: tuple[str, ...]


@dataclass(frozen=True)
class ReferenceValues:
    """Per-feature means over the group; counts say how many members
    actually carried each feature (missing values excluded pairwise)."""

    means: dict[str, float | None]
    counts: dict[str, int]


@dataclass(frozen=True)
class ManipulationReport:
    """Flag vote outcome for one stock."""

    symbol: str
    flags: dict[str, bool | None]
    score: float
    verdict: bool
    thresholds: DetectorConfig
    target_values: dict[str, float | None] = field(default_factory=dict)
    reference_values: dict[str, float | None] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "symbol": self.symbol,
            "flags": dict(self.flags),
            "score": self.score,
            "verdict": self.verdict,
            "thresholds": self.thresholds.to_dict(),
            "target_values": dict(self.target_values),
            "reference_values": dict(self.reference_values),
        }


def feature_vector(features: StockFeatures) -> dict[str, float | None]:
    """Flatten StockFeatures to the scalar features the detector compares."""
    def xmin(fit):
        return float(fit.x_min) if fit is not None else None

    return {
        "degree_in_xmin": xmin(features.degree_fits.get("in")),
        "degree_out_xmin": xmin(features.degree_fits.get("out")),
        "strength_in_xmin": xmin(features.strength_fits.get("in")),
        "strength_out_xmin": xmin(features.strength_fits.get("out")),
        "strength_total_xmin": xmin(features.strength_fits.get("total")),
        "avg_degree": features.avg_degree,
        "return_ratio_corr": features.return_ratio_corr,
    }


def select_reference(target: StockMeta, universe: Mapping[str, StockMeta] | list[StockMeta]) -> ReferenceGroup:
    """Non-manipulated stocks matching the target's bucket and sector."""
    metas = list(universe.values()) if isinstance(universe, Mapping) else list(universe)
    members = sorted(
        m.symbol for m in metas
        if m.symbol != target.symbol
        and not m.manipulated
        and m.capitalization_bucket == target.capitalization_bucket
        and m.sector == target.sector)
    if not members:
        raise ValueError(
            f"no reference stocks for {target.symbol} "
            f"(bucket={target.capitalization_bucket!r}, sector={target.sector!r}); "
            "consider a coarser capitalization bucketing")
    return ReferenceGroup(target=target.symbol, members=tuple(members))


def reference_values(group: ReferenceGroup,
                     features: Mapping[str, StockFeatures]) -> ReferenceValues:
    """Arithmetic per-feature mean over the group members."""
    missing = [s for s in group.members if s not in features]
    if missing:
        raise ValueError(f"features missing for reference members: {missing}")
    means: dict[str, float | None] = {}
    counts: dict[str, int] = {}
    vectors = [feature_vector(features[s]) for s in group.members]
    for key in FEATURE_KEYS:
        vals = [v[key] for v in vectors if v[key] is not None]
        counts[key] = len(vals)
        means[key] = sum(vals) / len(vals) if vals else None
    if all(v is None for v in means.values()):
        raise ValueError(f"every feature missing across reference group of {group.target}")
    return ReferenceValues(means=means, counts=counts)


def evaluate(target_features: StockFeatures, reference: ReferenceValues | Mapping[str, float | None],
             cfg: DetectorConfig | None = None, *, symbol: str | None = None) -> ManipulationReport:
    """Flag the manipulated-direction deviations and take the vote.

    A feature missing on either side leaves its flag None and shrinks the
    vote denominator; score is flagged/evaluated and the verdict compares it
    against the decision threshold.
    """
    cfg = cfg or DetectorConfig()
    ref_means = reference.means if isinstance(reference, ReferenceValues) else dict(reference)
    target = feature_vector(target_features)

    flags: dict[str, bool | None] = {}
    corr = target["return_ratio_corr"]
    flags["corr_below_threshold"] = None if corr is None else bool(corr < cfg.corr_threshold)
    for key in XMIN_FEATURES + ("avg_degree",):
        t_val = target[key]
        r_val = ref_means.get(key)
        flag_name = "avg_degree_elevated" if key == "avg_degree" else f"{key}_elevated"
        if t_val is None or r_val is None:
            flags[flag_name] = None
        else:
            flags[flag_name] = bool(t_val > cfg.elevation_factor * r_val)

    evaluated = [v for v in flags.values() if v is not None]
    score = (sum(evaluated) / len(evaluated)) if evaluated else 0.0
    return ManipulationReport(
        symbol=symbol or target_features.symbol,
        flags=flags,
        score=score,
        verdict=bool(evaluated) and score >= cfg.decision_threshold,
        thresholds=cfg,
        target_values=target,
        reference_values={k: ref_means.get(k) for k in FEATURE_KEYS},
    )


def detect_corpus(logs: Mapping[str, TransactionLog],
                  gof_cfg: GofConfig | None = None,
                  det_cfg: DetectorConfig | None = None, *,
                  with_pvalue: bool = False) -> list[ManipulationReport]:
    """Run the full comparison over a corpus of per-stock logs.

    Labeled manipulated stocks are analyzed over their declared manipulation
    window, and their reference stocks are re-featurized over the same
    window; unlabeled stocks use their full period.  Returns one report per
    stock, sorted by symbol.
    """
    gof_cfg = gof_cfg or GofConfig()
    det_cfg = det_cfg or DetectorConfig()
    metas = {sym: log.meta for sym, log in logs.items()}

    cache: dict[tuple[str, tuple | None], StockFeatures] = {}

    def features_for(symbol: str, window) -> StockFeatures:
        key = (symbol, window)
        if key not in cache:
            log = logs[symbol]
            if window is not None:
                log = filter_period(log, window)
            cache[key] = compute_features(log, gof_cfg, with_pvalue=with_pvalue)
        return cache[key]

    reports = []
    for symbol in sorted(logs):
        meta = metas[symbol]
        window = meta.manipulation_period if meta.manipulated else None
        group = select_reference(meta, metas)
        target_feats = features_for(symbol, window)
        member_feats = {s: features_for(s, window) for s in group.members}
        ref = reference_values(group, member_feats)
        reports.append(evaluate(target_feats, ref, det_cfg, symbol=symbol))
    return reports
