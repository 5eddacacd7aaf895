"""Transaction-log ingestion: CSV parsing, validation, and period filtering.

One stock's executed trades live in one UTF-8 CSV with the fixed header
``date,time,txn_id,buyer_id,seller_id,volume,price`` plus a JSON sidecar
carrying the stock metadata.  Parsed logs are immutable, columnar (numpy
arrays) for bulk work, and expose a record view for element access.

Account identifiers are opaque strings mapped to dense integer indices in a
canonical order (first appearance, buyer before seller, over the sorted
record sequence), so two logs with the same trades compare equal no matter
how their source files were ordered.
"""

from __future__ import annotations

import datetime as dt
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

CSV_HEADER = ("date", "time", "txn_id", "buyer_id", "seller_id", "volume", "price")


class TransactionParseError(ValueError):
    """Malformed input; carries the 1-based line number of the offender."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class StockMeta:
    """Per-stock attributes used for reference matching and ground truth."""

    symbol: str
    capitalization_bucket: str
    sector: str
    manipulated: bool = False
    manipulation_period: tuple[dt.date, dt.date] | None = None

    def __post_init__(self) -> None:
        if self.manipulated != (self.manipulation_period is not None):
            raise ValueError(
                "manipulation_period must be present iff manipulated is true")
        if self.manipulation_period is not None:
            start, end = self.manipulation_period
            if start > end:
                raise ValueError("manipulation_period start must be <= end")

    def to_dict(self) -> dict:
        period = None
        if self.manipulation_period is not None:
            period = [d.isoformat() for d in self.manipulation_period]
        return {
            "symbol": self.symbol,
            "capitalization_bucket": self.capitalization_bucket,
            "sector": self.sector,
            "manipulated": self.manipulated,
            "manipulation_period": period,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StockMeta":
        period = d.get("manipulation_period")
        if period is not None:
            period = (dt.date.fromisoformat(period[0]), dt.date.fromisoformat(period[1]))
        return cls(
            symbol=d["symbol"],
            capitalization_bucket=d["capitalization_bucket"],
            sector=d["sector"],
            manipulated=bool(d["manipulated"]),
            manipulation_period=period,
        )


@dataclass(frozen=True)
class TransactionRecord:
    """One executed trade.  ``buyer``/``seller`` are dense account indices;
    the owning log's ``accounts`` tuple resolves them to the original ids."""

    date: dt.date
    time: dt.time
    txn_id: str
    buyer: int
    seller: int
    volume: int
    price: float


class _RecordsView:
    """Sequence view materializing TransactionRecord objects on demand."""

    def __init__(self, log: "TransactionLog"):
        self._log = log

    def __len__(self) -> int:
        return self._log.n_records

    def __getitem__(self, i) -> TransactionRecord:
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        log = self._log
        if i < 0:
            i += len(self)
        sec = int(log.times[i])
        return TransactionRecord(
            date=dt.date.fromordinal(int(log.dates[i])),
            time=dt.time(sec // 3600, sec % 3600 // 60, sec % 60),
            txn_id=str(log.txn_ids[i]),
            buyer=int(log.buyers[i]),
            seller=int(log.sellers[i]),
            volume=int(log.volumes[i]),
            price=float(log.prices[i]),
        )

    def __iter__(self) -> Iterator[TransactionRecord]:
        for i in range(len(self)):
            yield self[i]


@dataclass(frozen=True, eq=False)
class TransactionLog:
    """Immutable, sorted transaction sequence of one stock.

    Columns are parallel numpy arrays sorted by (date, time, txn_id); dates
    are proleptic ordinals, times seconds since midnight.
    """

    meta: StockMeta
    dates: np.ndarray
    times: np.ndarray
    txn_ids: np.ndarray
    buyers: np.ndarray
    sellers: np.ndarray
    volumes: np.ndarray
    prices: np.ndarray
    accounts: tuple[str, ...]

    @property
    def n_records(self) -> int:
        return self.dates.size

    @property
    def records(self) -> _RecordsView:
        return _RecordsView(self)

    def total_volume(self) -> int:
        return int(self.volumes.sum())

    def date_range(self) -> tuple[dt.date, dt.date]:
        if self.n_records == 0:
            raise ValueError("empty log has no date range")
        return (dt.date.fromordinal(int(self.dates[0])),
                dt.date.fromordinal(int(self.dates[-1])))

    def __eq__(self, other) -> bool:
        if not isinstance(other, TransactionLog):
            return NotImplemented
        return (self.meta == other.meta
                and self.accounts == other.accounts
                and np.array_equal(self.dates, other.dates)
                and np.array_equal(self.times, other.times)
                and np.array_equal(self.txn_ids, other.txn_ids)
                and np.array_equal(self.buyers, other.buyers)
                and np.array_equal(self.sellers, other.sellers)
                and np.array_equal(self.volumes, other.volumes)
                and np.array_equal(self.prices, other.prices))


def _canonicalize(meta: StockMeta, dates, times, txn_ids, buyer_ids, seller_ids,
                  volumes, prices) -> TransactionLog:
    """Sort by (date, time, txn_id) and assign dense account indices in
    first-appearance order (buyer before seller) over the sorted sequence."""
    dates = np.asarray(dates, dtype=np.int64)
    times = np.asarray(times, dtype=np.int64)
    txn_ids = np.asarray(txn_ids, dtype=np.str_)
    volumes = np.asarray(volumes, dtype=np.int64)
    prices = np.asarray(prices, dtype=np.float64)
    buyer_ids = np.asarray(buyer_ids, dtype=np.str_)
    seller_ids = np.asarray(seller_ids, dtype=np.str_)

    order = np.lexsort((txn_ids, times, dates))
    dates, times, txn_ids = dates[order], times[order], txn_ids[order]
    volumes, prices = volumes[order], prices[order]
    buyer_ids, seller_ids = buyer_ids[order], seller_ids[order]

    n = dates.size
    if buyer_ids.dtype != seller_ids.dtype:
        width = max(buyer_ids.dtype.itemsize, seller_ids.dtype.itemsize) // 4
        buyer_ids = buyer_ids.astype(f"U{width}")
        seller_ids = seller_ids.astype(f"U{width}")
    interleaved = np.empty(2 * n, dtype=buyer_ids.dtype)
    interleaved[0::2] = buyer_ids
    interleaved[1::2] = seller_ids
    uniq, first_pos, inverse = np.unique(interleaved, return_index=True,
                                         return_inverse=True)
    appearance = np.argsort(first_pos)
    rank = np.argsort(appearance)  # uniq index -> dense appearance index
    accounts = tuple(str(a) for a in uniq[appearance])
    buyers = rank[inverse[0::2]].astype(np.int64)
    sellers = rank[inverse[1::2]].astype(np.int64)

    return TransactionLog(meta=meta, dates=dates, times=times, txn_ids=txn_ids,
                          buyers=buyers, sellers=sellers, volumes=volumes,
                          prices=prices, accounts=accounts)


def build_log(meta: StockMeta, dates, times, txn_ids, buyer_ids, seller_ids,
              volumes, prices) -> TransactionLog:
    """Assemble a log from parallel columns with string account ids.

    Dates are proleptic ordinals, times seconds since midnight.  The result
    is sorted and account-canonicalized exactly like a parsed file, so
    in-memory construction and CSV round-trips agree bit for bit.
    """
    return _canonicalize(meta, dates, times, txn_ids, buyer_ids, seller_ids,
                         volumes, prices)


def _parse_time(text: str) -> int:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"time {text!r} is not HH:MM:SS")
    h, m, s = (int(p) for p in parts)
    if not (0 <= h < 24 and 0 <= m < 60 and 0 <= s < 60):
        raise ValueError(f"time {text!r} out of range")
    return h * 3600 + m * 60 + s


def _open_text(source) -> io.TextIOBase:
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8", newline="")
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    if isinstance(source, io.TextIOBase):
        return source
    # binary stream
    return io.TextIOWrapper(source, encoding="utf-8", newline="")


def parse_transactions(source, meta: StockMeta) -> TransactionLog:
    """Parse one stock's transaction CSV into a sorted, validated log.

    ``source`` may be a path, bytes, or an open text/binary stream.  Every
    malformed line raises TransactionParseError with its line number; no
    record is dropped silently.
    """
    stream = _open_text(source)
    header = stream.readline().rstrip("\r\n")
    if tuple(header.split(",")) != CSV_HEADER:
        raise TransactionParseError(1, f"bad header {header!r}; "
                                       f"expected {','.join(CSV_HEADER)}")

    dates, times, txn_ids = [], [], []
    buyer_ids, seller_ids, volumes, prices = [], [], [], []
    seen: set[tuple[int, str]] = set()
    date_cache: dict[str, int] = {}

    for lineno, line in enumerate(stream, start=2):
        line = line.rstrip("\r\n")
        if not line:
            continue
        fields = line.split(",")
        if len(fields) != 7:
            raise TransactionParseError(lineno, f"expected 7 fields, got {len(fields)}")
        d_s, t_s, txn, buyer, seller, vol_s, price_s = fields
        try:
            ordinal = date_cache.get(d_s)
            if ordinal is None:
                ordinal = dt.date.fromisoformat(d_s).toordinal()
                date_cache[d_s] = ordinal
            seconds = _parse_time(t_s)
        except ValueError as exc:
            raise TransactionParseError(lineno, f"unparseable timestamp: {exc}") from exc
        try:
            volume = int(vol_s)
        except ValueError as exc:
            raise TransactionParseError(lineno, f"bad volume {vol_s!r}") from exc
        if volume < 1:
            raise TransactionParseError(lineno, f"volume must be >= 1, got {volume}")
        try:
            price = float(price_s)
        except ValueError as exc:
            raise TransactionParseError(lineno, f"bad price {price_s!r}") from exc
        if not price > 0 or not np.isfinite(price):
            raise TransactionParseError(lineno, f"price must be > 0, got {price_s}")
        if not buyer or not seller or not txn:
            raise TransactionParseError(lineno, "empty identifier field")
        key = (ordinal, txn)
        if key in seen:
            raise TransactionParseError(lineno, f"duplicate (date, txn_id) = ({d_s}, {txn})")
        seen.add(key)

        dates.append(ordinal)
        times.append(seconds)
        txn_ids.append(txn)
        buyer_ids.append(buyer)
        seller_ids.append(seller)
        volumes.append(volume)
        prices.append(price)

    if not dates:
        return TransactionLog(meta=meta, dates=np.empty(0, np.int64),
                              times=np.empty(0, np.int64),
                              txn_ids=np.empty(0, np.str_),
                              buyers=np.empty(0, np.int64),
                              sellers=np.empty(0, np.int64),
                              volumes=np.empty(0, np.int64),
                              prices=np.empty(0, np.float64), accounts=())
    return _canonicalize(meta, dates, times, txn_ids, buyer_ids, seller_ids,
                         volumes, prices)


def write_transactions(log: TransactionLog, dest) -> None:
    """Serialize a log back to the CSV format (inverse of parse_transactions)."""
    own = isinstance(dest, (str, Path))
    stream = open(dest, "w", encoding="utf-8", newline="") if own else dest
    try:
        stream.write(",".join(CSV_HEADER) + "\n")
        date_cache: dict[int, str] = {}
        time_cache: dict[int, str] = {}
        for i in range(log.n_records):
            d = int(log.dates[i])
            d_s = date_cache.get(d)
            if d_s is None:
                d_s = dt.date.fromordinal(d).isoformat()
                date_cache[d] = d_s
            t = int(log.times[i])
            t_s = time_cache.get(t)
            if t_s is None:
                t_s = f"{t // 3600:02d}:{t % 3600 // 60:02d}:{t % 60:02d}"
                time_cache[t] = t_s
            stream.write(f"{d_s},{t_s},{log.txn_ids[i]},"
                         f"{log.accounts[log.buyers[i]]},{log.accounts[log.sellers[i]]},"
                         f"{log.volumes[i]},{float(log.prices[i])!r}\n")
    finally:
        if own:
            stream.close()


def read_stock_meta(source) -> StockMeta:
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            return StockMeta.from_dict(json.load(fh))
    return StockMeta.from_dict(json.load(source))


def write_stock_meta(meta: StockMeta, dest) -> None:
    payload = json.dumps(meta.to_dict(), indent=2, sort_keys=True) + "\n"
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(payload)
    else:
        dest.write(payload)


def filter_period(log: TransactionLog, interval: tuple[dt.date, dt.date]) -> TransactionLog:
    """Restrict a log to records with start <= date <= end (order preserved).

    An empty result is legal; downstream stages decide whether that is fatal.
    """
    start, end = interval
    if start > end:
        raise ValueError(f"interval start {start} after end {end}")
    mask = (log.dates >= start.toordinal()) & (log.dates <= end.toordinal())
    if mask.all():
        return log
    if not mask.any():
        return TransactionLog(meta=log.meta, dates=np.empty(0, np.int64),
                              times=np.empty(0, np.int64),
                              txn_ids=np.empty(0, np.str_),
                              buyers=np.empty(0, np.int64),
                              sellers=np.empty(0, np.int64),
                              volumes=np.empty(0, np.int64),
                              prices=np.empty(0, np.float64), accounts=())
    buyer_ids = np.asarray(log.accounts, dtype=np.str_)[log.buyers[mask]]
    seller_ids = np.asarray(log.accounts, dtype=np.str_)[log.sellers[mask]]
    return _canonicalize(log.meta, log.dates[mask], log.times[mask],
                         log.txn_ids[mask], buyer_ids, seller_ids,
                         log.volumes[mask], log.prices[mask])


def load_stock(csv_path, meta_path=None) -> TransactionLog:
    """Load one stock from SYMBOL.csv plus its SYMBOL.json sidecar."""
    csv_path = Path(csv_path)
    if meta_path is None:
        meta_path = csv_path.with_suffix(".json")
    meta = read_stock_meta(meta_path)
    return parse_transactions(csv_path, meta)


def load_corpus(directory) -> dict[str, TransactionLog]:
    """Load every SYMBOL.csv/SYMBOL.json pair under a corpus directory."""
    directory = Path(directory)
    logs: dict[str, TransactionLog] = {}
    for csv_path in sorted(directory.glob("*.csv")):
        if not csv_path.with_suffix(".json").exists():
            continue
        log = load_stock(csv_path)
        logs[log.meta.symbol] = log
    if not logs:
        raise FileNotFoundError(f"no stock CSV/JSON pairs found under {directory}")
    return logs
