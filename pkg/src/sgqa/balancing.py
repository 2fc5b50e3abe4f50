"""Answer-distribution smoothing, rejection sampling, deduplication and splits.

Smoothing works on the ratios r_i = c_{i+1}/c_i of a descending answer
distribution.  Raising any r_i moves mass from the answers before it to
the answers after it, which lowers every head/tail ratio at once.  Walking
from the most to the least frequent answer, each r_i is raised to the
smallest value that satisfies the head/tail bound for every prefix seen so
far and keeps the remaining prefixes satisfiable; the head is then scaled
down so no answer's target exceeds its current count.
"""

from __future__ import annotations

import hashlib
import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .program import Step, parse_program

log = logging.getLogger(__name__)

SPLITS = ("train", "val", "test", "challenge")
_TOL = 1e-12


@dataclass(frozen=True)
class BalanceConfig:
    b: float = 1.3
    r_min: float = 0.2
    r_max: float = 0.85
    type_shares: Mapping[str, float] = field(default_factory=dict)
    split_shares: tuple[float, ...] = (0.7, 0.1, 0.1, 0.1)
    seed: int = 0

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError(f"b must be positive, got {self.b}")
        if not 0 < self.r_min <= self.r_max <= 1:
            raise ValueError(f"need 0 < rMin <= rMax <= 1, got {self.r_min}, {self.r_max}")
        if len(self.split_shares) != len(SPLITS):
            raise ValueError(f"splitShares needs {len(SPLITS)} entries")
        if any(s < 0 for s in self.split_shares) or abs(sum(self.split_shares) - 1) > 1e-9:
            raise ValueError(f"splitShares must be non-negative and sum to 1, got {self.split_shares}")
        if any(s < 0 for s in self.type_shares.values()):
            raise ValueError("typeShares must be non-negative")

    @classmethod
    def from_dict(cls, d: Mapping) -> "BalanceConfig":
        known = {"b", "rMin", "rMax", "typeShares", "splitShares", "seed"}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown balance settings: {sorted(unknown)}")
        return cls(
            b=float(d.get("b", 1.3)),
            r_min=float(d.get("rMin", 0.2)),
            r_max=float(d.get("rMax", 0.85)),
            type_shares=dict(d.get("typeShares", {})),
            split_shares=tuple(d.get("splitShares", (0.7, 0.1, 0.1, 0.1))),
            seed=int(d.get("seed", 0)),
        )


@dataclass(frozen=True)
class AnswerDistribution:
    group: str
    entries: tuple[tuple[str, float], ...]
    feasible: bool = True

    @classmethod
    def from_counts(cls, group: str, counts: Mapping[str, float]) -> "AnswerDistribution":
        items = sorted(((a, float(c)) for a, c in counts.items() if c > 0), key=lambda x: (-x[1], x[0]))
        return cls(group, tuple(items))

    @property
    def answers(self) -> list[str]:
        return [a for a, _ in self.entries]

    @property
    def counts(self) -> list[float]:
        return [c for _, c in self.entries]

    def as_dict(self) -> dict[str, float]:
        return dict(self.entries)


def entropy(counts: Iterable[float]) -> float:
    """Shannon entropy in bits of an unnormalized count vector."""
    values = [c for c in counts if c > 0]
    total = sum(values)
    if total <= 0:
        return 0.0
    return -sum(c / total * math.log2(c / total) for c in values)


def head_tail_ratios(counts: Sequence[float]) -> list[float]:
    """head(i)/tail(i) for every prefix that leaves a non-empty tail."""
    total = sum(counts)
    out, head = [], 0.0
    for c in counts[:-1]:
        head += c
        tail = total - head
        out.append(math.inf if tail <= 0 else head / tail)
    return out


def _weights(ratios: Sequence[float]) -> list[float]:
    w = [1.0]
    for r in ratios:
        w.append(w[-1] * r)
    return w


def _prefix_ok(w: Sequence[float], b: float, upto: int | None = None) -> bool:
    total = sum(w)
    head = 0.0
    last = len(w) - 1 if upto is None else upto + 1
    for k in range(last):
        head += w[k]
        if head > b * (total - head) * (1 + _TOL):
            return False
    return True


def _min_ratio(ratios: list[float], i: int, lo: float, hi: float, b: float) -> float | None:
    """Smallest r_i in [lo, hi] keeping prefixes <= i satisfied and the rest satisfiable."""

    def ok(r: float) -> bool:
        trial = ratios[:i] + [r] + [hi] * (len(ratios) - i - 1)
        return _prefix_ok(_weights(trial), b)

    def ok_here(r: float) -> bool:
        return _prefix_ok(_weights(ratios[:i] + [r] + ratios[i + 1:]), b, upto=i) and ok(r)

    if not ok(hi):
        return None
    if ok_here(lo):
        return lo
    a, z = lo, hi
    for _ in range(200):
        mid = (a + z) / 2
        if ok_here(mid):
            z = mid
        else:
            a = mid
        if z - a <= 1e-15 * max(1.0, z):
            break
    return z


def smooth(dist: AnswerDistribution, cfg: BalanceConfig) -> AnswerDistribution:
    """Target counts bounding every head/tail ratio by ``b`` with clamped consecutive ratios.

    Targets never exceed the input counts.  When the bound cannot be met for
    this many answers under ``rMax`` the flattest allowed distribution is
    returned with ``feasible=False``.
    """
    counts = dist.counts
    if len(counts) < 2:
        return dist
    ratios = [min(max(counts[i + 1] / counts[i], cfg.r_min), cfg.r_max) for i in range(len(counts) - 1)]
    feasible = True
    for i in range(len(ratios)):
        r = _min_ratio(ratios, i, ratios[i], cfg.r_max, cfg.b)
        if r is None:
            feasible = False
            ratios[i:] = [cfg.r_max] * (len(ratios) - i)
            break
        ratios[i] = r
    w = _weights(ratios)
    scale = min(c / x for c, x in zip(counts, w))
    target = [scale * x for x in w]
    # guard against float drift above the input
    target = [min(t, c) for t, c in zip(target, counts)]
    if not feasible:
        log.debug("group %s: head/tail bound %.3g unreachable for %d answers with rMax=%.3g",
                  dist.group, cfg.b, len(counts), cfg.r_max)
    return AnswerDistribution(dist.group, tuple(zip(dist.answers, target)), feasible)


# --------------------------------------------------------------------------
# rejection sampling


def _uniform(seed: int, salt: str, key: str) -> float:
    digest = hashlib.sha256(f"{seed}:{salt}:{key}".encode()).digest()
    return int.from_bytes(digest[:8], "big") / 2**64


def _group_counts(records: Sequence[Mapping], level: str) -> dict[str, Counter]:
    groups: dict[str, Counter] = defaultdict(Counter)
    for r in records:
        groups[r["groups"][level]][r["answer"]] += 1
    return groups


@dataclass
class GroupReport:
    level: str
    group: str
    input: dict[str, int]
    target: dict[str, float]
    realized: dict[str, int]
    feasible: bool

    def to_record(self) -> dict:
        return {
            "level": self.level,
            "group": self.group,
            "input": self.input,
            "target": {a: round(c, 9) for a, c in self.target.items()},
            "realized": self.realized,
            "feasible": self.feasible,
            "entropy": {
                "input": round(entropy(self.input.values()), 9),
                "target": round(entropy(self.target.values()), 9),
                "realized": round(entropy(self.realized.values()), 9),
            },
        }


def rebalance_level(
    records: Sequence[Mapping], cfg: BalanceConfig, level: str
) -> tuple[list[Mapping], list[GroupReport]]:
    """Keep each record with probability target/current for its (group, answer)."""
    counts = _group_counts(records, level)
    keep_prob: dict[tuple[str, str], float] = {}
    targets: dict[str, AnswerDistribution] = {}
    for g in sorted(counts):
        target = smooth(AnswerDistribution.from_counts(g, counts[g]), cfg)
        targets[g] = target
        for a, t in target.entries:
            keep_prob[(g, a)] = min(1.0, t / counts[g][a])
    kept = [
        r for r in records
        if _uniform(cfg.seed, level, r["questionId"]) < keep_prob[(r["groups"][level], r["answer"])]
    ]
    realized = _group_counts(kept, level)
    reports = [
        GroupReport(level, g, dict(counts[g]), targets[g].as_dict(), dict(realized.get(g, {})), targets[g].feasible)
        for g in sorted(counts)
    ]
    return kept, reports


def rebalance(records: Sequence[Mapping], cfg: BalanceConfig) -> tuple[list[dict], list[GroupReport]]:
    """Global pass then local pass; survivors are marked ``isBalanced``."""
    kept, rep_global = rebalance_level(records, cfg, "global")
    kept, rep_local = rebalance_level(kept, cfg, "local")
    return [dict(r, isBalanced=True) for r in kept], rep_global + rep_local


# --------------------------------------------------------------------------
# type composition


def sample_types(records: Sequence[Mapping], cfg: BalanceConfig) -> list[Mapping]:
    """Downsample so the listed detailed types occur in the configured proportions.

    Shares are relative among the listed types; unlisted types are kept as is.
    """
    zero = {t for t, s in cfg.type_shares.items() if s == 0}
    counts = Counter(r["types"]["detailed"] for r in records)
    present = {t: s for t, s in cfg.type_shares.items() if s > 0 and counts[t] > 0}
    keep: dict[str, float] = {}
    if present:
        total = sum(present.values())
        size = min(counts[t] / (s / total) for t, s in present.items())
        keep = {t: min(1.0, size * s / total / counts[t]) for t, s in present.items()}
    out = []
    for r in records:
        t = r["types"]["detailed"]
        if t in zero:
            continue
        if t in keep and _uniform(cfg.seed, "type", r["questionId"]) >= keep[t]:
            continue
        out.append(r)
    return out


# --------------------------------------------------------------------------
# similarity deduplication


def _argument(step: Step) -> tuple:
    if step.op == "relate":
        return (step.op, step.operands)
    return (step.op, step.type_arg, step.operands, step.relations)


def similarity_key(record: Mapping) -> tuple:
    """(imageId, detailed type, ordered arguments) with relation hops reduced to their targets."""
    program = parse_program(record["semantic"])
    return (record["imageId"], record["types"]["detailed"], tuple(_argument(s) for s in program.steps))


def dedup_similar(records: Sequence[Mapping]) -> list[Mapping]:
    """Keep one record per similarity key: the longest program, then the lowest questionId."""
    best: dict[tuple, Mapping] = {}
    for r in records:
        k = similarity_key(r)
        cur = best.get(k)
        if cur is None or _prefer(r, cur):
            best[k] = r
    chosen = {id(r) for r in best.values()}
    return [r for r in records if id(r) in chosen]


def _prefer(a: Mapping, b: Mapping) -> bool:
    la, lb = len(parse_program(a["semantic"])), len(parse_program(b["semantic"]))
    if la != lb:
        return la > lb
    return a["questionId"] < b["questionId"]


# --------------------------------------------------------------------------
# splits


def split_images(image_ids: Iterable[str], cfg: BalanceConfig) -> dict[str, str]:
    """Image -> split name: seeded hash order cut by largest-remainder proportions."""
    ids = sorted(set(image_ids), key=lambda i: (hashlib.sha256(f"{cfg.seed}:{i}".encode()).hexdigest(), i))
    needed = sum(1 for s in cfg.split_shares if s > 0)
    if len(ids) < needed:
        raise ValueError(f"cannot split {len(ids)} images into {needed} non-empty splits")
    n = len(ids)
    exact = [s * n for s in cfg.split_shares]
    sizes = [math.floor(x) for x in exact]
    order = sorted(range(len(SPLITS)), key=lambda k: (-(exact[k] - sizes[k]), k))
    for k in order[: n - sum(sizes)]:
        sizes[k] += 1
    for k, s in enumerate(cfg.split_shares):
        if s > 0 and sizes[k] == 0:
            donor = max(range(len(SPLITS)), key=lambda j: sizes[j])
            sizes[donor] -= 1
            sizes[k] = 1
    out, start = {}, 0
    for name, size in zip(SPLITS, sizes):
        for i in ids[start:start + size]:
            out[i] = name
        start += size
    return out


def assign_splits(records: Sequence[Mapping], cfg: BalanceConfig) -> list[dict]:
    mapping = split_images((r["imageId"] for r in records), cfg)
    return [dict(r, split=mapping[r["imageId"]]) for r in records]


# --------------------------------------------------------------------------
# full pass


def balance_corpus(records: Sequence[Mapping], cfg: BalanceConfig) -> tuple[list[dict], dict]:
    """Rebalance, deduplicate, type-sample; returns records sorted by questionId and a report."""
    kept, reports = rebalance(records, cfg)
    deduped = dedup_similar(kept)
    sampled = sample_types(deduped, cfg)
    sampled = sorted(sampled, key=lambda r: r["questionId"])
    report = {
        "input": len(records),
        "rebalanced": len(kept),
        "deduplicated": len(deduped),
        "output": len(sampled),
        "config": {"b": cfg.b, "rMin": cfg.r_min, "rMax": cfg.r_max, "seed": cfg.seed,
                   "typeShares": dict(sorted(cfg.type_shares.items()))},
        "groups": [g.to_record() for g in reports],
    }
    return [dict(r) for r in sampled], report
