"""Seeded Monte-Carlo checks of the necklace lemmas.

Every trial draws its own generator from ``SeedSequence((seed, index))`` so a
table is a pure function of the configuration, whatever the worker count.
"""

from __future__ import annotations

import csv
import io
import math
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .maps import ball, rooted_isomorphic
from .necklace import (LETTERS, boundary_size_bound, build_rooted, frozen, glue_states, glue_word,
                       glued_map, grow, prefix, walk_minima)

DEGREE_C = 8 / math.log(4 / 3)


@dataclass(frozen=True)
class TrialConfig:
    n: int = 10_000
    trials: int = 10_000
    seed: int = 0
    m_grid: tuple[int, ...] = tuple(range(4, 65, 4))
    t_grid: tuple[float, ...] = (1, 2, 3, 4, 6)
    k_grid: tuple[int, ...] = (0, 1, 2)
    n_list: tuple[int, ...] = (100, 1000, 10_000)
    r: int = 1
    m: int = 10_000
    workers: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")


def worker_count(requested: int | None = None) -> int:
    if requested is not None:
        return max(1, requested)
    env = os.environ.get("RPM_LAB_THREADS")
    if env:
        return max(1, int(env))
    return 1


def trial_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, index)))


def random_word(n: int, rng: np.random.Generator) -> str:
    return "".join(np.array(list(LETTERS))[rng.integers(0, 4, n)])


def sample_unbiased(n: int, seed: int) -> tuple[str, int]:
    """Uniform word of length ``n`` and an independent uniform root index in ``1..n``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    word = random_word(n, rng)
    k = int(rng.integers(1, n + 1))
    return word, k


def _run(fn, jobs: list, workers: int | None) -> list:
    w = worker_count(workers)
    if w == 1 or len(jobs) < 2:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=w) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * w))))


# -- per-trial statistics -----------------------------------------------------------

@dataclass(frozen=True)
class MapStats:
    degree: int              # root vertex
    boundary: int            # boundary vertices of the whole map
    max_degree: int          # M_n
    root_distance: int       # root vertex to the boundary
    a: int                   # walk minima from the boundary-size argument
    b: int
    bound: int               # a + b + |X_n + a| + |Y_n + b|


def map_stats(job: tuple[int, int, int]) -> MapStats:
    n, seed, index = job
    rng = trial_rng(seed, index)
    word = random_word(n, rng)
    k = int(rng.integers(1, n + 1))
    t = build_rooted(word, k)
    deg = t.degrees
    dist = t.vertex_boundary_distances()
    a, b = walk_minima(word)
    return MapStats(int(deg[t.root_vertex]), len(t.boundary_vertices), int(deg.max()),
                    int(dist[t.root_vertex]), a, b, boundary_size_bound(word))


def collect(n: int, trials: int, seed: int, workers: int | None = None) -> list[MapStats]:
    return _run(map_stats, [(n, seed, i) for i in range(trials)], workers)


# -- tables -----------------------------------------------------------------------

@dataclass
class Table:
    name: str
    columns: list[str]
    rows: list[dict] = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.get("passed", True) for r in self.rows)

    def failing(self) -> list[dict]:
        return [r for r in self.rows if not r.get("passed", True)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=self.columns, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({c: r.get(c) for c in self.columns})
        return buf.getvalue()

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_csv())


def binomial_sigma(p: float, trials: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / trials)


def tail_rows(values: np.ndarray, grid, bound, key: str, threshold=lambda x: x) -> list[dict]:
    rows = []
    for x in grid:
        p = float(np.mean(values >= threshold(x)))
        sig = binomial_sigma(p, len(values))
        bd = float(bound(x))
        rows.append({key: x, "empirical": p, "bound": bd, "sigma": sig,
                     "lower": max(0.0, p - 3 * sig), "upper": min(1.0, p + 3 * sig),
                     "passed": p <= bd + 3 * sig})
    return rows


def degree_bound(m: float) -> float:
    return 2 * 0.75 ** (m / 4)


def boundary_bound(t: float) -> float:
    return 2 * math.exp(-t * t / 32)


def verify_degree_tail(config: TrialConfig, stats: list[MapStats] | None = None) -> Table:
    """Tail of the root-vertex degree against ``2 (3/4)^(m/4)``."""
    if stats is None:
        stats = collect(config.n, config.trials, config.seed, config.workers)
    deg = np.array([s.degree for s in stats])
    table = Table("degree_tail", ["m", "empirical", "bound", "sigma", "lower", "upper", "passed"])
    table.rows = tail_rows(deg, config.m_grid, degree_bound, "m")
    table.notes = {"n": config.n, "trials": len(stats), "mean_degree": float(deg.mean())}
    return table


def verify_boundary_tail(config: TrialConfig, stats: list[MapStats] | None = None) -> Table:
    """Tail of ``|∂T_n| / sqrt(n)`` against ``2 exp(-t^2/32)``.

    The walk minima ``a, b`` are logged per trial and checked against a direct
    scan of the walk, and the boundary-size bound against the measured size.
    """
    if stats is None:
        stats = collect(config.n, config.trials, config.seed, config.workers)
    size = np.array([s.boundary for s in stats])
    root_n = math.sqrt(config.n)
    table = Table("boundary_tail", ["t", "empirical", "bound", "sigma", "lower", "upper", "passed"])
    table.rows = tail_rows(size, config.t_grid, boundary_bound, "t", lambda t: t * root_n)
    # the integers 0 and 1 are boundary vertices the bound does not count
    dominated = sum(s.boundary <= s.bound + 2 for s in stats)
    table.notes = {"n": config.n, "trials": len(stats),
                   "bound_dominates": dominated, "mean_a": float(np.mean([s.a for s in stats])),
                   "mean_b": float(np.mean([s.b for s in stats]))}
    return table


def verify_root_distance(config: TrialConfig) -> Table:
    """``P[d_gr(root, ∂T_n) <= k]`` across ``n``, plus the max-degree event."""
    table = Table("root_distance", ["n", "k", "empirical", "sigma", "decreasing", "passed"])
    probs: dict[int, list[float]] = {}
    max_rows = []
    for i, n in enumerate(config.n_list):
        stats = collect(n, config.trials, config.seed + 7919 * i, config.workers)
        dist = np.array([s.root_distance for s in stats])
        for k in config.k_grid:
            probs.setdefault(k, []).append(float(np.mean(dist <= k)))
        big = np.array([s.max_degree for s in stats]) >= DEGREE_C * math.log(n)
        p = float(big.mean())
        sig = binomial_sigma(p, len(stats))
        max_rows.append({"n": n, "k": "M_n", "empirical": p, "sigma": sig,
                         "decreasing": "", "passed": p <= 2 / n + 3 * sig})
    for k in config.k_grid:
        ps = probs[k]
        dec = all(a > b for a, b in zip(ps[:-1], ps[1:]))
        for n, p in zip(config.n_list, ps):
            table.rows.append({"n": n, "k": k, "empirical": p, "sigma": binomial_sigma(p, config.trials),
                               "decreasing": dec, "passed": dec})
    table.rows += max_rows
    table.notes = {"trials": config.trials, "C": DEGREE_C}
    return table


def root_choice_trial(job: tuple[int, int, int]) -> tuple[int, int]:
    n, seed, index = job
    rng = trial_rng(seed, index)
    state = grow(random_word(n, rng))
    k1, k2 = rng.integers(1, n + 1, size=2)
    degs = []
    for k in (k1, k2):
        t = state.triangulation(int(k) - 1)
        degs.append(int(t.degrees[t.root_vertex]))
    return degs[0], degs[1]


def verify_root_choice(n: int, trials: int, seed: int = 0, workers: int | None = None,
                       alpha: float = 1e-3) -> Table:
    """Root-vertex degree at ``k`` and at a re-drawn ``k'`` on the same words.

    The two laws are compared by a chi-square test on degrees pooled into
    bins of at least five expected counts.
    """
    from scipy.stats import chi2_contingency

    pairs = np.array(_run(root_choice_trial, [(n, seed, i) for i in range(trials)], workers))
    top = max(int(pairs.max()), 2)
    counts = np.array([np.bincount(pairs[:, j], minlength=top + 1) for j in range(2)])
    # merge the upper tail until every bin is populated enough
    cols, acc = [], np.zeros(2, np.int64)
    for c in counts.T[::-1]:
        acc = acc + c
        if acc.sum() >= 10 and acc.min() >= 5:
            cols.append(acc)
            acc = np.zeros(2, np.int64)
    if acc.sum():
        if cols:
            cols[-1] = cols[-1] + acc
        else:
            cols.append(acc)
    table_ = np.array(cols).T
    p = float(chi2_contingency(table_)[1]) if table_.shape[1] > 1 else 1.0
    table = Table("root_choice", ["n", "mean_k", "mean_k_redrawn", "p_value", "passed"])
    table.rows = [{"n": n, "mean_k": float(pairs[:, 0].mean()),
                   "mean_k_redrawn": float(pairs[:, 1].mean()), "p_value": p, "passed": p >= alpha}]
    table.notes = {"trials": trials, "bins": int(table_.shape[1])}
    return table


# -- local convergence ---------------------------------------------------------------

def _ball_code(t, r: int) -> tuple:
    return ball(t, r).code()


def local_trial(job: tuple) -> tuple[list[tuple], tuple, list[tuple]]:
    """Codes of ``B_r`` for each finite ``n``, for the length-``m`` limit and along a ladder.

    The finite maps are coupled to the limit: ``T(Z, k)`` is the glueing of
    ``X = z_k..z_n`` and the primed reversal of ``z_1..z_{k-1}``, so a uniform
    root fraction and the first letters of two long words give each ``T_n``.
    The ladder codes use the same two words truncated at each ladder length.
    """
    n_list, r, m, ladder, seed, index = job
    rng = trial_rng(seed, index)
    length = max([m, *ladder])
    up = frozen(grow(random_word(length, rng)))
    down = frozen(grow(random_word(length, rng)))
    u = rng.random()
    codes = []
    for n in n_list:
        k = min(n, int(u * n) + 1)
        codes.append(_ball_code(glue_states(prefix(up, n - k + 1), prefix(down, k - 1)), r))
    limit = _ball_code(glue_states(prefix(up, m), prefix(down, m)), r)
    rungs = [_ball_code(glue_states(prefix(up, L), prefix(down, L)), r) for L in ladder]
    return codes, limit, rungs


def pooled_tv(sample: list, reference: list, min_count: int = 5) -> float:
    """Total variation between two empirical laws, rare encodings pooled into one bin."""
    cs, cr = Counter(sample), Counter(reference)
    total = cs + cr
    common = {c for c, v in total.items() if v >= min_count}

    def hist(counter, size):
        h = {c: counter.get(c, 0) / size for c in common}
        h[None] = sum(v for c, v in counter.items() if c not in common) / size
        return h

    hs, hr = hist(cs, len(sample)), hist(cr, len(reference))
    return 0.5 * sum(abs(hs[c] - hr[c]) for c in hs)


def verify_local_convergence(r: int, n_list, m: int, trials: int, seed: int = 0,
                             workers: int | None = None, m0: int = 1000,
                             max_doublings: int = 5, target: float = 0.99) -> Table:
    """TV distance between ``B_r(T_n)`` and ``B_r`` of the length-``m`` glued limit.

    Truncation stability doubles the length from ``m0``: the first ``L`` at
    which ``B_r`` at ``L`` equals ``B_r`` at ``2L`` in at least ``target`` of
    the trials is reported with its fraction.
    """
    n_list = tuple(n_list)
    if max(n_list) > m:
        raise ValueError("truncation length must be at least the largest n")
    ladder = tuple(m0 * 2 ** j for j in range(max_doublings + 2))
    out = _run(local_trial, [(n_list, r, m, ladder, seed, i) for i in range(trials)], workers)
    reference = [o[1] for o in out]
    tvs = [pooled_tv([o[0][j] for o in out], reference) for j in range(len(n_list))]
    fractions = [float(np.mean([o[2][j] == o[2][j + 1] for o in out]))
                 for j in range(len(ladder) - 1)]
    chosen = next((j for j, f in enumerate(fractions) if f >= target), len(fractions) - 1)
    stable = fractions[chosen]
    dec = all(a > b for a, b in zip(tvs[:-1], tvs[1:])) if r > 0 else all(v == 0 for v in tvs)
    table = Table("local_convergence",
                  ["r", "n", "tv", "decreasing", "stability", "stability_m", "passed"])
    for n, tv in zip(n_list, tvs):
        table.rows.append({"r": r, "n": n, "tv": tv, "decreasing": dec, "stability": stable,
                           "stability_m": ladder[chosen], "passed": dec and stable >= target})
    table.notes = {"m": m, "trials": trials, "ladder": ladder, "stability_by_m": fractions}
    return table


# -- the glueing identity --------------------------------------------------------------

def _all_words(max_len: int):
    from itertools import product
    for n in range(max_len + 1):
        for w in product(LETTERS, repeat=n):
            yield "".join(w)


def eq12_holds(x: str, y: str) -> bool:
    return rooted_isomorphic(build_rooted(glue_word(x, y), len(y) + 1), glued_map(x, y))


def verify_eq12(max_len: int = 4, random_pairs: int = 1000, random_len: int = 50,
                seed: int = 0) -> Table:
    """Glueing identity on every pair of words up to ``max_len`` plus random longer pairs.

    The upper word carries the root, so it ranges over nonempty words.
    """
    words = list(_all_words(max_len))
    ok = bad = full = 0
    failures = []
    for x in words:
        if not x:
            continue
        for y in words:
            full += len(x) == len(y) == max_len
            if eq12_holds(x, y):
                ok += 1
            else:
                bad += 1
                failures.append((x, y))
    rng = np.random.default_rng(seed)
    rok = rbad = 0
    for _ in range(random_pairs):
        x = random_word(int(rng.integers(1, random_len + 1)), rng)
        y = random_word(int(rng.integers(0, random_len + 1)), rng)
        if eq12_holds(x, y):
            rok += 1
        else:
            rbad += 1
            failures.append((x, y))
    table = Table("eq12", ["family", "pairs", "failures", "passed"])
    table.rows = [{"family": f"exhaustive<={max_len}", "pairs": ok + bad, "failures": bad, "passed": bad == 0},
                  {"family": f"random<={random_len}", "pairs": rok + rbad, "failures": rbad, "passed": rbad == 0}]
    table.notes = {"examples": failures[:5], "pairs_at_max_len": full}
    return table


def config_dict(config: TrialConfig) -> dict:
    return asdict(config)
