"""
厳密分布オラクル

小さなインスタンス（n <= 12, k <= 2, 8ラウンド以内）でマルコフ連鎖の分布を
そのまま前進計算し、モンテカルロ（engine）の結果と突き合わせる。

アリは同一なので、システム状態は「アリ内部状態の多重集合」に集約する。
1ラウンドの遷移は内部状態クラスごとの多項分布の畳み込み。
遷移規則はこのモジュール内で独立に書き下しており、algorithms.py は使わない。

確率は γ, ε が有理数でフィードバックが決定的な場合は Fraction、
シグモイドが入る場合は float（許容誤差 1e-12）。
"""
from __future__ import annotations

import itertools
import math
from collections import Counter, defaultdict, deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction

from core import (
    IDLE,
    AlgorithmConstants,
    AlgorithmSpec,
    ConfigError,
    EmptySampleError,
    InitialAssignmentSpec,
    NoiseSpec,
    SimConfig,
    StateSpaceTooLargeError,
    UnsupportedModelError,
    require_valid,
)
from noise import indistinguishability_tau, sigmoid
from settings import get_logger, make_log

logger = get_logger("oracle")
log = make_log(logger)

MAX_N = 12
MAX_K = 2
MAX_ROUNDS = 8
STATE_CAP = 10 ** 6
UNAGGREGATED_MAX_N = 4
MASS_TOLERANCE = 1e-12


def _bits(row) -> str:
    return "".join("L" if x else "O" for x in row)


def _rows(q) -> list[tuple[tuple[bool, ...], object]]:
    """フィードバック行 (lack/overload の組) とその確率。確率 0 の行は除く"""
    out = []
    for row in itertools.product((True, False), repeat=len(q)):
        p = 1
        for lack, qj in zip(row, q):
            p = p * (qj if lack else 1 - qj)
        if p != 0:
            out.append((row, p))
    return out


def _bernoulli(p):
    """(起きた, 確率) の組。確率 0 の枝は除く"""
    return [(hit, w) for hit, w in ((True, p), (False, 1 - p)) if w != 0]


# ========== 1匹分の遷移核 ==========

class Kernel:
    """状態は比較可能なタプル。transitions は {次状態: 確率}"""
    phase_length = 1

    def __init__(self, config: SimConfig):
        self.k = config.k
        self.gamma = Fraction(str(config.gamma))
        self.epsilon = Fraction(str(config.epsilon))
        self.c = config.algorithm.constants

    def initial(self, a: int) -> tuple:
        raise NotImplementedError

    def assignment(self, state: tuple) -> int:
        return state[-1]

    def transitions(self, state: tuple, q, t: int) -> dict:
        raise NotImplementedError

    def text(self, state: tuple) -> str:
        raise NotImplementedError

    def _join(self, out: dict, w, candidates: list[int], make):
        if not candidates:
            out[make(IDLE)] += w
            return
        for j in candidates:
            out[make(j)] += w / len(candidates)


class AntKernel(Kernel):
    """(current, s1, a)"""
    phase_length = 2

    def initial(self, a):
        return (IDLE, (False,) * self.k, a)

    def transitions(self, state, q, t):
        current, s1, a = state
        out = defaultdict(int)
        for row, w in _rows(q):
            if t % 2 == 1:
                if a == IDLE:
                    out[(IDLE, row, IDLE)] += w
                    continue
                for paused, wp in _bernoulli(self.c.c_s * self.gamma):
                    out[(a, row, IDLE if paused else a)] += w * wp
            elif current == IDLE:
                lacking = [j for j in range(1, self.k + 1) if s1[j - 1] and row[j - 1]]
                self._join(out, w, lacking, lambda j: (IDLE, s1, j))
            elif not s1[current - 1] and not row[current - 1]:
                for left, wl in _bernoulli(self.gamma / self.c.c_d):
                    out[(current, s1, IDLE if left else current)] += w * wl
            else:
                out[(current, s1, current)] += w
        return out

    def text(self, state):
        return f"{state[0]}|{_bits(state[1])}|{state[2]}"


class PreciseSigmoidKernel(Kernel):
    """(current, count1, count2, a)"""

    def __init__(self, config):
        super().__init__(config)
        self.m = math.ceil(2 * self.c.c_chi / self.epsilon + 1)
        self.phase_length = 2 * self.m

    def initial(self, a):
        zeros = (0,) * self.k
        return (IDLE, zeros, zeros, a)

    def transitions(self, state, q, t):
        current, c1, c2, a = state
        m = self.m
        r = t % (2 * m)
        if r == 1:
            current, c1, c2 = a, (0,) * self.k, (0,) * self.k
        out = defaultdict(int)
        for row, w in _rows(q):
            inc = tuple(int(x) for x in row)
            if 1 <= r <= m:
                n1 = tuple(x + y for x, y in zip(c1, inc))
                if r == m and current != IDLE:
                    pause = self.epsilon * self.c.c_s * self.gamma / self.c.c_chi
                    for paused, wp in _bernoulli(pause):
                        out[(current, n1, c2, IDLE if paused else current)] += w * wp
                else:
                    out[(current, n1, c2, a)] += w
                continue
            n2 = tuple(x + y for x, y in zip(c2, inc))
            if r != 0:
                out[(current, c1, n2, a)] += w
                continue
            # 窓ごとの中央値（半数ちょうどは overload）
            s1 = [2 * x > m for x in c1]
            s2 = [2 * x > m for x in n2]
            if current == IDLE:
                lacking = [j for j in range(1, self.k + 1) if s1[j - 1] and s2[j - 1]]
                self._join(out, w, lacking, lambda j: (IDLE, c1, n2, j))
            elif not s1[current - 1] and not s2[current - 1]:
                leave = self.gamma / (self.c.c_chi * self.c.c_d)
                for left, wl in _bernoulli(leave):
                    out[(current, c1, n2, IDLE if left else current)] += w * wl
            else:
                out[(current, c1, n2, current)] += w
        return out

    def text(self, state):
        c1 = ",".join(map(str, state[1]))
        c2 = ",".join(map(str, state[2]))
        return f"{state[0]}|{c1}|{c2}|{state[3]}"


class PreciseAdversarialKernel(Kernel):
    """(current, r_min, at_r_min, all_lack, all_overload, a)"""

    def __init__(self, config):
        super().__init__(config)
        self.r1 = math.ceil(self.c.c_r / self.epsilon)
        self.r2 = self.c.c_replay * self.r1
        self.phase_length = self.r1 + self.r2
        self.p = self.epsilon * self.gamma / self.c.c_r

    def initial(self, a):
        no = (False,) * self.k
        return (IDLE, 0, IDLE, no, no, a)

    def transitions(self, state, q, t):
        current, r_min, at, all_lack, all_over, a = state
        r = t % self.phase_length
        out = defaultdict(int)
        for row, w in _rows(q):
            if r == 1:
                hit = a != IDLE and row[a - 1]
                over = tuple(not x for x in row)
                out[(a, 1 if hit else 0, a if hit else IDLE, row, over, a)] += w
                continue
            lack = tuple(x and y for x, y in zip(all_lack, row))
            over = tuple(x and not y for x, y in zip(all_over, row))
            if 2 <= r < self.r1:
                if current == IDLE:
                    out[(IDLE, r_min, at, lack, over, IDLE)] += w
                    continue
                for paused, wp in _bernoulli(self.p):
                    act = IDLE if paused else current
                    if r_min == 0 and row[current - 1]:
                        out[(current, r, act, lack, over, act)] += w * wp
                    else:
                        out[(current, r_min, at, lack, over, act)] += w * wp
            elif r == self.r1:
                if current != IDLE and r_min == 0:
                    out[(current, self.r1, current, lack, over, current)] += w
                else:
                    act = current if current != IDLE and at != IDLE else IDLE
                    out[(current, r_min, at, lack, over, act)] += w
            elif r != 0:
                out[(current, r_min, at, lack, over, at if current != IDLE else IDLE)] += w
            elif current == IDLE:
                lacking = [j for j in range(1, self.k + 1) if lack[j - 1]]
                self._join(out, w, lacking, lambda j: (IDLE, r_min, at, lack, over, j))
            elif over[current - 1]:
                for left, wl in _bernoulli(self.p):
                    out[(current, r_min, at, lack, over, IDLE if left else current)] += w * wl
            else:
                out[(current, r_min, at, lack, over, current)] += w
        return out

    def text(self, state):
        current, r_min, at, all_lack, all_over, a = state
        return f"{current}|{r_min}|{at}|{_bits(all_lack)}|{_bits(all_over)}|{a}"


class TrivialKernel(Kernel):
    """(a,)"""

    def initial(self, a):
        return (a,)

    def transitions(self, state, q, t):
        (a,) = state
        out = defaultdict(int)
        for row, w in _rows(q):
            if a == IDLE:
                lacking = [j for j in range(1, self.k + 1) if row[j - 1]]
                self._join(out, w, lacking, lambda j: (j,))
            else:
                out[(a if row[a - 1] else IDLE,)] += w
        return out

    def text(self, state):
        return str(state[0])


KERNELS = {
    "ant": AntKernel,
    "precise-sigmoid": PreciseSigmoidKernel,
    "precise-adversarial": PreciseAdversarialKernel,
    "trivial-sync": TrivialKernel,
    "trivial-seq": TrivialKernel,
}


# ========== フィードバック確率 ==========

def lack_probabilities(config: SimConfig, deficits) -> tuple:
    """各タスクで1匹が lack を受け取る確率（アリ間で独立）"""
    noise = config.noise
    if noise.kind == "exact":
        return tuple(Fraction(1) if x >= 0 else Fraction(0) for x in deficits)
    if noise.kind == "sigmoid":
        return tuple(sigmoid(x, noise.lam) for x in deficits)

    strategy = noise.adversary
    q = []
    for j, (x, d) in enumerate(zip(deficits, config.demands)):
        if x > noise.gamma_ad * d:
            q.append(Fraction(1))
        elif x < -noise.gamma_ad * d:
            q.append(Fraction(0))
        elif strategy.kind == "all-lack-in-grey":
            q.append(Fraction(1))
        elif strategy.kind == "all-overload-in-grey":
            q.append(Fraction(0))
        elif strategy.kind == "correct-outside-random-inside":
            flip = Fraction(str(strategy.p))
            q.append(1 - flip if x >= 0 else flip)
        elif strategy.kind == "indistinguishability":
            tau = int(indistinguishability_tau(config.demands, noise.gamma_ad, strategy)[j])
            threshold = tau if strategy.shifted else -tau
            q.append(Fraction(1) if x >= threshold else Fraction(0))
        else:
            raise UnsupportedModelError(f"adversary {strategy.kind} is not exchangeable across ants")
    return tuple(q)


# ========== 集約状態 ==========

Aggregate = tuple  # ((state, count), ...) を state でソート


def _key(counter: Counter) -> Aggregate:
    return tuple(sorted((s, c) for s, c in counter.items() if c))


def _loads(kernel: Kernel, key: Aggregate, k: int) -> tuple[int, ...]:
    w = [0] * k
    for state, count in key:
        a = kernel.assignment(state)
        if a != IDLE:
            w[a - 1] += count
    return tuple(w)


def _multinomial(count: int, outcomes: list[tuple[tuple, object]]):
    """count 匹を outcomes に振り分ける全パターンと確率"""
    def split(remaining, i):
        if i == len(outcomes) - 1:
            yield (remaining,)
            return
        for x in range(remaining, -1, -1):
            for rest in split(remaining - x, i + 1):
                yield (x,) + rest

    for parts in split(count, 0):
        coef = math.factorial(count)
        p = 1
        for x, (_, w) in zip(parts, outcomes):
            coef //= math.factorial(x)
            if x:
                p = p * w ** x
        yield {outcomes[i][0]: x for i, x in enumerate(parts) if x}, coef * p


@dataclass
class ExactDistribution:
    """round 終了後の集約状態の分布"""
    round: int
    probabilities: dict
    kernel: Kernel = field(repr=False)
    k: int = 1

    def total(self) -> float:
        return float(sum(self.probabilities.values()))

    @property
    def support_size(self) -> int:
        return len(self.probabilities)

    def load_distribution(self) -> dict:
        """タスク別人数ベクトルの周辺分布"""
        out = defaultdict(int)
        for key, p in self.probabilities.items():
            out[_loads(self.kernel, key, self.k)] += p
        return dict(out)

    def state_distribution(self) -> dict:
        """内部状態のテキスト表現の多重集合 → 確率（engine の final_states と比較用）"""
        out = defaultdict(int)
        for key, p in self.probabilities.items():
            text_key = tuple(sorted((self.kernel.text(s), c) for s, c in key))
            out[text_key] += p
        return dict(out)


def _check_size(config: SimConfig, unaggregated: bool = False):
    limit = UNAGGREGATED_MAX_N if unaggregated else MAX_N
    if config.n > limit:
        raise ConfigError(f"exact evolution needs n <= {limit}, got {config.n}", field_name="n")
    if config.k > MAX_K:
        raise ConfigError(f"exact evolution needs k <= {MAX_K}, got {config.k}", field_name="k")
    if config.horizon > MAX_ROUNDS:
        raise ConfigError(f"exact evolution needs horizon <= {MAX_ROUNDS}, got {config.horizon}",
                          field_name="horizon")
    if config.noise.kind == "sigmoid" and config.noise.correlated:
        raise UnsupportedModelError("correlated feedback is not supported by the exact oracle")


def _initial_distribution(config: SimConfig, kernel: Kernel) -> dict:
    init = config.initial
    n, k = config.n, config.k
    if init.kind == "uniform-random":
        outcomes = [(kernel.initial(a), Fraction(1, k + 1)) for a in range(k + 1)]
        return {_key(Counter(parts)): p for parts, p in _multinomial(n, outcomes)}
    if init.kind == "explicit":
        assignment = list(init.assignment)
    elif init.kind == "loads":
        assignment = [j for j in range(1, k + 1) for _ in range(init.loads[j - 1])]
        assignment += [IDLE] * (n - len(assignment))
    else:
        assignment = [IDLE] * n
    return {_key(Counter(kernel.initial(a) for a in assignment)): Fraction(1)}


def _step_synchronous(config: SimConfig, kernel: Kernel, dist: dict, t: int) -> dict:
    demands = config.demands
    nxt = defaultdict(int)
    for key, p in dist.items():
        loads = _loads(kernel, key, config.k)
        q = lack_probabilities(config, [d - w for d, w in zip(demands, loads)])
        partial = {(): p}
        for state, count in key:
            outcomes = [(s, w) for s, w in kernel.transitions(state, q, t).items() if w != 0]
            merged = defaultdict(int)
            for part_key, pp in partial.items():
                base = Counter(dict(part_key))
                for parts, pm in _multinomial(count, outcomes):
                    merged[_key(base + Counter(parts))] += pp * pm
            partial = merged
        for k2, p2 in partial.items():
            nxt[k2] += p2
    return nxt


def _step_sequential(config: SimConfig, kernel: Kernel, dist: dict, t: int) -> dict:
    """一様に選ばれた1匹のクラスだけが遷移する"""
    demands = config.demands
    nxt = defaultdict(int)
    for key, p in dist.items():
        loads = _loads(kernel, key, config.k)
        q = lack_probabilities(config, [d - w for d, w in zip(demands, loads)])
        counter = Counter(dict(key))
        for state, count in key:
            chosen = Fraction(count, config.n)
            for s2, w in kernel.transitions(state, q, t).items():
                if w == 0:
                    continue
                after = counter.copy()
                after[state] -= 1
                after[s2] += 1
                nxt[_key(after)] += p * chosen * w
    return nxt


def exact_evolution(config: SimConfig) -> list[ExactDistribution]:
    """ラウンド 1..horizon の各終了時点の厳密分布"""
    require_valid(config, ignore=("zero horizon",) if config.horizon == 0 else ())
    _check_size(config)
    kernel = KERNELS[config.algorithm.kind](config)
    sequential = config.algorithm.kind == "trivial-seq"
    dist = _initial_distribution(config, kernel)
    out = []
    for t in range(1, config.horizon + 1):
        dist = (_step_sequential if sequential else _step_synchronous)(config, kernel, dist, t)
        if len(dist) > STATE_CAP:
            raise StateSpaceTooLargeError(
                f"round {t}: {len(dist)} aggregated states exceed cap {STATE_CAP}", state_count=len(dist)
            )
        total = float(sum(dist.values()))
        if abs(total - 1.0) > MASS_TOLERANCE:
            raise ArithmeticError(f"round {t}: probability mass {total!r} != 1")
        log(f"ラウンド {t}: 集約状態数 {len(dist)}", level="debug")
        out.append(ExactDistribution(t, dict(dist), kernel, config.k))
    return out


# ========== 集約なしの検算 ==========

def unaggregated_evolution(config: SimConfig) -> list[dict]:
    """アリを区別した連鎖を前進計算し、最後に多重集合へ畳む（n <= 4）"""
    require_valid(config)
    _check_size(config, unaggregated=True)
    kernel = KERNELS[config.algorithm.kind](config)
    sequential = config.algorithm.kind == "trivial-seq"
    n, k = config.n, config.k

    start = _initial_distribution(config, kernel)
    # 集約された初期分布を、アリ番号付きの状態ベクトルへ展開する
    dist = defaultdict(int)
    for key, p in start.items():
        states = [s for s, c in key for _ in range(c)]
        perms = set(itertools.permutations(states))
        for perm in perms:
            dist[perm] += p / len(perms)

    results = []
    for t in range(1, config.horizon + 1):
        nxt = defaultdict(int)
        for vector, p in dist.items():
            loads = [0] * k
            for s in vector:
                a = kernel.assignment(s)
                if a != IDLE:
                    loads[a - 1] += 1
            q = lack_probabilities(config, [d - w for d, w in zip(config.demands, loads)])
            per_ant = [list(kernel.transitions(s, q, t).items()) for s in vector]
            if sequential:
                for i in range(n):
                    for s2, w in per_ant[i]:
                        nxt[vector[:i] + (s2,) + vector[i + 1:]] += p * Fraction(1, n) * w
                continue
            for combo in itertools.product(*per_ant):
                w = p
                for _, wi in combo:
                    w = w * wi
                if w != 0:
                    nxt[tuple(s for s, _ in combo)] += w
        dist = nxt
        folded = defaultdict(int)
        for vector, p in dist.items():
            folded[_key(Counter(vector))] += p
        results.append(dict(folded))
    return results


def exchangeability_gap(config: SimConfig) -> float:
    """集約版と集約なし版の最大差（全ラウンド・全状態）"""
    aggregated = exact_evolution(config)
    full = unaggregated_evolution(config)
    gap = 0.0
    for a, b in zip(aggregated, full):
        for key in set(a.probabilities) | set(b):
            gap = max(gap, abs(float(a.probabilities.get(key, 0)) - float(b.get(key, 0))))
    return gap


# ========== 到達可能性 ==========

def reachability(config: SimConfig) -> dict:
    """有限状態機械として (状態, フェーズ位置) のグラフを探索する

    フィードバックは全パターン正の確率とし、1フェーズ経過後に到達する状態集合が
    強連結かどうかを調べる。
    """
    kernel = KERNELS[config.algorithm.kind](config)
    L = kernel.phase_length
    q = (Fraction(1, 2),) * config.k

    def succ(node):
        state, pos = node
        t = pos + 1
        return {(s, t % L) for s, w in kernel.transitions(state, q, t).items() if w != 0}

    frontier = {(kernel.initial(a), 0) for a in range(config.k + 1)}
    for _ in range(L):
        frontier = set().union(*(succ(v) for v in frontier))

    def closure(sources):
        seen = set(sources)
        queue = deque(sources)
        while queue:
            for w in succ(queue.popleft()):
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return seen

    nodes = closure(frontier)
    unreachable = {}
    for v in nodes:
        missing = nodes - closure([v])
        if missing:
            unreachable[kernel.text(v[0]) + f"@{v[1]}"] = len(missing)
    return {"nodes": len(nodes), "strongly_connected": not unreachable, "unreachable": unreachable}


# ========== モンテカルロとの比較 ==========

def tv_distance(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(float(p.get(x, 0)) - float(q.get(x, 0))) for x in keys)


def tv_tolerance(support: int, samples: int, alpha: float) -> float:
    """多項分布の L1 偏差の集中不等式から求めた TV の許容幅"""
    return math.sqrt((support * math.log(2) + math.log(1 / alpha)) / (2 * samples))


def _mc_chunk(config: SimConfig, seeds: list[int]) -> list[tuple]:
    from engine import run

    out = []
    for seed in seeds:
        trace = run(replace(config, seed=seed), keep_states=True)
        loads = tuple(tuple(int(x) for x in row) for row in trace.loads)
        states = tuple(sorted(Counter(trace.final_states).items()))
        out.append((loads, states))
    return out


@dataclass
class DivergenceReport:
    runs: int
    alpha: float
    rounds: list[dict] = field(default_factory=list)
    final_state_tv: float = 0.0
    final_state_tolerance: float = 0.0

    @property
    def max_tv(self) -> float:
        return max([r["tv"] for r in self.rounds] + [self.final_state_tv])

    @property
    def passed(self) -> bool:
        return (all(r["tv"] <= r["tolerance"] for r in self.rounds)
                and self.final_state_tv <= self.final_state_tolerance)

    def to_dict(self) -> dict:
        return {
            "runs": self.runs,
            "alpha": self.alpha,
            "passed": self.passed,
            "max_tv": self.max_tv,
            "rounds": self.rounds,
            "final_state_tv": self.final_state_tv,
            "final_state_tolerance": self.final_state_tolerance,
        }


def compare_mc_oracle(config: SimConfig, num_mc_runs: int, alpha: float = 0.01, jobs: int = 1,
                      mc_config: SimConfig | None = None) -> DivergenceReport:
    """engine を num_mc_runs 回まわし、各ラウンドの負荷分布と最終内部状態分布を厳密分布と比べる

    mc_config を渡すとモンテカルロ側だけ別の設定で回す（変異テスト用）。
    比較は horizon + 1 回なので α をその回数で割って使う。
    """
    if num_mc_runs < 1:
        raise EmptySampleError("num_mc_runs must be >= 1")
    exact = exact_evolution(config)
    sim = mc_config or config
    if config.record_every != 1 or sim.record_every != 1:
        raise ConfigError("oracle comparison needs record_every = 1", field_name="record_every")

    seeds = [(config.seed + i) % 2 ** 64 for i in range(num_mc_runs)]
    if jobs > 1:
        chunks = [seeds[i::jobs] for i in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            samples = [s for part in pool.map(_mc_chunk, [sim] * jobs, chunks) for s in part]
    else:
        samples = _mc_chunk(sim, seeds)

    per_test_alpha = alpha / (len(exact) + 1)
    report = DivergenceReport(num_mc_runs, alpha)
    for i, dist in enumerate(exact):
        empirical = Counter(loads[i] for loads, _ in samples)
        emp = {x: c / num_mc_runs for x, c in empirical.items()}
        ref = dist.load_distribution()
        support = len(set(emp) | set(ref))
        report.rounds.append({
            "round": dist.round,
            "tv": tv_distance(emp, ref),
            "tolerance": tv_tolerance(support, num_mc_runs, per_test_alpha),
            "support": support,
        })

    if exact:
        empirical = Counter(states for _, states in samples)
        emp = {x: c / num_mc_runs for x, c in empirical.items()}
        ref = exact[-1].state_distribution()
        support = len(set(emp) | set(ref))
        report.final_state_tv = tv_distance(emp, ref)
        report.final_state_tolerance = tv_tolerance(support, num_mc_runs, per_test_alpha)

    log(f"MC 比較: runs={num_mc_runs} max TV={report.max_tv:.4f} passed={report.passed}")
    return report


def tiny_instance(kind: str, seed: int = 0) -> SimConfig:
    """各アルゴリズムを1フェーズ分だけ厳密計算できる小さな設定"""
    constants = AlgorithmConstants()
    epsilon = 0.5
    gamma = 0.2
    horizon = 4
    if kind == "precise-sigmoid":
        constants = replace(constants, c_chi=Fraction(1, 2))
        epsilon, gamma = 1.0, 0.15
    elif kind == "precise-adversarial":
        constants = replace(constants, c_r=Fraction(2), c_replay=1)
        epsilon, gamma = 1.0, 0.4
    elif kind not in KERNELS:
        raise ConfigError(f"unknown algorithm: {kind}", field_name="algorithm.kind")
    return SimConfig(
        n=3,
        k=1,
        demands=(1,),
        noise=NoiseSpec(kind="sigmoid", lam=1.0),
        algorithm=AlgorithmSpec(kind=kind, constants=constants),
        gamma=gamma,
        horizon=horizon,
        seed=seed,
        epsilon=epsilon,
        initial=InitialAssignmentSpec(kind="loads", loads=(1,)),
    )
