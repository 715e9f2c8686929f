"""
ドメイン型・ワールド状態・設定検証

全モジュールが共有する値型と純粋関数。
タスクは 1..k、待機 (idle) は 0 で表す。フィードバックは bool で True = lack。
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from fractions import Fraction

import numpy as np

# ========== 定数 ==========
IDLE = 0
LACK = True
OVERLOAD = False

NOISE_KINDS = ("sigmoid", "adversarial", "exact")
ALGORITHM_KINDS = ("ant", "precise-sigmoid", "precise-adversarial", "trivial-sync", "trivial-seq")
INITIAL_KINDS = ("all-idle", "uniform-random", "explicit", "loads")

# 行動は int（0 = idle, j = work(j)）
Action = int


# ========== エラー ==========

class AllocError(Exception):
    """alloc-sim の基底例外"""


class DimensionError(AllocError, ValueError):
    """ベクトル長の不一致"""


class MalformedAssignmentError(AllocError, ValueError):
    """範囲外のタスク番号を含む割り当て"""


class ConfigError(AllocError):
    """読み込めない・構造的に不可能な設定"""

    def __init__(self, message: str, field_name: str | None = None):
        super().__init__(message)
        self.field_name = field_name


class UnsupportedModelError(AllocError):
    """タイミングモデルとアルゴリズムの組み合わせが未定義"""


class StateSpaceTooLargeError(AllocError):
    """厳密計算の状態数が上限を超えた"""

    def __init__(self, message: str, state_count: int):
        super().__init__(message)
        self.state_count = state_count


class EmptySampleError(AllocError, ValueError):
    """モンテカルロ標本が空"""


class UndefinedMetricError(AllocError, ValueError):
    """定義できない指標（ゼロ除算など）"""


def work(j: int, k: int) -> Action:
    """work(j) を生成（1 <= j <= k）"""
    if not 1 <= j <= k:
        raise MalformedAssignmentError(f"task index {j} outside 1..{k}")
    return j


# ========== 設定型 ==========

@dataclass(frozen=True)
class AdversaryStrategy:
    """グレーゾーン内のフィードバックを決める敵対者

    kind ごとの追加パラメータ:
      correct-outside-random-inside: p（正しい値を反転する確率）
      indistinguishability: shifted, tau（タスク別の閾値、省略時は floor(γ^ad·d_j)）
    """
    kind: str = "all-lack-in-grey"
    p: float = 0.0
    shifted: bool = False
    tau: tuple[int, ...] | None = None


@dataclass(frozen=True)
class NoiseSpec:
    """フィードバックモデル

    sigmoid: lam のみ使用、adversarial: gamma_ad と adversary、exact: 追加フィールドなし
    """
    kind: str = "sigmoid"
    lam: float | None = None
    gamma_ad: float | None = None
    adversary: AdversaryStrategy | None = None
    correlated: bool = False


@dataclass(frozen=True)
class AlgorithmConstants:
    """アルゴリズム定数（既定値は公開された値）

    c_r は Precise Adversarial の r1 = ceil(c_r/ε) と確率 εγ/c_r に使う 32、
    c_replay は r2 = c_replay·r1 の 4。
    """
    c_d: Fraction = Fraction(19)
    c_s: Fraction = Fraction(7, 3)
    c_chi: Fraction = Fraction(10)
    c_r: Fraction = Fraction(32)
    c_replay: int = 4


@dataclass(frozen=True)
class AlgorithmSpec:
    kind: str = "ant"
    constants: AlgorithmConstants = field(default_factory=AlgorithmConstants)


@dataclass(frozen=True)
class InitialAssignmentSpec:
    """初期割り当て

    all-idle / uniform-random（各アリが {idle, 1..k} から一様）/
    explicit（長さ n のベクトル）/ loads（タスク別の人数、先頭のアリから詰める）
    """
    kind: str = "all-idle"
    assignment: tuple[int, ...] | None = None
    loads: tuple[int, ...] | None = None


@dataclass(frozen=True)
class SimConfig:
    """実験1回分の完全な記述"""
    n: int
    k: int
    demands: tuple[int, ...]
    noise: NoiseSpec
    algorithm: AlgorithmSpec
    gamma: float
    horizon: int
    seed: int
    epsilon: float = 0.5
    initial: InitialAssignmentSpec = field(default_factory=InitialAssignmentSpec)
    round_offset: int = 0
    record_every: int = 1


# ========== ワールド状態 ==========

@dataclass(frozen=True)
class WorldState:
    round: int
    assignment: np.ndarray
    loads: np.ndarray
    deficits: np.ndarray


@dataclass(frozen=True)
class FeedbackMatrix:
    """(アリ, タスク) ごとの lack/overload。lack[i, j-1] が True なら lack"""
    round: int
    lack: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.lack.shape

    def row(self, ant: int) -> tuple[bool, ...]:
        return tuple(bool(x) for x in self.lack[ant])


def compute_loads(assignment, k: int) -> np.ndarray:
    """各タスクの人数 X_t^j を数える"""
    a = np.asarray(assignment, dtype=np.int64)
    if a.size and (a.min() < IDLE or a.max() > k):
        bad = a[(a < IDLE) | (a > k)][0]
        raise MalformedAssignmentError(f"task index {int(bad)} outside 0..{k}")
    return np.bincount(a, minlength=k + 1)[1:].astype(np.int64)


def deficit(loads, demands) -> np.ndarray:
    """Δ_j = d_j - w_j（負なら過負荷）"""
    w = np.asarray(loads, dtype=np.int64)
    d = np.asarray(demands, dtype=np.int64)
    if w.shape != d.shape:
        raise DimensionError(f"length mismatch: loads {w.shape[0]} vs demands {d.shape[0]}")
    return d - w


def world_state(round_index: int, assignment, demands) -> WorldState:
    a = np.asarray(assignment, dtype=np.int64)
    loads = compute_loads(a, len(demands))
    return WorldState(round_index, a, loads, deficit(loads, demands))


# ========== 設定検証 ==========

@dataclass(frozen=True)
class Issue:
    name: str
    message: str


@dataclass
class ValidationReport:
    errors: list[Issue] = field(default_factory=list)
    warnings: list[Issue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def names(self) -> set[str]:
        return {i.name for i in self.errors} | {i.name for i in self.warnings}

    def error(self, name: str, message: str):
        self.errors.append(Issue(name, message))

    def warn(self, name: str, message: str):
        self.warnings.append(Issue(name, message))


def _check_noise(config: SimConfig, report: ValidationReport):
    from noise import ADVERSARIES

    noise = config.noise
    if noise.kind not in NOISE_KINDS:
        report.error("unknown noise kind", f"noise.kind={noise.kind!r}")
        return

    # 選んだ種類のフィールドだけが存在すること
    extra = []
    if noise.kind != "sigmoid" and noise.lam is not None:
        extra.append("lambda")
    if noise.kind != "adversarial" and (noise.gamma_ad is not None or noise.adversary is not None):
        extra.append("gamma_ad/adversary")
    if extra:
        report.error("noise fields mismatch", f"{', '.join(extra)} not allowed for noise.kind={noise.kind}")

    if noise.kind == "sigmoid":
        if noise.lam is None or not noise.lam > 0:
            report.error("non-positive lambda", f"noise.lambda={noise.lam}")
    elif noise.kind == "adversarial":
        if noise.gamma_ad is None or not 0 < noise.gamma_ad < 0.5:
            report.error("gamma_ad out of range", f"noise.gamma_ad={noise.gamma_ad} not in (0, 1/2)")
        adversary = noise.adversary
        if adversary is None:
            report.error("missing adversary", "noise.adversary is required for adversarial noise")
        elif adversary.kind not in ADVERSARIES:
            report.error("unknown adversary", f"noise.adversary.kind={adversary.kind!r}")
        else:
            if not 0.0 <= adversary.p <= 1.0:
                report.error("flip probability out of range", f"noise.adversary.p={adversary.p}")
            if adversary.tau is not None and len(adversary.tau) != config.k:
                report.error("dimension mismatch", f"noise.adversary.tau has {len(adversary.tau)} entries, k={config.k}")


def _check_initial(config: SimConfig, report: ValidationReport):
    init = config.initial
    if init.kind not in INITIAL_KINDS:
        report.error("unknown initial assignment", f"initial.kind={init.kind!r}")
    elif init.kind == "explicit":
        a = init.assignment or ()
        if len(a) != config.n:
            report.error("initial assignment length", f"{len(a)} entries, n={config.n}")
        elif any(x < IDLE or x > config.k for x in a):
            report.error("malformed assignment", f"initial.assignment has entries outside 0..{config.k}")
    elif init.kind == "loads":
        loads = init.loads or ()
        if len(loads) != config.k:
            report.error("dimension mismatch", f"initial.loads has {len(loads)} entries, k={config.k}")
        elif any(x < 0 for x in loads) or sum(loads) > config.n:
            report.error("initial loads", f"initial.loads={list(loads)} must be non-negative with sum <= n")


def _check_probabilities(config: SimConfig, report: ValidationReport):
    """分岐確率が [0, 1] に収まるか"""
    c = config.algorithm.constants
    bad = [f"{f.name}={getattr(c, f.name)}" for f in fields(c) if not getattr(c, f.name) > 0]
    if bad:
        report.error("non-positive constant", f"algorithm constants must be positive: {', '.join(bad)}")
        return
    g = Fraction(str(config.gamma))
    e = Fraction(str(config.epsilon))
    kind = config.algorithm.kind
    probs = {}
    if kind == "ant":
        probs = {"pause": c.c_s * g, "leave": g / c.c_d}
    elif kind == "precise-sigmoid":
        probs = {"pause": e * c.c_s * g / c.c_chi, "leave": g / (c.c_chi * c.c_d)}
    elif kind == "precise-adversarial":
        probs = {"pause": e * g / c.c_r, "leave": e * g / c.c_r}
    for name, p in probs.items():
        if not 0 <= p <= 1:
            report.error("probability out of range", f"{kind} {name} probability {float(p):.4f} > 1")
    if kind == "precise-adversarial":
        r1 = math.ceil(c.c_r / e)
        # r = 1 と r = r1 の分岐が重ならないこと
        if r1 < 2:
            report.error("phase too short", f"r1={r1}; need r1 >= 2")


def validate_config(config: SimConfig) -> ValidationReport:
    """構造エラーと理論上の仮定違反（警告）を列挙する"""
    from noise import critical_value

    report = ValidationReport()

    # ----- 構造エラー -----
    if config.n < 1:
        report.error("non-positive n", f"n={config.n}")
    if config.k != len(config.demands):
        report.error("dimension mismatch", f"k={config.k} but {len(config.demands)} demands")
    if any(d < 1 for d in config.demands):
        report.error("non-positive demand", f"demands={list(config.demands)}")
    if config.horizon < 1:
        report.error("zero horizon", f"horizon={config.horizon}")
    if config.record_every < 1:
        report.error("record_every out of range", f"record_every={config.record_every}")
    if not 0 <= config.seed < 2**64:
        report.error("seed out of range", f"seed={config.seed} not a 64-bit unsigned integer")
    if config.round_offset < 0:
        report.error("negative round_offset", f"round_offset={config.round_offset}")
    if not 0 < config.gamma < 1:
        report.error("gamma out of range", f"gamma={config.gamma} not in (0, 1)")
    if not 0 < config.epsilon <= 1:
        report.error("epsilon out of range", f"epsilon={config.epsilon} not in (0, 1]")
    if config.algorithm.kind not in ALGORITHM_KINDS:
        report.error("unknown algorithm", f"algorithm.kind={config.algorithm.kind!r}")
    _check_noise(config, report)
    _check_initial(config, report)
    if report.ok:
        _check_probabilities(config, report)

    if not report.ok:
        return report

    # ----- 仮定違反（警告） -----
    n = config.n
    if sum(config.demands) > n / 2:
        report.warn("demand-sum exceeds n/2", f"sum(d)={sum(config.demands)} > n/2={n / 2:g}")
    if n >= 2:
        low = [d for d in config.demands if d < math.log2(n)]
        if low:
            report.warn("demand below log2 n", f"demands {low} < log2(n)={math.log2(n):.2f}")

    if config.noise.kind != "exact" and n >= 2:
        gamma_star = critical_value(config.noise, config.demands, n)
        if gamma_star > 0.5:
            report.warn("critical value exceeds 1/2", f"gamma*={gamma_star:.6f}")
        if config.algorithm.kind == "ant":
            # γ = γ* を浮動小数点誤差で弾かないよう相対 1e-9 の余裕
            if not gamma_star * (1 - 1e-9) <= config.gamma <= 1 / 16:
                report.warn(
                    "gamma outside [gamma*, 1/16]",
                    f"gamma={config.gamma} with gamma*={gamma_star:.6f}",
                )

    return report


def require_valid(config: SimConfig, ignore: tuple[str, ...] = ()) -> ValidationReport:
    """エラーがあれば ConfigError を送出"""
    report = validate_config(config)
    for issue in report.errors:
        if issue.name not in ignore:
            raise ConfigError(f"{issue.name}: {issue.message}", field_name=issue.name)
    return report
