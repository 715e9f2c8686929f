"""
カウンタベース乱数

(seed, round, purpose) をキーに Philox のカウンタを決め、
アリ番号（とタスク番号）で配列を引く。反復順序や並列化に依存しない。
"""
from functools import lru_cache

import numpy as np

# ========== 用途タグ ==========
FEEDBACK = 1    # シグモイドのフィードバック (n, k)
DECIDE = 2      # 一時停止・離脱の判定 (n,)
CHOICE = 3      # 参加先タスクの一様選択 (n,)
ACTOR = 4       # 逐次モデルで行動するアリ (1,)
INITIAL = 5     # uniform-random 初期割り当て (n,)
ADVERSARY = 6   # 敵対者の乱択 (n, k)

_MASK64 = (1 << 64) - 1


class RandomnessContext:
    """マスターシードから用途別の一様乱数列を導出する"""

    def __init__(self, seed: int, round_offset: int = 0):
        self.seed = int(seed) & _MASK64
        self.round_offset = int(round_offset)

    def generator(self, round_index: int, purpose: int) -> np.random.Generator:
        # 下位ワードは描画ごとに進むため、round と purpose は上位ワードに置く
        counter = [0, 0, purpose, (round_index + self.round_offset) & _MASK64]
        return np.random.Generator(np.random.Philox(key=self.seed, counter=counter))

    def uniforms(self, round_index: int, purpose: int, shape) -> np.ndarray:
        """[0, 1) の一様乱数（同じ入力なら同じ配列）"""
        return _cached_uniforms(self.seed, self.round_offset, round_index, purpose, tuple(np.atleast_1d(shape)))

    def for_ant(self, round_index: int, ant: int, n: int) -> "AntDraws":
        return AntDraws(self, round_index, ant, n)

    def __repr__(self):
        return f"RandomnessContext(seed={self.seed}, round_offset={self.round_offset})"


@lru_cache(maxsize=32)
def _cached_uniforms(seed, round_offset, round_index, purpose, shape):
    ctx = RandomnessContext(seed, round_offset)
    values = ctx.generator(round_index, purpose).random(shape)
    values.flags.writeable = False
    return values


class AntDraws:
    """1匹のアリから見た乱数（アルゴリズムの step に渡す）"""

    def __init__(self, ctx: RandomnessContext, round_index: int, ant: int, n: int):
        self.ctx = ctx
        self.round_index = round_index
        self.ant = ant
        self.n = n

    def uniform(self, purpose: int) -> float:
        return float(self.ctx.uniforms(self.round_index, purpose, self.n)[self.ant])


class GeneratorDraws:
    """numpy Generator から引く乱数（単体テスト・統計テスト用）"""

    def __init__(self, generator: np.random.Generator):
        self.generator = generator

    def uniform(self, purpose: int) -> float:
        return float(self.generator.random())


class FixedDraws:
    """用途ごとに固定値を返す乱数"""

    def __init__(self, decide: float = 0.5, choice: float = 0.0):
        self.values = {DECIDE: decide, CHOICE: choice}

    def uniform(self, purpose: int) -> float:
        return self.values.get(purpose, 0.5)
