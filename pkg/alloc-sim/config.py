"""
実験設定ファイル（YAML）の読み込み

  load_config(path, overrides)      YAML + --override → SimConfig
  config_from_dict / config_to_dict 辞書との相互変換（出力ファイルに埋め込む）
  load_experiment(path)             sweep 用の ExperimentSpec

gamma は数値のほか "critical" や "2*critical"（γ* の倍数）も書ける。
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import yaml

from core import (
    AdversaryStrategy,
    AlgorithmConstants,
    AlgorithmSpec,
    ConfigError,
    InitialAssignmentSpec,
    NoiseSpec,
    SimConfig,
)

TOP_KEYS = {"n", "k", "demands", "gamma", "epsilon", "horizon", "seed", "round_offset",
            "record_every", "noise", "algorithm", "initial"}
NOISE_KEYS = {"kind", "lambda", "gamma_ad", "adversary", "correlated"}
ADVERSARY_KEYS = {"kind", "p", "shifted", "tau"}
ALGORITHM_KEYS = {"kind", "constants"}
CONSTANT_KEYS = {"c_d", "c_s", "c_chi", "c_r", "c_replay"}
INITIAL_KEYS = {"kind", "assignment", "loads"}
REQUIRED = ("n", "demands", "gamma", "horizon")


# ========== 読み込み ==========

def read_yaml(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config not found: {path}", field_name="config")
    try:
        with open(path, encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"config unreadable: {path}: {e}", field_name="config") from e
    if not isinstance(data, dict):
        raise ConfigError(f"config must be a mapping: {path}", field_name="config")
    return data


def apply_override(data: dict, override: str) -> dict:
    """'noise.lambda=2.5' 形式の上書き（値は YAML のスカラー・リストとして解釈）"""
    if "=" not in override:
        raise ConfigError(f"override must be path=value: {override!r}", field_name=override)
    path, raw = override.split("=", 1)
    keys = [k for k in path.strip().split(".") if k]
    if not keys:
        raise ConfigError(f"empty override path: {override!r}", field_name=override)
    return set_path(data, keys, yaml.safe_load(raw))


def set_path(data: dict, keys: list[str], value) -> dict:
    node = data
    for key in keys[:-1]:
        child = node.get(key)
        if not isinstance(child, dict):
            child = {}
            node[key] = child
        node = child
    node[keys[-1]] = value
    return data


def load_config(path, overrides=()) -> SimConfig:
    data = read_yaml(path)
    for o in overrides:
        apply_override(data, o)
    return config_from_dict(data)


# ========== 辞書 → SimConfig ==========

def _check_keys(section: dict, allowed: set, prefix: str):
    if not isinstance(section, dict):
        raise ConfigError(f"{prefix or 'config'} must be a mapping", field_name=prefix or "config")
    for key in section:
        if key not in allowed:
            name = f"{prefix}.{key}" if prefix else str(key)
            raise ConfigError(f"unknown key: {name}", field_name=name)


def _int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{name} must be an integer, got {value!r}", field_name=name)
    return value


def _number(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be a number, got {value!r}", field_name=name)
    return float(value)


def _fraction(value, name: str) -> Fraction:
    try:
        return Fraction(str(value))
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"{name} must be a rational number, got {value!r}", field_name=name) from e


def _int_tuple(value, name: str) -> tuple[int, ...]:
    if not isinstance(value, (list, tuple)):
        raise ConfigError(f"{name} must be a list of integers", field_name=name)
    return tuple(_int(v, name) for v in value)


def _noise(data: dict) -> NoiseSpec:
    _check_keys(data, NOISE_KEYS, "noise")
    adversary = None
    if data.get("adversary") is not None:
        a = data["adversary"]
        if isinstance(a, str):
            a = {"kind": a}
        _check_keys(a, ADVERSARY_KEYS, "noise.adversary")
        adversary = AdversaryStrategy(
            kind=str(a.get("kind", "all-lack-in-grey")),
            p=_number(a.get("p", 0.0), "noise.adversary.p"),
            shifted=bool(a.get("shifted", False)),
            tau=_int_tuple(a["tau"], "noise.adversary.tau") if a.get("tau") is not None else None,
        )
    lam = data.get("lambda")
    gamma_ad = data.get("gamma_ad")
    return NoiseSpec(
        kind=str(data.get("kind", "sigmoid")),
        lam=_number(lam, "noise.lambda") if lam is not None else None,
        gamma_ad=_number(gamma_ad, "noise.gamma_ad") if gamma_ad is not None else None,
        adversary=adversary,
        correlated=bool(data.get("correlated", False)),
    )


def _algorithm(data) -> AlgorithmSpec:
    if isinstance(data, str):
        data = {"kind": data}
    _check_keys(data, ALGORITHM_KEYS, "algorithm")
    raw = data.get("constants") or {}
    _check_keys(raw, CONSTANT_KEYS, "algorithm.constants")
    values = {}
    for key, value in raw.items():
        name = f"algorithm.constants.{key}"
        values[key] = _int(value, name) if key == "c_replay" else _fraction(value, name)
    return AlgorithmSpec(kind=str(data.get("kind", "ant")), constants=AlgorithmConstants(**values))


def _initial(data) -> InitialAssignmentSpec:
    if isinstance(data, str):
        data = {"kind": data}
    _check_keys(data, INITIAL_KEYS, "initial")
    assignment = data.get("assignment")
    loads = data.get("loads")
    return InitialAssignmentSpec(
        kind=str(data.get("kind", "all-idle")),
        assignment=_int_tuple(assignment, "initial.assignment") if assignment is not None else None,
        loads=_int_tuple(loads, "initial.loads") if loads is not None else None,
    )


def resolve_gamma(value, noise: NoiseSpec, demands, n: int) -> float:
    """数値、"critical"、"<係数>*critical" を γ に直す"""
    if isinstance(value, str):
        text = value.replace(" ", "")
        factor = 1.0
        if text != "critical":
            head, _, tail = text.partition("*")
            if tail != "critical":
                raise ConfigError(f"gamma must be a number or '<factor>*critical', got {value!r}",
                                  field_name="gamma")
            try:
                factor = float(head)
            except ValueError as e:
                raise ConfigError(f"gamma factor is not a number: {head!r}", field_name="gamma") from e
        from noise import critical_value
        try:
            return factor * critical_value(noise, demands, n)
        except (ValueError, TypeError) as e:
            raise ConfigError(f"cannot resolve gamma: {e}", field_name="gamma") from e
    return _number(value, "gamma")


def config_from_dict(data: dict) -> SimConfig:
    _check_keys(data, TOP_KEYS, "")
    for key in REQUIRED:
        if key not in data:
            raise ConfigError(f"missing field: {key}", field_name=key)

    n = _int(data["n"], "n")
    demands = _int_tuple(data["demands"], "demands")
    noise_spec = _noise(data.get("noise") or {})
    return SimConfig(
        n=n,
        k=_int(data.get("k", len(demands)), "k"),
        demands=demands,
        noise=noise_spec,
        algorithm=_algorithm(data.get("algorithm") or {}),
        gamma=resolve_gamma(data["gamma"], noise_spec, demands, n),
        horizon=_int(data["horizon"], "horizon"),
        seed=_int(data.get("seed", 0), "seed"),
        epsilon=_number(data.get("epsilon", 0.5), "epsilon"),
        initial=_initial(data.get("initial") or {}),
        round_offset=_int(data.get("round_offset", 0), "round_offset"),
        record_every=_int(data.get("record_every", 1), "record_every"),
    )


# ========== SimConfig → 辞書 ==========

def _constant(x):
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else str(x)
    return x


def config_to_dict(config: SimConfig) -> dict:
    """完全に解決済みの設定（config_from_dict で読み戻せる）"""
    noise = {"kind": config.noise.kind}
    if config.noise.lam is not None:
        noise["lambda"] = config.noise.lam
    if config.noise.gamma_ad is not None:
        noise["gamma_ad"] = config.noise.gamma_ad
    if config.noise.adversary is not None:
        a = config.noise.adversary
        noise["adversary"] = {"kind": a.kind, "p": a.p, "shifted": a.shifted,
                              "tau": list(a.tau) if a.tau is not None else None}
    if config.noise.correlated:
        noise["correlated"] = True

    c = config.algorithm.constants
    initial = {"kind": config.initial.kind}
    if config.initial.assignment is not None:
        initial["assignment"] = list(config.initial.assignment)
    if config.initial.loads is not None:
        initial["loads"] = list(config.initial.loads)

    return {
        "n": config.n,
        "k": config.k,
        "demands": list(config.demands),
        "gamma": config.gamma,
        "epsilon": config.epsilon,
        "horizon": config.horizon,
        "seed": config.seed,
        "round_offset": config.round_offset,
        "record_every": config.record_every,
        "noise": noise,
        "algorithm": {
            "kind": config.algorithm.kind,
            "constants": {
                "c_d": _constant(c.c_d),
                "c_s": _constant(c.c_s),
                "c_chi": _constant(c.c_chi),
                "c_r": _constant(c.c_r),
                "c_replay": c.c_replay,
            },
        },
        "initial": initial,
    }


# ========== sweep ==========

@dataclass
class ExperimentSpec:
    """基本設定 + sweep 軸 + seed 列"""
    base: dict
    axes: list[tuple[str, list]] = field(default_factory=list)
    seeds: list[int] = field(default_factory=lambda: [0])
    out_dir: str | None = None

    def cells(self) -> list[dict]:
        """軸の直積。各セルは {path: value}"""
        if not self.axes:
            return [{}]
        names = [name for name, _ in self.axes]
        return [dict(zip(names, combo)) for combo in itertools.product(*(v for _, v in self.axes))]

    def cell_config(self, cell: dict, seed: int) -> dict:
        import copy
        data = copy.deepcopy(self.base)
        for path, value in cell.items():
            set_path(data, path.split("."), value)
        data["seed"] = seed
        return data


def _axis_exists(base: dict, path: str) -> bool:
    keys = path.split(".")
    allowed = {
        (): TOP_KEYS, ("noise",): NOISE_KEYS, ("noise", "adversary"): ADVERSARY_KEYS,
        ("algorithm",): ALGORITHM_KEYS, ("algorithm", "constants"): CONSTANT_KEYS,
        ("initial",): INITIAL_KEYS,
    }
    return keys[-1] in allowed.get(tuple(keys[:-1]), set())


def experiment_from_dict(data: dict, base_dir: Path | None = None) -> ExperimentSpec:
    _check_keys(data, {"base", "base_config", "sweep", "seeds", "out"}, "")
    if "base" in data:
        base = data["base"]
    elif "base_config" in data:
        base = read_yaml((base_dir or Path(".")) / data["base_config"])
    else:
        raise ConfigError("missing field: base", field_name="base")

    axes = []
    for path, values in (data.get("sweep") or {}).items():
        if not _axis_exists(base, path):
            raise ConfigError(f"unknown sweep axis: {path}", field_name=f"sweep.{path}")
        if not isinstance(values, list) or not values:
            raise ConfigError(f"empty sweep axis: {path}", field_name=f"sweep.{path}")
        axes.append((path, values))

    seeds = data.get("seeds", 1)
    if isinstance(seeds, int) and not isinstance(seeds, bool):
        if seeds < 1:
            raise ConfigError(f"seeds must be >= 1, got {seeds}", field_name="seeds")
        first = int(base.get("seed", 0))
        seeds = [first + i for i in range(seeds)]
    elif isinstance(seeds, list) and seeds:
        seeds = [_int(s, "seeds") for s in seeds]
    else:
        raise ConfigError(f"seeds must be a positive count or a list, got {seeds!r}", field_name="seeds")
    return ExperimentSpec(base=base, axes=axes, seeds=seeds, out_dir=data.get("out"))


def load_experiment(path, overrides=()) -> ExperimentSpec:
    path = Path(path)
    spec = experiment_from_dict(read_yaml(path), base_dir=path.parent)
    for o in overrides:
        apply_override(spec.base, o)
    return spec
