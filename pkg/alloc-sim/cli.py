"""
alloc-sim コマンドライン

  uv run python cli.py run    --config exp.yaml [--seed 42] [--horizon 1000] [--override gamma=0.2] [--out DIR]
  uv run python cli.py run    --resume-from out/exp-seed42.json --demands 600,400
  uv run python cli.py sweep  --config sweep.yaml [--jobs 4]
  uv run python cli.py accept oracle-equivalence [--quick] [--jobs 4]
  uv run python cli.py oracle --algorithm ant [--runs 100000] [--jobs 4]

設定ファイル（YAML）:

  n: 10000                    # アリの数
  demands: [1250, 1250]       # タスク別の需要（k は省略時 len(demands)）
  gamma: critical             # 数値 / "critical" / "2*critical"
  epsilon: 0.5
  horizon: 20000
  seed: 0
  round_offset: 0
  record_every: 1             # loads を記録する間隔（リグレットは全ラウンド）
  noise:
    kind: sigmoid             # sigmoid | adversarial | exact
    lambda: 0.29              # sigmoid のみ
    gamma_ad: 0.05            # adversarial のみ
    adversary:                # adversarial のみ
      kind: indistinguishability
      p: 0.0                  # correct-outside-random-inside の反転確率
      shifted: false
      tau: [50, 50]
    correlated: false         # true で (round, task) ごとに乱数を全アリで共有
  algorithm:
    kind: ant                 # ant | precise-sigmoid | precise-adversarial | trivial-sync | trivial-seq
    constants: {c_d: 19, c_s: 7/3, c_chi: 10, c_r: 32, c_replay: 4}
  initial:
    kind: all-idle            # all-idle | uniform-random | explicit | loads
    assignment: [...]         # explicit のみ（長さ n）
    loads: [...]              # loads のみ（長さ k）

終了コード: 0 成功 / 1 実行失敗・受け入れ不合格 / 2 設定エラー
"""
import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path

import acceptance
import engine
import oracle
from config import (
    apply_override,
    config_from_dict,
    config_to_dict,
    load_experiment,
    read_yaml,
)
from core import AllocError, ConfigError
from noise import critical_value, sigmoid_table
from settings import DEFAULT_JOBS, OUT_DIR, get_logger, make_log

logger = get_logger("cli")
log = make_log(logger)

SWEEP_COLUMNS = ["cell", "seed", "status", "avg_regret", "closeness", "exception_rounds", "total_regret",
                 "config"]


def _banner(title: str, items: dict):
    print("=" * 50)
    print(f"  {title}")
    print("=" * 50)
    for key, value in items.items():
        print(f"  {key}: {value}")
    print()


def _write_json(path: Path, data: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, ensure_ascii=False, indent=2, sort_keys=True)


def _resolve(data: dict, args) -> dict:
    for o in args.override or []:
        apply_override(data, o)
    if args.seed is not None:
        data["seed"] = args.seed
    if args.horizon is not None:
        data["horizon"] = args.horizon
    return data


# ========== run ==========

def _load_run_config(args):
    if args.resume_from:
        path = Path(args.resume_from)
        if not path.is_file():
            raise ConfigError(f"config not found: {path}", field_name="resume_from")
        with open(path, encoding="utf-8") as f:
            saved = json.load(f)
        config = config_from_dict(saved["config"])
        demands = [int(x) for x in args.demands.split(",")] if args.demands else config.demands
        resumed = engine.resume_from(config, saved["final_assignment"], demands)
        return config_from_dict(_resolve(config_to_dict(resumed), args)), path.stem + "-resumed"
    if not args.config:
        raise ConfigError("--config or --resume-from is required", field_name="config")
    data = _resolve(read_yaml(args.config), args)
    return config_from_dict(data), Path(args.config).stem


def cmd_run(args) -> int:
    config, stem = _load_run_config(args)
    out_dir = Path(args.out) if args.out else OUT_DIR
    name = f"{stem}-seed{config.seed}"

    _banner("alloc-sim run", {
        "アルゴリズム": config.algorithm.kind,
        "雑音": config.noise.kind,
        "n / k": f"{config.n} / {config.k}",
        "需要": list(config.demands),
        "γ": config.gamma,
        "ラウンド数": config.horizon,
        "seed": config.seed,
        "出力": out_dir,
    })

    trace = engine.run(config)
    csv_path = engine.write_trace_csv(trace, out_dir / f"{name}.csv")
    json_path = engine.write_summary_json(trace, out_dir / f"{name}.json", burn_in=args.burn_in)
    log(f"トレース: {csv_path}")
    log(f"サマリ: {json_path}")

    if args.sigmoid_table:
        if config.noise.kind != "sigmoid":
            log("sigmoid 以外の雑音なので表は出力しません", level="warning")
        else:
            gamma_star = critical_value(config.noise, config.demands, config.n)
            width = int(2 * gamma_star * max(config.demands)) + 1
            rows = sigmoid_table(config.noise.lam, config.demands, gamma_star, -width, width)
            table_path = out_dir / f"{stem}-sigmoid.csv"
            with open(table_path, "w", newline="", encoding="utf-8") as f:
                f.write(f"# config: {json.dumps(config_to_dict(config), sort_keys=True)}\n")
                writer = csv.DictWriter(f, fieldnames=["task", "deficit", "p_lack", "in_grey_zone"],
                                        lineterminator="\n")
                writer.writeheader()
                writer.writerows(rows)
            log(f"シグモイド表: {table_path}")

    print(f"  総リグレット: {trace.total_regret}  平均: {trace.average_regret:.3f}")
    return 0


# ========== sweep ==========

def _sweep_cell(index: int, cell: dict, seed: int, data: dict) -> dict:
    row = {"cell": index, "seed": seed, **cell, "config": json.dumps(data, sort_keys=True, default=str)}
    try:
        config = config_from_dict(data)
        row["config"] = json.dumps(config_to_dict(config), sort_keys=True)
        summary = engine.trace_summary(engine.run(config))
        row.update({
            "status": "ok",
            "avg_regret": summary["avg_regret"],
            "closeness": summary["closeness"],
            "exception_rounds": summary["exception_rounds"],
            "total_regret": summary["total_regret"],
        })
    except AllocError as e:
        row["status"] = f"failed:{e}"
    except Exception as e:
        # 1セルの想定外の失敗で sweep 全体を止めない
        logger.exception(f"セル {index} seed {seed} で例外")
        row["status"] = f"failed:{type(e).__name__}: {e}"
    return row


def cmd_sweep(args) -> int:
    spec = load_experiment(args.config, args.override or [])
    out_dir = Path(args.out or spec.out_dir or OUT_DIR)
    jobs = args.jobs or DEFAULT_JOBS
    cells = spec.cells()
    tasks = [(i, cell, seed, spec.cell_config(cell, seed)) for i, cell in enumerate(cells) for seed in spec.seeds]

    _banner("alloc-sim sweep", {
        "軸": {name: values for name, values in spec.axes},
        "セル数": len(cells),
        "seed": spec.seeds,
        "並列数": jobs,
        "出力": out_dir,
    })

    rows = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_sweep_cell, *t) for t in tasks]
            for future in as_completed(futures):
                rows.append(future.result())
    else:
        rows = [_sweep_cell(*t) for t in tasks]
    rows.sort(key=lambda r: (r["cell"], r["seed"]))

    axis_names = [name for name, _ in spec.axes]
    path = out_dir / f"{Path(args.config).stem}-sweep.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write(f"# base: {json.dumps(spec.base, sort_keys=True, default=str)}\n")
        writer = csv.DictWriter(f, fieldnames=axis_names + SWEEP_COLUMNS, extrasaction="ignore",
                                lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)

    failed = [r for r in rows if r["status"] != "ok"]
    for r in failed:
        log(f"セル {r['cell']} seed {r['seed']}: {r['status']}", level="warning")
    log(f"sweep 完了: {len(rows)} 行 ({len(failed)} 失敗) → {path}")
    return 1 if failed else 0


# ========== accept ==========

def cmd_accept(args) -> int:
    jobs = args.jobs or DEFAULT_JOBS
    _banner("alloc-sim accept", {"スイート": args.suite, "quick": args.quick, "並列数": jobs})
    result = acceptance.run_suite(args.suite, quick=args.quick, jobs=jobs)
    for c in result.criteria:
        mark = "PASS" if c.passed else "FAIL"
        print(f"  [{mark}] {c.name}: {c.measured} (expected {c.expected})")
    out_dir = Path(args.out) if args.out else OUT_DIR
    # 各判定の runs に解決済みの設定と seed が入る
    _write_json(out_dir / f"accept-{args.suite}.json", {"quick": args.quick, **result.to_dict()})
    return 0 if result.passed else 1


# ========== oracle ==========

def cmd_oracle(args) -> int:
    if args.config:
        config = config_from_dict(_resolve(read_yaml(args.config), args))
        name = Path(args.config).stem
    else:
        config = oracle.tiny_instance(args.algorithm, seed=args.seed or 0)
        name = f"tiny-{args.algorithm}"
    jobs = args.jobs or DEFAULT_JOBS
    _banner("alloc-sim oracle", {
        "アルゴリズム": config.algorithm.kind,
        "n / k": f"{config.n} / {config.k}",
        "ラウンド数": config.horizon,
        "MC 回数": args.runs,
        "並列数": jobs,
    })
    report = oracle.compare_mc_oracle(config, args.runs, jobs=jobs)
    out_dir = Path(args.out) if args.out else OUT_DIR
    data = {"config": config_to_dict(config), **report.to_dict()}
    _write_json(out_dir / f"oracle-{name}.json", data)
    print(f"  max TV: {report.max_tv:.5f}  {'PASS' if report.passed else 'FAIL'}")
    return 0 if report.passed else 1


# ========== メイン ==========

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="ノイズのある二値フィードバック下でのアリのタスク割り当てシミュレータ",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=False):
        p.add_argument("--config", required=config_required, help="YAML 設定ファイル")
        p.add_argument("--override", action="append", metavar="PATH=VALUE", help="設定の上書き（複数可）")
        p.add_argument("--seed", type=int, help="seed の上書き")
        p.add_argument("--horizon", type=int, help="ラウンド数の上書き")
        p.add_argument("--out", help=f"出力ディレクトリ（既定 {OUT_DIR}）")

    p_run = sub.add_parser("run", help="1回実行して CSV と JSON を出力")
    common(p_run)
    p_run.add_argument("--resume-from", help="前回の JSON サマリから再開")
    p_run.add_argument("--demands", help="再開時の新しい需要（カンマ区切り）")
    p_run.add_argument("--burn-in", type=int, help="closeness の burn-in ラウンド数")
    p_run.add_argument("--sigmoid-table", action="store_true", help="シグモイドとグレーゾーンの表も出力")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="パラメータ sweep")
    p_sweep.add_argument("--config", required=True, help="sweep 定義 YAML（base / sweep / seeds）")
    p_sweep.add_argument("--override", action="append", metavar="PATH=VALUE", help="base 設定の上書き")
    p_sweep.add_argument("--out", help="出力ディレクトリ")
    p_sweep.add_argument("--jobs", type=int, help="並列数")
    p_sweep.set_defaults(func=cmd_sweep)

    p_accept = sub.add_parser("accept", help="受け入れ実験")
    p_accept.add_argument("suite", help=f"スイート名: {', '.join(acceptance.SUITES)}")
    p_accept.add_argument("--quick", action="store_true", help="縮小サイズで実行")
    p_accept.add_argument("--jobs", type=int, help="並列数")
    p_accept.add_argument("--out", help="出力ディレクトリ")
    p_accept.set_defaults(func=cmd_accept)

    p_oracle = sub.add_parser("oracle", help="モンテカルロと厳密分布の比較")
    common(p_oracle)
    p_oracle.add_argument("--algorithm", default="ant", choices=list(oracle.KERNELS),
                          help="--config がないときに使う小さなインスタンス")
    p_oracle.add_argument("--runs", type=int, default=100_000, help="モンテカルロの回数")
    p_oracle.add_argument("--jobs", type=int, help="並列数")
    p_oracle.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        log(f"設定エラー: {e}", level="error")
        return 2
    except AllocError as e:
        log(f"エラー: {e}", level="error")
        return 1


if __name__ == "__main__":
    sys.exit(main())
