"""
共通設定とロガー

環境変数（.env 対応）からサービスレベルの設定を読み込み、
各モジュールで使うロガーを生成する。

Environment:
  ALLOC_OUT_DIR          - 出力ディレクトリ（run/sweep/accept/oracle のデフォルト）
  ALLOC_LOG_DIR          - ログディレクトリ
  ALLOC_ENABLE_FILE_LOG  - 日付別ログファイルを書くか (true|false)
  ALLOC_DEBUG            - コンソールをDEBUGレベルにするか (true|false)
  ALLOC_JOBS             - sweep の並列数デフォルト
"""
import os
import logging
from pathlib import Path
from datetime import datetime
from dotenv import load_dotenv

# ========== 環境変数読み込み ==========
load_dotenv()

# ========== 設定 ==========
OUT_DIR = Path(os.environ.get("ALLOC_OUT_DIR", "out"))
DEFAULT_JOBS = int(os.environ.get("ALLOC_JOBS", "1"))

# ========== ログ設定 ==========
LOG_DIR = Path(os.environ.get("ALLOC_LOG_DIR", Path(__file__).parent / "logs"))
ENABLE_FILE_LOG = os.environ.get("ALLOC_ENABLE_FILE_LOG", "false").lower() == "true"
DEBUG_MODE = os.environ.get("ALLOC_DEBUG", "false").lower() == "true"


def get_logger(name: str, tag: str | None = None) -> logging.Logger:
    """モジュール用ロガーを取得（ハンドラは初回のみ追加）"""
    logger = logging.getLogger(name)
    if logger.handlers:
        return logger

    logger.setLevel(logging.DEBUG)

    # コンソールハンドラ
    console_handler = logging.StreamHandler()
    console_handler.setLevel(logging.DEBUG if DEBUG_MODE else logging.INFO)
    console_handler.setFormatter(logging.Formatter(
        f"[%(asctime)s] [{tag or name}] %(message)s", datefmt="%H:%M:%S"
    ))
    logger.addHandler(console_handler)

    # ファイルハンドラ（日付別ファイル）
    if ENABLE_FILE_LOG:
        LOG_DIR.mkdir(parents=True, exist_ok=True)
        today = datetime.now().strftime("%Y-%m-%d")
        file_handler = logging.FileHandler(LOG_DIR / f"alloc-sim-{today}.log", encoding="utf-8")
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(
            "%(asctime)s [%(levelname)s] %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S"
        ))
        logger.addHandler(file_handler)

    return logger


def make_log(logger: logging.Logger):
    """log(msg, level) ヘルパーを生成"""
    def log(msg: str, level: str = "info"):
        """ログ出力"""
        if level == "debug":
            logger.debug(msg)
        elif level == "warning":
            logger.warning(msg)
        elif level == "error":
            logger.error(msg)
        else:
            logger.info(msg)
    return log
