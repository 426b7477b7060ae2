"""
Beep MIS Lab - ビーピングモデル分散アルゴリズム シミュレータ
フィードバック型 MIS 選択 / 分散貪欲彩色 / グローバル確率スケジュール比較

使い方:
  python main.py gen gnp:200,0.5 --seed 7 --out g.txt       → グラフ生成
  python main.py run --gen complete:4 --algorithm coloring-feedback --seed 1
  python main.py verify outcome.json --graph g.txt            → PASS / FAIL
  python main.py experiment paper-gnp --seed 1 --jobs 4       → 実験レポート（JSON + CSV）
"""
import logging
import sys

from src.cli import main as cli_main
from src.config import config


def setup_logging():
    # ログは標準エラーへ（標準出力の成果物をバイト単位で再現可能に保つ）
    handlers: list[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if config.log_file:
        handlers.append(logging.FileHandler(config.log_file, encoding="utf-8"))
    logging.basicConfig(
        level=getattr(logging, config.log_level.upper(), logging.INFO),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        handlers=handlers,
    )


def main():
    setup_logging()
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
