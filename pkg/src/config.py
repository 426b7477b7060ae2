"""設定管理"""
import os
from dataclasses import dataclass
from dotenv import load_dotenv

load_dotenv()


@dataclass
class Config:
    # シミュレーション既定値（CLIフラグで上書き可能）
    max_rounds: int = int(os.getenv("SIM_MAX_ROUNDS", "10000"))
    trials: int = int(os.getenv("SIM_TRIALS", "100"))
    jobs: int = int(os.getenv("SIM_JOBS", "1"))

    # 出力先
    data_dir: str = os.getenv("SIM_DATA_DIR", "data")

    # ログ
    log_level: str = os.getenv("LOG_LEVEL", "INFO")
    log_file: str = os.getenv("LOG_FILE", "")

    # 実験完了通知（任意）
    enable_notify: bool = os.getenv("ENABLE_NOTIFY", "false").lower() == "true"
    discord_webhook_url: str = os.getenv("DISCORD_WEBHOOK_URL", "")
    telegram_bot_token: str = os.getenv("TELEGRAM_BOT_TOKEN", "")
    telegram_chat_id: str = os.getenv("TELEGRAM_CHAT_ID", "")


config = Config()
