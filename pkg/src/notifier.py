"""
通知：実験完了サマリを Discord Webhook / Telegram Bot に送る（任意）
ENABLE_NOTIFY=true かつ送信先が設定されているときだけ動く。失敗してもログのみ。
"""
import asyncio
import logging

import aiohttp

from .config import Config, config
from .experiments import ExperimentReport

logger = logging.getLogger(__name__)


def format_summary(report: ExperimentReport) -> str:
    cfg = report.config
    lines = [f"🧪 実験完了: {cfg.name} (seed={cfg.master_seed}, trials={cfg.trials})"]
    for a in report.algorithms:
        lines.append(f"[{a.name}]")
        for p in a.points:
            rounds = "-" if p.mean_rounds is None else f"{p.mean_rounds:.2f}"
            beeps = "-" if p.mean_beeps is None else f"{p.mean_beeps:.3f}"
            where = f"{cfg.family}:{p.param}" if p.edge_p is None else f"{cfg.family}:{p.param},{p.edge_p}"
            lines.append(f"  {where} n={p.n} rounds={rounds} beeps={beeps} censored={p.censored_fraction:.1%}")
        if a.fit_log and a.fit_log2:
            better = "log2n" if a.log_fit_better() else "log2²n"
            lines.append(f"  fit: {better} の残差が小さい")
    return "\n".join(lines)


class DiscordNotifier:
    """Discord Webhook"""

    def __init__(self, session: aiohttp.ClientSession, cfg: Config = config):
        self.session = session
        self.url = cfg.discord_webhook_url
        self.enabled = bool(self.url)

    async def send(self, text: str):
        if not self.enabled:
            return
        try:
            async with self.session.post(self.url, json={"content": f"```\n{text[:1900]}\n```"}) as resp:
                if resp.status in (200, 204):
                    logger.info("Discord通知送信完了")
                else:
                    logger.error(f"Discord通知エラー: {resp.status}")
        except Exception as e:
            logger.error(f"Discord通知例外: {e}")


class TelegramNotifier:
    """Telegram Bot通知"""

    def __init__(self, session: aiohttp.ClientSession, cfg: Config = config):
        self.session = session
        self.token = cfg.telegram_bot_token
        self.chat_id = cfg.telegram_chat_id
        self.enabled = bool(self.token and self.chat_id)

    async def send(self, text: str):
        if not self.enabled:
            return
        url = f"https://api.telegram.org/bot{self.token}/sendMessage"
        try:
            async with self.session.post(url, json={"chat_id": self.chat_id, "text": text[:4000]}) as resp:
                if resp.status == 200:
                    logger.info("Telegram通知送信完了")
                else:
                    logger.error(f"Telegram通知エラー: {resp.status}")
        except Exception as e:
            logger.error(f"Telegram通知例外: {e}")


class NotificationHub:
    """2チャネル同時配信"""

    def __init__(self, session: aiohttp.ClientSession, cfg: Config = config):
        self.discord = DiscordNotifier(session, cfg)
        self.telegram = TelegramNotifier(session, cfg)

    @property
    def enabled(self) -> bool:
        return self.discord.enabled or self.telegram.enabled

    async def broadcast(self, text: str):
        results = await asyncio.gather(
            self.discord.send(text),
            self.telegram.send(text),
            return_exceptions=True,
        )
        for name, r in zip(("Discord", "Telegram"), results):
            if isinstance(r, Exception):
                logger.error(f"通知エラー [{name}]: {r}")


async def _notify(text: str, cfg: Config):
    async with aiohttp.ClientSession(timeout=aiohttp.ClientTimeout(total=30)) as session:
        hub = NotificationHub(session, cfg)
        if hub.enabled:
            await hub.broadcast(text)


def notify_experiment(report: ExperimentReport, cfg: Config = config) -> bool:
    """送信を試みたら True"""
    if not cfg.enable_notify or not (cfg.discord_webhook_url or (cfg.telegram_bot_token and cfg.telegram_chat_id)):
        logger.debug("通知無効")
        return False
    try:
        asyncio.run(_notify(format_summary(report), cfg))
    except Exception as e:
        logger.error(f"通知失敗: {e}")
    return True
