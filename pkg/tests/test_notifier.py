import asyncio

import pytest

from src.config import Config
from src.experiments import ExperimentConfig, run_experiment
from src.notifier import DiscordNotifier, NotificationHub, TelegramNotifier, format_summary, notify_experiment


class FakeResponse:
    def __init__(self, status: int):
        self.status = status

    async def __aenter__(self):
        return self

    async def __aexit__(self, *exc):
        return False


class FakeSession:
    def __init__(self, status: int = 200):
        self.status = status
        self.posts = []

    def post(self, url, json=None):
        self.posts.append((url, json))
        return FakeResponse(self.status)


@pytest.fixture(scope="module")
def report():
    cfg = ExperimentConfig(name="tiny", family="gnp", sweep=(10, 20), trials=2, master_seed=3)
    return run_experiment(cfg)


def test_format_summary(report):
    text = format_summary(report)
    assert text.splitlines()[0].startswith("🧪 実験完了: tiny")
    assert "[mis-feedback]" in text
    assert "gnp:10 n=10" in text


def test_disabled_by_default(report):
    assert not notify_experiment(report, Config(enable_notify=False))
    assert not notify_experiment(report, Config(enable_notify=True, discord_webhook_url="", telegram_bot_token=""))


def test_hub_sends_to_configured_channels():
    session = FakeSession(status=204)
    cfg = Config(discord_webhook_url="https://discord.invalid/hook", telegram_bot_token="", telegram_chat_id="")
    hub = NotificationHub(session, cfg)
    assert hub.enabled
    asyncio.run(hub.broadcast("hello"))
    assert session.posts == [("https://discord.invalid/hook", {"content": "```\nhello\n```"})]


def test_telegram_needs_token_and_chat():
    session = FakeSession()
    assert not TelegramNotifier(session, Config(telegram_bot_token="t", telegram_chat_id="")).enabled
    notifier = TelegramNotifier(session, Config(telegram_bot_token="t", telegram_chat_id="42"))
    asyncio.run(notifier.send("x" * 5000))
    url, payload = session.posts[0]
    assert url == "https://api.telegram.org/bott/sendMessage"
    assert payload["chat_id"] == "42" and len(payload["text"]) == 4000


def test_send_errors_are_swallowed():
    class BrokenSession:
        def post(self, url, json=None):
            raise ConnectionError("down")

    asyncio.run(DiscordNotifier(BrokenSession(), Config(discord_webhook_url="https://x.invalid")).send("hi"))
