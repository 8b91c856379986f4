"""Find conspiracy-linked channel communities in a Telegram-style corpus and
measure how they monetize."""

__version__ = "0.1.0"
