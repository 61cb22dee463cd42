"""Scripted completion oracle: replays a fixed list of replies in order."""

import json
import threading
from pathlib import Path
from typing import Sequence

from ..errors import EmptyInput, ScriptExhausted
from .types import ChatMessage, VALID_ROLES


class ScriptedCompleter:
    """Returns scripted replies one at a time; raises ScriptExhausted at the end.

    The cursor is lock-guarded so concurrent callers each consume exactly one
    entry. Prompts are recorded for inspection but never influence replies.
    """

    def __init__(self, replies: Sequence[str], loop: bool = False):
        self.replies = list(replies)
        self.loop = loop  # demo convenience: cycle instead of exhausting
        self._cursor = 0
        self._lock = threading.Lock()
        self.calls: list[list[ChatMessage]] = []

    @classmethod
    def from_file(cls, path: Path | str, loop: bool = False) -> "ScriptedCompleter":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        replies = payload.get("replies")
        if not isinstance(replies, list) or not all(isinstance(r, str) for r in replies):
            raise ValueError(f"script file {path} must contain {{\"replies\": [str...]}}")
        return cls(replies, loop=loop)

    @property
    def position(self) -> int:
        with self._lock:
            return self._cursor

    @property
    def remaining(self) -> int:
        with self._lock:
            return len(self.replies) - self._cursor

    def complete(
        self,
        messages: Sequence[ChatMessage],
        temperature: float = 0.0,
        max_tokens: int = 1024,
    ) -> str:
        _validate_messages(messages)
        with self._lock:
            if self._cursor >= len(self.replies):
                if not (self.loop and self.replies):
                    raise ScriptExhausted(
                        f"script exhausted after {len(self.replies)} replies"
                    )
                self._cursor = 0
            reply = self.replies[self._cursor]
            self._cursor += 1
            self.calls.append(list(messages))
        return reply


def _validate_messages(messages: Sequence[ChatMessage]) -> None:
    if len(messages) == 0:
        raise EmptyInput("complete requires at least one message")
    for m in messages:
        if m.role not in VALID_ROLES:
            raise ValueError(f"invalid message role {m.role!r}; expected one of {sorted(VALID_ROLES)}")
