"""Terminal status spinner for long-running commands."""

from __future__ import annotations

from asyncio import create_task, to_thread
from sys import stdout
from time import sleep
from typing import Callable, Optional, TextIO


class StatusSpinner:
    """Single-line spinner showing a message and optional progress."""

    def __init__(self, stream: Optional[TextIO] = None, unit: str = ""):
        self.spinner_chars = "|/-\\"
        self.index = 0
        self.stream = stream or stdout
        self.unit = unit
        self.current_progress: Optional[str] = None

    async def show_progress(self, message: str, operation):
        """Animate the spinner while awaiting ``operation``; return its result."""
        task = create_task(operation)
        self.current_progress = None
        self._update_line(f"⚡ {message}")

        while not task.done():
            progress_text = f" {self.current_progress}" if self.current_progress else ""
            self._update_line(f" {self.spinner_chars[self.index]} {message}{progress_text}")
            self.index = (self.index + 1) % len(self.spinner_chars)
            await to_thread(sleep, 0.1)

        return await task

    async def run(self, message: str, func: Callable, *args, **kwargs):
        """Run a blocking ``func`` in a worker thread under the spinner."""
        return await self.show_progress(message, to_thread(func, *args, **kwargs))

    def update_progress(self, completed: int, total: int):
        """Record a completed/total ratio for the next frame."""
        if total > 0:
            percentage = (completed * 100) // total
            unit = f" {self.unit}" if self.unit else ""
            self.current_progress = f"{completed}/{total}{unit} ({percentage}%)"

    def update_status(self, message: str):
        """Replace the spinner line with a final message and end the line."""
        self._update_line(message)
        self.stream.write("\n")
        self.stream.flush()

    def _update_line(self, message: str):
        self.stream.write(f"\r\033[K{message}")
        self.stream.flush()
