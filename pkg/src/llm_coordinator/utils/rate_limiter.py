"""Sliding-window rate limiting for live chat-completion providers."""

import asyncio
import logging
import time
from collections import deque
from typing import Awaitable, Callable, Deque, Optional

from ..config import RateLimitConfig

logger = logging.getLogger(__name__)

MINUTE = 60.0
HOUR = 3600.0


class RateLimiter:
    """Per-provider requests-per-minute / per-hour limiter."""

    def __init__(
        self,
        config: RateLimitConfig,
        provider_name: str,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], Awaitable[None]] = asyncio.sleep,
    ):
        """Initialize rate limiter.

        Args:
            config: Rate limit configuration
            provider_name: Name of the provider, used in log messages
            clock: Monotonic time source (seconds)
            sleep: Coroutine used to wait; injectable for tests
        """
        self.config = config
        self.provider_name = provider_name
        self._clock = clock
        self._sleep = sleep
        self._minute: Deque[float] = deque()
        self._hour: Deque[float] = deque()
        self._lock = asyncio.Lock()

    def _cleanup(self, now: float) -> None:
        while self._minute and self._minute[0] <= now - MINUTE:
            self._minute.popleft()
        while self._hour and self._hour[0] <= now - HOUR:
            self._hour.popleft()

    def calculate_wait_time(self, now: Optional[float] = None) -> float:
        """Seconds until one more request fits in both windows."""
        now = self._clock() if now is None else now
        self._cleanup(now)
        wait = 0.0
        if len(self._minute) >= self.config.requests_per_minute:
            wait = max(wait, self._minute[0] + MINUTE - now)
        if len(self._hour) >= self.config.requests_per_hour:
            wait = max(wait, self._hour[0] + HOUR - now)
        return wait

    def try_acquire(self) -> bool:
        """Record a request if it fits right now; never waits."""
        now = self._clock()
        if self.calculate_wait_time(now) > 0:
            return False
        self._minute.append(now)
        self._hour.append(now)
        return True

    async def acquire(self) -> None:
        """Wait until a request slot is free, then take it."""
        async with self._lock:
            while not self.try_acquire():
                wait_time = self.calculate_wait_time()
                logger.debug(f"{self.provider_name}: rate limited, waiting {wait_time:.2f}s")
                await self._sleep(wait_time)
