"""Utils package initialization."""

from .logging_setup import configure_logging
from .rate_limiter import RateLimiter

__all__ = ["RateLimiter", "configure_logging"]
