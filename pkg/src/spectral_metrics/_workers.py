"""Worker-count policy shared by the parallel code paths."""

import os

THREADS_ENV = "SPECTRAL_METRICS_THREADS"


def worker_count(requested: int | None = None) -> int:
    """Number of worker threads to use.

    An explicit ``requested`` value wins; otherwise ``SPECTRAL_METRICS_THREADS``
    caps the count, with ``0`` (or unset) meaning one worker per CPU.
    """
    if requested is None:
        raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
        try:
            requested = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if requested < 0:
        raise ValueError(f"worker count must be nonnegative, got {requested}")
    if requested == 0:
        return os.cpu_count() or 1
    return requested
