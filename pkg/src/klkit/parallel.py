"""Thread-pool helper shared by the study and Monte-Carlo drivers."""
import os
from concurrent.futures import ThreadPoolExecutor


def thread_count(requested=None):
    """Worker count: ``requested`` if given, capped by KLKIT_THREADS."""
    cap = os.environ.get("KLKIT_THREADS")
    n = requested if requested is not None else (os.cpu_count() or 1)
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ValueError(f"KLKIT_THREADS must be an integer, got {cap!r}") from None
    return max(1, int(n))


def ordered_map(fn, items, threads=None):
    """``[fn(x) for x in items]``, evaluated on a pool, in input order."""
    items = list(items)
    n = min(thread_count(threads), max(len(items), 1))
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
