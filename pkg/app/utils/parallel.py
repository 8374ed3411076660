"""
Ordered parallel map over independent slices
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(fn: Callable[[T], R], items: Iterable[T], max_workers: Optional[int] = None) -> List[R]:
    """Map fn over items with threads; results keep the input order"""
    from app.config import settings

    items = list(items)
    jobs = max_workers or settings.MAX_WORKERS
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    # LAPACK releases the GIL, so threads scale for the dense eigensolves
    with ThreadPoolExecutor(max_workers=min(jobs, len(items))) as ex:
        return list(ex.map(fn, items))
