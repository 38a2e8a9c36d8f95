import sys
from multiprocessing import Pool
from typing import Callable, List, Optional, Sequence

from tqdm import tqdm


def track_map(func: Callable,
              items: Sequence,
              jobs: int = 1,
              desc: Optional[str] = None) -> List:
    """Map ``func`` over ``items`` with a progress bar, keeping the order.

    Args:
        func (Callable): A picklable callable when ``jobs > 1``.
        items (Sequence): The tasks.
        jobs (int): Number of worker processes. Values below 2 run in the
            current process. Defaults to 1.
        desc (str, optional): Progress bar label.
    """
    disable = not sys.stderr.isatty()
    if jobs <= 1 or len(items) <= 1:
        return [
            func(item)
            for item in tqdm(items, desc=desc, disable=disable, leave=False)
        ]
    with Pool(min(jobs, len(items))) as pool:
        return list(
            tqdm(
                pool.imap(func, items),
                total=len(items),
                desc=desc,
                disable=disable,
                leave=False))
