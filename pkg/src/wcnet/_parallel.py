from concurrent.futures import ThreadPoolExecutor


def pmap(func, items, n_jobs=1):
    """Ordered map, threaded when ``n_jobs > 1``.

    Callers give every job its own generator stream, so results do not depend
    on scheduling.
    """
    items = list(items)
    if n_jobs is None or n_jobs <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(func, items))
