import numpy as np


def sample_evenly_indices(count: int, max_elements: int = 1000) -> np.ndarray:
    """At most `max_elements` indices spread evenly over range(count)."""
    if count <= max_elements:
        return np.arange(count)
    step = count / max_elements
    return np.arange(0, count, step).astype(int)[:max_elements]
