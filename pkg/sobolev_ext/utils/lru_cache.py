from collections import OrderedDict
from typing import Any, Callable, Hashable


class LRUCache:
    """
    Keeps the most recently used Whitney covers and extension plans so that
    commands sweeping a p-list or a grid ladder do not decompose twice.
    """

    def __init__(self, capacity: int = 8):
        self.cache: "OrderedDict[Hashable, Any]" = OrderedDict()
        self.capacity = capacity
        self.hits = 0
        self.misses = 0

    def get(self, key: Hashable) -> Any:
        if key in self.cache:
            self.cache.move_to_end(key)
            self.hits += 1
            return self.cache[key]
        self.misses += 1
        return None

    def set(self, key: Hashable, value: Any):
        if key in self.cache:
            self.cache[key] = value
            self.cache.move_to_end(key)
            return
        if len(self.cache) >= self.capacity:
            self.cache.popitem(last=False)
        self.cache[key] = value

    def get_or_build(self, key: Hashable, builder: Callable[[], Any]) -> Any:
        value = self.get(key)
        if value is None:
            value = builder()
            self.set(key, value)
        return value

    def clear(self):
        self.cache.clear()

    def __len__(self):
        return len(self.cache)
