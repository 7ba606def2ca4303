import math
from functools import lru_cache
from itertools import product
from typing import List, Tuple

import numpy as np

MultiIndex = Tuple[int, ...]


@lru_cache(maxsize=None)
def multi_indices(n: int, max_order: int) -> Tuple[MultiIndex, ...]:
    """All alpha in N^n with |alpha| <= max_order, by total degree then reverse-lex."""
    if max_order < 0:
        return ()
    out: List[MultiIndex] = []
    for order in range(max_order + 1):
        out.extend(exact_order(n, order))
    return tuple(out)


@lru_cache(maxsize=None)
def exact_order(n: int, order: int) -> Tuple[MultiIndex, ...]:
    return tuple(sorted((a for a in product(range(order + 1), repeat=n) if sum(a) == order),
                        reverse=True))


def jet_size(n: int, k: int) -> int:
    """Number of multi-indices with |alpha| <= k-1: sum_j C(n+j-1, n-1)."""
    return sum(math.comb(n + j - 1, n - 1) for j in range(k))


def factorial(alpha: MultiIndex) -> int:
    out = 1
    for a in alpha:
        out *= math.factorial(a)
    return out


def order(alpha: MultiIndex) -> int:
    return sum(alpha)


def leq(beta: MultiIndex, alpha: MultiIndex) -> bool:
    return all(b <= a for b, a in zip(beta, alpha))


def add(alpha: MultiIndex, beta: MultiIndex) -> MultiIndex:
    return tuple(a + b for a, b in zip(alpha, beta))


def sub(alpha: MultiIndex, beta: MultiIndex) -> MultiIndex:
    return tuple(a - b for a, b in zip(alpha, beta))


def unit(n: int, axis: int) -> MultiIndex:
    return tuple(1 if i == axis else 0 for i in range(n))


def monomial(x: np.ndarray, alpha: MultiIndex) -> np.ndarray:
    """x^alpha for each row of x."""
    x = np.atleast_2d(x)
    out = np.ones(len(x))
    for axis, power in enumerate(alpha):
        if power:
            out = out * x[:, axis] ** power
    return out


def scaled_monomial(x: np.ndarray, alpha: MultiIndex) -> np.ndarray:
    """x^alpha / alpha!"""
    return monomial(x, alpha) / factorial(alpha)


def centered_cube_moment(alpha: MultiIndex, side: float) -> float:
    """Average of (x - x_Q)^alpha over a cube of the given side."""
    out = 1.0
    half = side / 2
    for a in alpha:
        if a % 2:
            return 0.0
        out *= half ** a / (a + 1)
    return out
