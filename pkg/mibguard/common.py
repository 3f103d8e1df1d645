"""
Helpers for expanding experiment options into grid cells.
"""

import itertools
from typing import Iterator, TypeVar


T = TypeVar("T")
MaybeList = T | list[T] | None


def to_list(x: MaybeList[T]) -> list[T]:
    """Wrap a single option value in a list; lists and tuples are copied"""
    if isinstance(x, (list, tuple)):
        return list(x)
    return [x]


def permute_options(**kwargs) -> Iterator[dict]:
    """
    Yield one dict per grid cell, taking a single value of every option. An
    option given as one value instead of a list appears in every cell.

    The first option varies slowest, so

        permute_options(selection=[a, b], classifier=[x, y])

    yields the cells (a, x), (a, y), (b, x), (b, y).
    """
    names = list(kwargs)
    for values in itertools.product(*(to_list(x) for x in kwargs.values())):
        yield dict(zip(names, values))
