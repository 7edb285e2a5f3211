"""
isometry keys for small spaces.

points are ordered by their sorted distance row; inside groups of equal rows
every permutation is tried and the smallest flattened matrix wins. when the
groups are too big to permute the signature order is used as is: such keys
still never collide for non-isometric spaces, they may just split one
isometry class into several keys.
"""

import itertools
import math
from typing import Optional, Sequence

from .typing import Key, Rows

# product of group factorials above which permutation search is skipped
PERMUTATION_LIMIT = 720


def _flat(rows: Rows, order: Sequence[int]) -> tuple:
    n = len(order)
    return tuple(rows[order[a]][order[b]] for a in range(n) for b in range(a + 1, n))


def _small_key(rows: Rows, base: Optional[int]) -> Optional[Key]:
    n = len(rows)
    if n == 1:
        return (1,)
    if n == 2:
        return (2, rows[0][1])
    if n == 3:
        if base is None:
            return (3, *sorted((rows[0][1], rows[0][2], rows[1][2])))
        i, j = (k for k in range(3) if k != base)
        a, b = rows[base][i], rows[base][j]
        if a > b:
            a, b = b, a
        return (3, a, b, rows[i][j])
    return None


def canonical_key(rows: Rows, base: Optional[int] = None) -> Key:
    """equal keys mean isometric (base onto base for pointed spaces)"""
    fast = _small_key(rows, base)
    if fast is not None:
        return fast

    n = len(rows)
    free = [i for i in range(n) if i != base]

    def signature(i: int):
        head = (rows[base][i],) if base is not None else ()
        return head + tuple(sorted(rows[i]))

    free.sort(key=signature)
    groups: list[list[int]] = []
    last = None
    for i in free:
        sig = signature(i)
        if groups and sig == last:
            groups[-1].append(i)
        else:
            groups.append([i])
        last = sig

    head = [base] if base is not None else []
    sigs = tuple(signature(g[0]) for g in groups)
    sizes = tuple(len(g) for g in groups)

    if math.prod(math.factorial(len(g)) for g in groups) > PERMUTATION_LIMIT:
        return (n, sizes, sigs, _flat(rows, head + free))

    best = None
    for perms in itertools.product(*(itertools.permutations(g) for g in groups)):
        order = head + [i for p in perms for i in p]
        flat = _flat(rows, order)
        if best is None or flat < best:
            best = flat
    return (n, sizes, sigs, best)
