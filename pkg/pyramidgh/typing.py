from typing import Sequence, Union

import numpy as np

# a distance matrix as handed around by the pure-python search kernels
Rows = Sequence[Sequence[float]]
Matrix = Union[np.ndarray, Rows]
# a map between finite spaces, as the image index of every source point
Assignment = tuple[int, ...]
# canonical isometry key; equal keys <=> isometric (where the key is exact)
Key = tuple
Pair = tuple[int, int]


class Measured:
    """mixin for the value types that expose a distance matrix"""

    @property
    def rows(self) -> tuple[tuple[float, ...], ...]:
        raise NotImplementedError
