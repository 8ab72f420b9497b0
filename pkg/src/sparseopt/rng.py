"""Counter-based random streams with a byte-level definition.

Stream ``(seed, stream)`` is Philox-4x64-10 keyed with
``seed + stream * 2**64`` and counter starting at zero. Each 64-bit output
word ``w`` becomes a uniform ``(w >> 11) * 2**-53`` in ``[0, 1)``.

Normals come in Box--Muller pairs from two consecutive uniforms
``u1, u2``::

    r = sqrt(-2 log(1 - u1));  z0 = r cos(2 pi u2);  z1 = r sin(2 pi u2)

A request for ``k`` normals consumes ``2 * ceil(k / 2)`` uniforms and
drops an unused odd tail. Random supports use a partial Fisher--Yates
shuffle of ``0..n-1``: for ``i < s`` swap position ``i`` with
``i + floor(u * (n - i))``, then sort the first ``s`` positions.

Any implementation following these rules produces the same numbers, so
instances can be regenerated outside Python.
"""
import numpy as np

__all__ = ["CounterRNG"]

_MASK64 = (1 << 64) - 1


class CounterRNG:
    """Deterministic stream of uniforms and normals.

    >>> CounterRNG(5).raw(2).tolist()
    [13535223855206698129, 10893183200674769480]
    """

    def __init__(self, seed, stream=0):
        seed, stream = int(seed), int(stream)
        if not (0 <= seed <= _MASK64 and 0 <= stream <= _MASK64):
            raise ValueError("seed and stream must be 64-bit unsigned integers")
        self.seed, self.stream = seed, stream
        self._bits = np.random.Philox(key=seed + (stream << 64))

    def raw(self, k):
        """The next ``k`` 64-bit output words."""
        return self._bits.random_raw(int(k)).astype(np.uint64)

    def uniform(self, k):
        return (self.raw(k) >> np.uint64(11)).astype(np.float64) * 2.0 ** -53

    def normal(self, k):
        k = int(k)
        pairs = (k + 1) // 2
        u = self.uniform(2 * pairs).reshape(pairs, 2)
        r = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
        theta = 2.0 * np.pi * u[:, 1]
        z = np.column_stack([r * np.cos(theta), r * np.sin(theta)]).ravel()
        return z[:k]

    def support(self, n, s):
        """A uniformly random size-``s`` subset of ``range(n)``, ascending."""
        if not 0 <= s <= n:
            raise ValueError(f"need 0 <= s <= n, got s={s}, n={n}")
        perm = np.arange(n)
        u = self.uniform(s)
        for i in range(s):
            j = i + int(u[i] * (n - i))
            perm[i], perm[j] = perm[j], perm[i]
        return np.sort(perm[:s])

    def sparse_normal(self, n, s):
        """Random ``s``-sparse vector: random support, standard normal values."""
        x = np.zeros(n)
        x[self.support(n, s)] = self.normal(s)
        return x
