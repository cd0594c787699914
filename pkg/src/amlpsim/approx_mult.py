"""7x7 array multiplier with a 5-bit error-control input (32 configurations).

The multiplier evaluates the 14 partial-product columns in order, propagating
integer carries.  Each set bit i of the control mask switches the column pair
(2i, 2i+1) into approximate mode: the column's sum bit collapses to the OR of
its partial products, the incoming carry is discarded, and no carry is
produced.  Mask 0 keeps every column exact, so the unit degrades gracefully
to an ordinary multiplier.  Errors are one-sided: an approximate result never
exceeds the exact product.

Adding mask bits does NOT always lower the result: an exact column with an
even bit count emits 0 (its carry dying in an approximated column above it),
while OR-compressing that same column emits 1.  multiply_mag(3,3,2) = 5 but
multiply_mag(3,3,3) = 7.  Result values shrink monotonically only along
nested column prefixes (masks 0, 1, 3, 7, 15, 31); the error-pair SET is
nested under any mask inclusion, so the error rate is always monotone.

Column 10..13 are never approximable (mask bits reach columns 0..9 only);
column 13 carries the product MSB and receives carries exclusively.
"""

from functools import lru_cache

import numpy as np

from .fixedpoint import MAG_MAX, Product15, SignMag8

CONFIG_COUNT = 32
MASK_BITS = 5

# (i, j) operand-bit pairs feeding each product column c = i + j.
_COLUMN_PAIRS = tuple(
    tuple((i, c - i) for i in range(max(0, c - 6), min(6, c) + 1)) for c in range(13)
)


def _check_mask(mask: int) -> None:
    if not 0 <= mask < CONFIG_COUNT:
        raise ValueError(f"configuration mask out of range [0, 31]: {mask}")


def approx_columns(mask: int) -> frozenset[int]:
    """Column indices approximated by a control mask: bit i covers {2i, 2i+1}."""
    _check_mask(mask)
    cols = []
    for i in range(MASK_BITS):
        if (mask >> i) & 1:
            cols.extend((2 * i, 2 * i + 1))
    return frozenset(cols)


def multiply_mag(a: int, b: int, mask: int = 0) -> int:
    """Multiply two 7-bit magnitudes under a control mask.

    Exact columns add their partial products to the incoming carry, emit the
    sum's low bit, and pass the rest on as carry.  Approximated columns emit
    the OR of their partial products, drop the incoming carry, and carry out
    nothing.
    """
    if not 0 <= a <= MAG_MAX or not 0 <= b <= MAG_MAX:
        raise ValueError(f"operands must be 7-bit magnitudes: {a}, {b}")
    _check_mask(mask)
    approx = approx_columns(mask)
    result = 0
    carry = 0
    for c in range(13):
        ones = 0
        for i, j in _COLUMN_PAIRS[c]:
            if (a >> i) & (b >> j) & 1:
                ones += 1
        if c in approx:
            if ones:
                result |= 1 << c
            carry = 0
        else:
            total = ones + carry
            result |= (total & 1) << c
            carry = total >> 1
    # column 13: carries only, always exact
    result |= (carry & 1) << 13
    return result


def multiply_signed(a: SignMag8, b: SignMag8, mask: int = 0) -> Product15:
    """Signed multiply: XOR of the operand signs, magnitudes through the array."""
    mag = multiply_mag(a.mag, b.mag, mask)
    sign = (a.sign ^ b.sign) if mag else 0
    return Product15(sign, mag)


@lru_cache(maxsize=CONFIG_COUNT)
def product_table(mask: int) -> np.ndarray:
    """Full 128x128 magnitude product table for one configuration.

    Memoizes multiply_mag over its finite operand domain; the batched
    evaluators index into this instead of re-deriving column sums.
    """
    _check_mask(mask)
    table = np.empty((128, 128), dtype=np.uint16)
    for a in range(128):
        row = table[a]
        for b in range(a, 128):
            row[b] = multiply_mag(a, b, mask)
        # the column array is symmetric in its operands
        table[a + 1 :, a] = table[a, a + 1 :]
    table.setflags(write=False)
    return table


@lru_cache(maxsize=CONFIG_COUNT)
def _product_rows(mask: int) -> tuple:
    """product_table as nested tuples; faster than ndarray for scalar lookups."""
    return tuple(tuple(int(v) for v in row) for row in product_table(mask))
