"""Sign-magnitude number formats and the arithmetic primitives built on them.

Three widths cover the whole datapath: 8-bit operands (1 sign + 7 magnitude
bits), 15-bit products (1 + 14), and a 21-bit accumulator (1 + 20).  Negative
zero is never representable: constructors reject it, and the one place it can
enter the system (byte 0x80 in a model file) is normalized to +0 on read.
"""

from dataclasses import dataclass

MAG_MAX = 127
PRODUCT_MAX = 127 * 127  # 16129
ACC_MAX = (1 << 20) - 1  # 1048575


@dataclass(frozen=True, slots=True)
class SignMag8:
    """8-bit sign-magnitude scalar: inputs, weights, biases, activations."""

    sign: int
    mag: int

    def __post_init__(self):
        if self.sign not in (0, 1):
            raise ValueError(f"sign must be 0 or 1, got {self.sign}")
        if not 0 <= self.mag <= MAG_MAX:
            raise ValueError(f"magnitude out of range [0, {MAG_MAX}]: {self.mag}")
        if self.mag == 0 and self.sign == 1:
            raise ValueError("negative zero is not representable")

    @property
    def value(self) -> int:
        return -self.mag if self.sign else self.mag

    def to_byte(self) -> int:
        return (self.sign << 7) | self.mag

    @classmethod
    def from_byte(cls, b: int) -> "SignMag8":
        """Decode one byte; 0x80 (negative zero) normalizes to +0."""
        if not 0 <= b <= 0xFF:
            raise ValueError(f"byte out of range: {b}")
        mag = b & 0x7F
        sign = (b >> 7) & 1 if mag else 0
        return cls(sign, mag)


@dataclass(frozen=True, slots=True)
class Product15:
    """15-bit signed product of two 8-bit sign-magnitude operands."""

    sign: int
    mag: int

    def __post_init__(self):
        if self.sign not in (0, 1):
            raise ValueError(f"sign must be 0 or 1, got {self.sign}")
        if not 0 <= self.mag <= PRODUCT_MAX:
            raise ValueError(f"product magnitude out of range: {self.mag}")
        if self.mag == 0 and self.sign == 1:
            raise ValueError("negative zero is not representable")

    @property
    def value(self) -> int:
        return -self.mag if self.sign else self.mag


@dataclass(frozen=True, slots=True)
class SignedAcc:
    """21-bit sign-magnitude accumulator value."""

    sign: int
    mag: int

    def __post_init__(self):
        if self.sign not in (0, 1):
            raise ValueError(f"sign must be 0 or 1, got {self.sign}")
        if not 0 <= self.mag <= ACC_MAX:
            raise ValueError(f"accumulator magnitude out of range: {self.mag}")
        if self.mag == 0 and self.sign == 1:
            raise ValueError("negative zero is not representable")

    @property
    def value(self) -> int:
        return -self.mag if self.sign else self.mag

    @classmethod
    def from_int(cls, v: int) -> "SignedAcc":
        if not -ACC_MAX <= v <= ACC_MAX:
            raise ValueError(f"value out of accumulator range: {v}")
        return cls(1 if v < 0 else 0, abs(v))


def encode(v: int) -> SignMag8:
    """Encode an integer in [-127, 127] as sign-magnitude."""
    if not -MAG_MAX <= v <= MAG_MAX:
        raise ValueError(f"value out of range [-{MAG_MAX}, {MAG_MAX}]: {v}")
    return SignMag8(1 if v < 0 else 0, abs(v))


def decode(x: SignMag8) -> int:
    return x.value


def acc_add(acc: SignedAcc, p: int) -> SignedAcc:
    """Add a signed value to the accumulator, saturating at +/-(2^20 - 1).

    Mirrors the hardware structure: equal signs feed the adder, opposite
    signs feed the subtractor with comparison logic picking the final sign.
    Equivalent to clamp(acc.value + p) with the zero result normalized.
    """
    if not -ACC_MAX <= p <= ACC_MAX:
        raise ValueError(f"addend out of range: {p}")
    p_sign = 1 if p < 0 else 0
    p_mag = -p if p < 0 else p
    if acc.sign == p_sign:
        mag = acc.mag + p_mag
        if mag > ACC_MAX:
            mag = ACC_MAX
        sign = acc.sign
    elif acc.mag >= p_mag:
        mag = acc.mag - p_mag
        sign = acc.sign
    else:
        mag = p_mag - acc.mag
        sign = p_sign
    return SignedAcc(0 if mag == 0 else sign, mag)


def rescale_clamp(mag: int, shift: int) -> int:
    """Right-shift a 20-bit magnitude and clamp into 7 bits.

    The shift is a wire-drop (floor); the clamp saturates at 127.
    """
    if not 0 <= mag <= ACC_MAX:
        raise ValueError(f"magnitude out of range: {mag}")
    if not 0 <= shift <= 20:
        raise ValueError(f"shift out of range [0, 20]: {shift}")
    return min(mag >> shift, MAG_MAX)
