"""Affine unit conversion and the built-in unit fixtures."""

from __future__ import annotations

from decimal import Decimal, localcontext
from typing import Union

from .model import Unit, to_decimal

UNIT_NS = "http://hadatac.org/kb/unit/"

# Fahrenheit: K = 5/9 * F + (273.15 - 32 * 5/9)
_F_SCALE = Decimal(5) / Decimal(9)
_F_OFFSET = Decimal("273.15") - 32 * _F_SCALE

CELSIUS = Unit(UNIT_NS + "DegreeCelsius", "degree Celsius", "temperature", 1, "273.15")
FAHRENHEIT = Unit(UNIT_NS + "DegreeFahrenheit", "degree Fahrenheit", "temperature",
                  _F_SCALE, _F_OFFSET)
KELVIN = Unit(UNIT_NS + "Kelvin", "kelvin", "temperature", 1, 0)
GRAM = Unit(UNIT_NS + "Gram", "gram", "mass", "0.001", 0)
KILOGRAM = Unit(UNIT_NS + "Kilogram", "kilogram", "mass", 1, 0)

BUILTIN_UNITS: tuple[Unit, ...] = (CELSIUS, FAHRENHEIT, KELVIN, GRAM, KILOGRAM)


# Scales such as 5/9 are stored to 28 digits, so anything past ~20
# significant digits of the largest intermediate term is rounding noise.
# Measuring digits against the intermediates (not the result) keeps
# 32 F -> 0 C exactly zero instead of -2E-26.
RESULT_DIGITS = 20


class ConversionError(ValueError):
    pass


def convert(value: Union[Decimal, int, float, str], src: Unit, dst: Unit) -> Decimal:
    """Re-express ``value`` from ``src`` in ``dst`` through the base unit."""
    if src.quantity_kind != dst.quantity_kind:
        raise ConversionError(
            f"cannot convert {src.quantity_kind} ({src.label}) to "
            f"{dst.quantity_kind} ({dst.label})")
    x = to_decimal(value)
    if src == dst:
        return x
    with localcontext() as ctx:
        ctx.prec = 40
        scaled = src.scale * x
        result = (scaled + src.offset - dst.offset) / dst.scale
        magnitude = max(abs(scaled), abs(src.offset), abs(dst.offset)) / abs(dst.scale)
        if not magnitude:
            return result
        quantum = Decimal(1).scaleb(magnitude.adjusted() - RESULT_DIGITS + 1)
        return result.quantize(quantum) if result.adjusted() >= quantum.adjusted() else Decimal(0)


def factor(src: Unit, dst: Unit) -> tuple[Decimal, Decimal]:
    """(multiplier, addend) such that ``convert(x) == multiplier * x + addend``."""
    if src.quantity_kind != dst.quantity_kind:
        raise ConversionError(f"cannot convert {src.quantity_kind} to {dst.quantity_kind}")
    with localcontext() as ctx:
        ctx.prec = 40
        mul = src.scale / dst.scale
        add = (src.offset - dst.offset) / dst.scale
    return +mul, +add
