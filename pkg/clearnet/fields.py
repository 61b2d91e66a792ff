from __future__ import annotations

import dataclasses
import enum
import math
from types import UnionType
from typing import TYPE_CHECKING, Any, Literal, Mapping, Union, get_args, get_origin

import numpy as np
from marshmallow import ValidationError, fields, validate

if TYPE_CHECKING:
    from .record import Record


class LiteralField(fields.Field):
    def __init__(self, literal: Any, **kwargs: Any):
        self.choices = get_args(literal)
        super().__init__(**kwargs)

    def _deserialize(self, value: Any, attr: str | None, data: Any, **kwargs) -> Any:
        if value not in self.choices:
            raise ValidationError(f"Value must be one of {self.choices}")
        return value


class ArrayField(fields.Field):
    """
    One-dimensional float vector, dumped as a list.
    """

    def _serialize(self, value: Any, attr: str | None, obj: Any, **kwargs):
        if value is None:
            return None
        return np.asarray(value, dtype=float).tolist()

    def _deserialize(self, value: Any, attr: str | None, data: Any, **kwargs):
        try:
            array = np.asarray(value, dtype=float)
        except (TypeError, ValueError):
            raise ValidationError("Expected a list of numbers.")
        if array.ndim != 1:
            raise ValidationError("Expected a flat list of numbers.")
        return array


class GridField(fields.Field):
    """
    Ascending grid, given either as a list of numbers or as "start:stop:step"
    (stop included when it lies on the grid).
    """

    def _serialize(self, value: Any, attr: str | None, obj: Any, **kwargs):
        if value is None:
            return None
        return [float(item) for item in value]

    def _deserialize(
        self, value: Any, attr: str | None, data: Any, **kwargs
    ) -> list[float]:
        if isinstance(value, str):
            grid = parse_grid(value)
        elif isinstance(value, (list, tuple)):
            try:
                grid = [float(item) for item in value]
            except (TypeError, ValueError):
                raise ValidationError("Grid entries must be numbers.")
        else:
            raise ValidationError("Grid must be a list or 'start:stop:step'.")
        if not grid:
            raise ValidationError("Grid must not be empty.")
        if any(b < a for a, b in zip(grid, grid[1:])):
            raise ValidationError("Grid must be ascending.")
        return grid


def parse_grid(text: str) -> list[float]:
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) != 3:
            raise ValueError(text)
        start, stop, step = (float(part) for part in parts)
    except ValueError:
        raise ValidationError(f"Cannot parse grid {text!r}, expected 'a:b:step'.")
    if step <= 0 or stop < start:
        raise ValidationError("Grid needs step > 0 and stop >= start.")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(count)]


UNIT_INTERVAL = validate.Range(min=0.0, max=1.0)
NONNEGATIVE = validate.Range(min=0.0)
POSITIVE = validate.Range(min=1)
POSITIVE_REAL = validate.Range(min=0.0, min_inclusive=False)


def type_to_field(type_: Any, **kwargs: Any) -> fields.Field:
    """
    Build the marshmallow field for an annotation.
    """
    from .record import Record

    origin = get_origin(type_)
    if origin is Union or origin is UnionType:
        args = [arg for arg in get_args(type_) if arg is not type(None)]
        if len(args) != 1:
            raise ValueError(f"Cannot convert type {type_} to field")
        kwargs.setdefault("allow_none", True)
        return type_to_field(args[0], **kwargs)
    if origin is Literal:
        return LiteralField(type_, **kwargs)
    if origin is list:
        return fields.List(type_to_field(get_args(type_)[0]), **kwargs)
    if origin is tuple:
        return fields.Tuple(
            tuple(type_to_field(arg) for arg in get_args(type_)), **kwargs
        )
    if origin is dict:
        return fields.Dict(
            keys=type_to_field(get_args(type_)[0]),
            values=type_to_field(get_args(type_)[1]),
            **kwargs,
        )
    if type_ is bool:
        return fields.Boolean(**kwargs)
    if type_ is int:
        return fields.Integer(strict=True, **kwargs)
    if type_ is float:
        return fields.Float(**kwargs)
    if type_ is str:
        return fields.String(**kwargs)
    if type_ is np.ndarray:
        return ArrayField(**kwargs)
    if type_ is Any:
        return fields.Raw(**kwargs)
    if isinstance(type_, type) and issubclass(type_, enum.Enum):
        return fields.Enum(type_, by_value=True, **kwargs)
    if isinstance(type_, type) and issubclass(type_, Record):
        return RecordField(type_, **kwargs)
    raise ValueError(f"Cannot convert type {type_} to field")


class RecordField(fields.Field):
    """
    Nested record, loaded into the record class instead of a plain dict.
    """

    def __init__(self, record: type[Record], **kwargs: Any):
        self.record = record
        super().__init__(**kwargs)

    def _serialize(self, value: Any, attr: str | None, obj: Any, **kwargs):
        if value is None:
            return None
        return value.dump()

    def _deserialize(self, value: Any, attr: str | None, data: Any, **kwargs):
        if isinstance(value, self.record):
            return value
        if not isinstance(value, Mapping):
            raise ValidationError("Expected an object.")
        return self.record.load(value)


def field_for(field: dataclasses.Field, type_: Any) -> fields.Field:
    """
    marshmallow field for one dataclass field, honouring its default and the
    marshmallow keyword arguments stored in its metadata.
    """
    kwargs = dict(field.metadata.get("marshmallow", {}))
    if "field" in field.metadata:
        custom = field.metadata["field"]
        marshmallow_field = custom() if callable(custom) else custom
    else:
        marshmallow_field = type_to_field(type_, **kwargs)

    if field.default is not dataclasses.MISSING:
        marshmallow_field.required = False
        marshmallow_field.load_default = field.default
    elif field.default_factory is not dataclasses.MISSING:
        marshmallow_field.required = False
        marshmallow_field.load_default = field.default_factory
    else:
        marshmallow_field.required = True
    return marshmallow_field
