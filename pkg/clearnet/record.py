from __future__ import annotations

import dataclasses
import typing
from typing import TYPE_CHECKING, Any, Callable, Mapping

from marshmallow import EXCLUDE, Schema
from typing_extensions import Self, dataclass_transform

from .fields import field_for


def attr(
    default: Any = dataclasses.MISSING,
    *,
    default_factory: Callable[[], Any] | Any = dataclasses.MISSING,
    field: Any = None,
    **marshmallow: Any,
) -> Any:
    """
    Declare a record attribute. Extra keyword arguments are handed to the
    marshmallow field (e.g. ``validate=UNIT_INTERVAL``); ``field`` replaces the
    generated marshmallow field entirely.
    """
    metadata: dict[str, Any] = {"marshmallow": marshmallow}
    if field is not None:
        metadata["field"] = field
    return dataclasses.field(
        default=default, default_factory=default_factory, metadata=metadata
    )


@dataclass_transform(
    kw_only_default=True, frozen_default=True, field_specifiers=(attr,)
)
class RecordMetaClass(type):
    if TYPE_CHECKING:
        __schema__: Schema
        __schema_loaded__: bool

    def __new__(cls, name, bases, namespace, *, eq: bool = True):
        namespace["__schema_loaded__"] = False
        record = super().__new__(cls, name, bases, namespace)
        return dataclasses.dataclass(frozen=True, kw_only=True, eq=eq)(record)

    def __lazy_init_schema__(cls) -> Schema:
        if cls.__dict__.get("__schema_loaded__"):
            return cls.__schema__

        hints = typing.get_type_hints(cls)
        declared = {
            field.name: field_for(field, hints[field.name])
            for field in dataclasses.fields(cls)  # type: ignore[arg-type]
        }
        cls.__schema__ = Schema.from_dict(declared, name=cls.__name__)(
            unknown=EXCLUDE
        )
        cls.__schema_loaded__ = True
        return cls.__schema__


class Record(metaclass=RecordMetaClass):
    """
    Immutable, keyword-only value object with a marshmallow schema built from
    its annotations.
    """

    @classmethod
    def load(cls, data: Mapping[str, Any]) -> Self:
        """
        Load data from dict to instance, and validate the data.
        """
        validated: dict[str, Any] = cls.__lazy_init_schema__().load(data)  # type: ignore
        return cls(**validated)

    def dump(self) -> dict[str, Any]:
        """
        Dump the instance to jsonable dict.
        """
        return type(self).__lazy_init_schema__().dump(self)  # type: ignore

    def replace(self, **changes: Any) -> Self:
        return dataclasses.replace(self, **changes)  # type: ignore[type-var]
