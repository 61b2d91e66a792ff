from __future__ import annotations

import dataclasses
import enum
from typing import Literal

import numpy as np
import pytest
from marshmallow import ValidationError

from clearnet.fields import UNIT_INTERVAL, GridField, parse_grid, type_to_field
from clearnet.record import Record, attr


class Place(enum.Enum):
    ONE = "one"
    TWO = "two"


class Wallet(Record):
    balance: float
    currency: Literal["usd", "eur"] = attr("usd")


class Account(Record):
    name: str
    share: float = attr(0.5, validate=UNIT_INTERVAL)
    place: Place = attr(Place.ONE)
    tags: list[str] = attr(default_factory=list)
    window: tuple[int, int] | None = attr(None)
    wallet: Wallet
    history: np.ndarray = attr(default_factory=lambda: np.zeros(2))


def test_load_nested_record():
    account = Account.load({"name": "Aber", "wallet": {"balance": 100}})
    assert isinstance(account.wallet, Wallet)
    assert account.wallet.balance == 100
    assert account.wallet.currency == "usd"


def test_field_default():
    account = Account.load({"name": "Aber", "wallet": {"balance": 1}})
    assert account.share == 0.5
    assert account.place is Place.ONE
    assert account.tags == []
    assert account.window is None
    assert np.array_equal(account.history, np.zeros(2))


def test_dump_is_jsonable():
    account = Account(
        name="Aber",
        place=Place.TWO,
        wallet=Wallet(balance=2.0, currency="eur"),
        window=(23, 27),
        history=np.array([1.0, 2.0]),
    )
    dumped = account.dump()
    assert dumped["place"] == "two"
    assert dumped["wallet"] == {"balance": 2.0, "currency": "eur"}
    assert dumped["history"] == [1.0, 2.0]
    assert Account.load(dumped).window == (23, 27)


def test_unknown_keys_are_excluded():
    account = Account.load({"name": "Aber", "wallet": {"balance": 1}, "extra": 1})
    assert not hasattr(account, "extra")


@pytest.mark.parametrize(
    "data",
    [
        {"wallet": {"balance": 1}},
        {"name": "Aber", "wallet": {"balance": 1}, "share": 1.5},
        {"name": "Aber", "wallet": {"balance": 1, "currency": "gbp"}},
        {"name": "Aber", "wallet": {"balance": 1}, "place": "three"},
        {"name": "Aber", "wallet": 3},
    ],
)
def test_invalid_data(data):
    with pytest.raises(ValidationError):
        Account.load(data)


def test_records_are_frozen_and_keyword_only():
    wallet = Wallet(balance=1.0)
    with pytest.raises(dataclasses.FrozenInstanceError):
        wallet.balance = 2.0  # type: ignore[misc]
    with pytest.raises(TypeError):
        Wallet(1.0)  # type: ignore[misc]
    assert wallet.replace(balance=3.0) == Wallet(balance=3.0)


@pytest.mark.parametrize(
    "text, grid",
    [
        ("0:1:0.5", [0.0, 0.5, 1.0]),
        ("0:10:0.5", [0.5 * k for k in range(21)]),
        ("0:0.9:0.5", [0.0, 0.5]),
        ("2", [2.0]),
    ],
)
def test_parse_grid(text, grid):
    assert parse_grid(text) == pytest.approx(grid)


@pytest.mark.parametrize("value", ["1:0:0.1", "0:1:0", "a:b:c", "0:1", [], [2, 1]])
def test_invalid_grid(value):
    with pytest.raises(ValidationError):
        GridField().deserialize(value)


def test_type_to_field_rejects_unknown_types():
    with pytest.raises(ValueError):
        type_to_field(complex)
