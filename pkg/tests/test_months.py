import pytest

from modwatch.months import (
    add_months,
    month_of_timestamp,
    month_range,
    months_between,
    parse_month,
    timestamp_of_month,
)


def test_parse_and_roundtrip():
    assert parse_month("2019-09") == "2019-09"
    with pytest.raises(ValueError):
        parse_month("2019-13")
    with pytest.raises(ValueError):
        parse_month("sept 2019")


def test_arithmetic():
    assert add_months("2019-11", 2) == "2020-01"
    assert add_months("2020-01", -1) == "2019-12"
    assert months_between("2019-11", "2020-02") == 3
    assert month_range("2019-11", "2020-01") == ["2019-11", "2019-12", "2020-01"]
    assert month_range("2020-01", "2019-11") == []


def test_timestamp_boundaries():
    ts = timestamp_of_month("2019-09")
    assert month_of_timestamp(ts) == "2019-09"
    assert month_of_timestamp(ts - 1) == "2019-08"
