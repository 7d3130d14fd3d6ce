from pathlib import Path

import pytest

import subsetsql as sq

DATA = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="session")
def item():
    return sq.load_csv(str(DATA / "item.csv"), "Item")


@pytest.fixture(scope="session")
def shop():
    return sq.load_csv(str(DATA / "shop.csv"), "Shop")


@pytest.fixture(scope="session")
def available():
    return sq.load_csv(str(DATA / "available.csv"), "Available")


@pytest.fixture(scope="session")
def catalog(item, shop, available):
    return sq.Catalog([item, shop, available])
