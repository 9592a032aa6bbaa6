import pytest

from grouprag.db import Principal, Store


@pytest.fixture
def store():
    return Store("sqlite://")


@pytest.fixture
def principals(store):
    ids = ("alice", "bob", "carol")
    with store.begin() as session:
        for pid in ids:
            session.add(Principal(id=pid, display_name=pid.title()))
    return ids
