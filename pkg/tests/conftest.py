import pytest

import helpers


@pytest.fixture
def seat_transfer_mkt():
    return helpers.seat_transfer_market()


@pytest.fixture
def rotation_mkt():
    return helpers.rotation_market()


@pytest.fixture
def weak_only_mkt():
    return helpers.weak_only_market()


@pytest.fixture
def restart_mkt():
    return helpers.restart_success_market()


@pytest.fixture
def self_cycle_mkt():
    return helpers.self_cycle_market()


@pytest.fixture
def sibling_cycle_mkt():
    return helpers.sibling_cycle_market()


@pytest.fixture
def order_flip_mkt():
    return helpers.order_flip_market()
