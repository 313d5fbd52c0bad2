import random

import pytest

from authority import AttributeAuthority, AttributeUniverse
from cpabe_core import keygen
from pairing_backend import group_setup

UNIVERSE = ["analyst", "admin", "auditor", "a", "b", "c", "d"]

# x = 0 lies on y^2 = x^3 + 4 with order 3, outside the prime-order subgroup
OFF_SUBGROUP_G1 = (2**383).to_bytes(48, "big")


@pytest.fixture(scope="session")
def ctx():
    return group_setup()


@pytest.fixture(scope="session")
def authority(tmp_path_factory, ctx):
    authority = AttributeAuthority(str(tmp_path_factory.mktemp("authority")))
    authority.bootstrap(AttributeUniverse.of(UNIVERSE), ctx, rng=random.Random(7).randrange)
    return authority


@pytest.fixture(scope="session")
def pk(authority, ctx):
    return authority.public_key(ctx)


@pytest.fixture(scope="session")
def mk(authority):
    return authority.master_key()


@pytest.fixture(scope="session")
def key_for(pk, mk):
    """Cached in-memory keys, one per attribute set"""
    cache = {}

    def make(*attrs):
        wanted = frozenset(attrs)
        if wanted not in cache:
            cache[wanted] = keygen(mk, pk, wanted)
        return cache[wanted]

    return make


@pytest.fixture
def rng():
    return random.Random(1234).randrange
