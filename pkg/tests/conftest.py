"""Shared test fixtures for the dpquotient test suite"""

from collections.abc import Iterator

import pytest

from dpquotient import family_quartic
from dpquotient.classify import type4_group
from dpquotient.store import CertificateStore
from dpquotient.store.provider import InMemoryStoreOptions, InMemoryStoreProvider
from dpquotient.weyl import SubgroupClosure, centralizer, full_weyl_group


@pytest.fixture(scope="session")
def weyl_group() -> SubgroupClosure:
    """The full W(E7), built once per session from the Coxeter generators"""
    return full_weyl_group()


@pytest.fixture(scope="session")
def type4_centralizer(weyl_group: SubgroupClosure) -> SubgroupClosure:
    """The order 216 centralizer of <ab>"""
    return centralizer(type4_group(), weyl_group)


@pytest.fixture(scope="session")
def uvw_model() -> family_quartic.QuarticLineModel:
    """The labelled line model of the quartic family with q = uvw"""
    return family_quartic.line_model(family_quartic.QChoice.UVW)


@pytest.fixture
def in_memory_provider() -> InMemoryStoreProvider:
    """Provides an in-memory certificate store provider"""
    return InMemoryStoreProvider(InMemoryStoreOptions())


@pytest.fixture
def memory_store(in_memory_provider: InMemoryStoreProvider) -> Iterator[CertificateStore]:
    """An open in-memory certificate store"""
    store = CertificateStore(in_memory_provider)
    with store:
        yield store
    store.dispose()
