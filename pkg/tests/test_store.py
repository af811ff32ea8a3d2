from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any

import pytest

from dpquotient.store import CertificateStore, StoreClosed, StoreError, canonical_json, open_store
from dpquotient.store.provider import (
    InMemoryStoreOptions,
    InMemoryStoreProvider,
    ProviderFactory,
    SqliteStoreOptions,
    SqliteStoreProvider,
    StoreProvider,
)


class TestStoreProviderBase:
    """Tests for the StoreProvider base class"""

    def test_base_defines_get_connection_string(self) -> None:
        """StoreProvider requires get_connection_string"""
        assert getattr(StoreProvider.get_connection_string, "__isabstractmethod__", False)

    def test_base_defines_get_engine_options(self) -> None:
        """StoreProvider offers get_engine_options"""
        assert hasattr(StoreProvider, "get_engine_options")


class ProviderConfigTestBase(ABC):
    """Base class for provider configuration tests providing common test structure"""

    @abstractmethod
    def test_provider_is_a_store_provider(self) -> None:
        """Ensures the provider derives from StoreProvider"""


class TestInMemoryProviderConfig(ProviderConfigTestBase):
    """Tests for InMemoryStoreProvider configuration"""

    def test_provider_is_a_store_provider(self) -> None:
        """InMemoryStoreProvider is a StoreProvider"""
        assert isinstance(InMemoryStoreProvider(InMemoryStoreOptions()), StoreProvider)

    def test_connection_string(self, in_memory_provider: InMemoryStoreProvider) -> None:
        """InMemoryStoreProvider points at an in-memory sqlite database"""
        assert in_memory_provider.get_connection_string() == "sqlite:///:memory:"

    def test_engine_options(self, in_memory_provider: InMemoryStoreProvider) -> None:
        """InMemoryStoreProvider uses StaticPool and check_same_thread=False"""
        opts = in_memory_provider.get_engine_options()

        assert opts["poolclass"].__name__ == "StaticPool"
        assert not opts["connect_args"]["check_same_thread"]

    def test_connect_args_are_kept(self) -> None:
        """Extra connect_args survive next to check_same_thread"""
        opts = InMemoryStoreOptions(connect_args={"timeout": 5}).to_engine_opts()
        assert opts["connect_args"] == {"timeout": 5, "check_same_thread": False}


class TestSqliteProviderConfig(ProviderConfigTestBase):
    """Tests for SqliteStoreProvider configuration"""

    def test_provider_is_a_store_provider(self) -> None:
        """SqliteStoreProvider is a StoreProvider"""
        assert isinstance(SqliteStoreProvider(SqliteStoreOptions(path="x.db")), StoreProvider)

    def test_connection_string(self, tmp_path: Path) -> None:
        """SqliteStoreProvider points at its file"""
        path = tmp_path / "certificates.db"
        provider = SqliteStoreProvider(SqliteStoreOptions(path=str(path)))
        assert provider.get_connection_string() == f"sqlite:///{path}"

    def test_engine_options(self) -> None:
        """Plain options carry echo and nothing else"""
        opts = SqliteStoreProvider(SqliteStoreOptions(path="x.db")).get_engine_options()
        assert opts == {"echo": False}

    def test_empty_path(self) -> None:
        """An empty path is rejected"""
        with pytest.raises(ValueError):
            SqliteStoreOptions(path="")


class TestProviderFactory:
    """Tests for ProviderFactory"""

    def test_creates_in_memory(self) -> None:
        """`inmemory` yields an InMemoryStoreProvider"""
        provider = ProviderFactory.create_provider("inmemory", InMemoryStoreOptions())
        assert isinstance(provider, InMemoryStoreProvider)

    def test_creates_sqlite(self) -> None:
        """`sqlite` yields a SqliteStoreProvider"""
        provider = ProviderFactory.create_provider("sqlite", SqliteStoreOptions(path="x.db"))
        assert isinstance(provider, SqliteStoreProvider)

    def test_unknown_type(self) -> None:
        """Unknown provider types raise ValueError"""
        with pytest.raises(ValueError, match="Unknown provider type: postgres"):
            ProviderFactory.create_provider("postgres", InMemoryStoreOptions())  # type: ignore[arg-type]


class TestCertificateStore:
    """Tests for reading and writing certificates"""

    def test_put_and_get(self, memory_store: CertificateStore) -> None:
        """A stored payload reads back equal"""
        payload: dict[str, Any] = {"order": 216, "classes": [1, 2]}
        memory_store.put("scan", "gamma", payload)
        assert memory_store.get("scan", "gamma") == payload

    def test_missing_entry(self, memory_store: CertificateStore) -> None:
        """Unknown kind and key give None"""
        assert memory_store.get("scan", "nothing") is None

    def test_replace(self, memory_store: CertificateStore) -> None:
        """A second put under the same kind and key replaces the payload"""
        memory_store.put("verdict", "ex1", {"x": "Rational"})
        memory_store.put("verdict", "ex1", {"x": "NonRational"})
        memory_store.save_changes()
        assert memory_store.get("verdict", "ex1") == {"x": "NonRational"}
        assert memory_store.keys("verdict") == ["ex1"]

    def test_kinds_and_keys(self, memory_store: CertificateStore) -> None:
        """kinds and keys list what has been stored, sorted"""
        memory_store.put("verdict", "ex2", 1)
        memory_store.put("verdict", "ex0", 2)
        memory_store.put("dictionary", "uvw", 3)
        assert memory_store.kinds() == ["dictionary", "verdict"]
        assert memory_store.keys("verdict") == ["ex0", "ex2"]

    def test_save_changes_commits(self, memory_store: CertificateStore) -> None:
        """save_changes commits pending rows"""
        memory_store.put("verdict", "ex3", {})
        memory_store.save_changes()
        assert memory_store.get("verdict", "ex3") == {}

    def test_save_changes_counts_written_certificates(self, memory_store: CertificateStore) -> None:
        """Each created or changed entry counts once, and a second save finds nothing"""
        memory_store.put("verdict", "ex5", {"x": "Rational"})
        memory_store.put("verdict", "ex6", {"x": "Rational"})
        memory_store.put("verdict", "ex6", {"x": "NonRational"})
        assert memory_store.save_changes() == 2
        assert memory_store.save_changes() == 0

    def test_unchanged_payload_is_not_counted(self, memory_store: CertificateStore) -> None:
        """Re-filing an identical payload writes nothing"""
        memory_store.put("verdict", "ex7", [1, 2])
        assert memory_store.save_changes() == 1
        memory_store.put("verdict", "ex7", [1, 2])
        assert memory_store.save_changes() == 0

    def test_session_required(self, in_memory_provider: InMemoryStoreProvider) -> None:
        """Using a store outside `with` is an error"""
        store = CertificateStore(in_memory_provider)
        with pytest.raises(StoreClosed):
            store.get("verdict", "ex0")
        with store:
            store.put("verdict", "ex0", {})
        with pytest.raises(StoreClosed):
            store.keys("verdict")
        store.dispose()

    def test_nested_open_is_refused(self, memory_store: CertificateStore) -> None:
        """A store that is already open cannot be entered again"""
        with pytest.raises(StoreError):
            memory_store.__enter__()

    def test_rollback_on_error(self, in_memory_provider: InMemoryStoreProvider) -> None:
        """A block that raises leaves nothing behind"""
        store = CertificateStore(in_memory_provider)
        with pytest.raises(KeyError):
            with store:
                store.put("verdict", "ex4", {})
                raise KeyError("boom")
        with store:
            assert store.get("verdict", "ex4") is None
        store.dispose()

    def test_file_store_survives(self, tmp_path: Path) -> None:
        """A sqlite file store keeps certificates between stores"""
        path = str(tmp_path / "certificates.db")
        first = open_store(path)
        with first:
            first.put("dictionary", "uvw", {"order": 32})
        first.dispose()
        second = open_store(path)
        with second:
            assert second.get("dictionary", "uvw") == {"order": 32}
        second.dispose()

    def test_open_store_without_path(self) -> None:
        """No path gives a throwaway in-memory store"""
        store = open_store(None)
        with store:
            assert store.kinds() == []
        store.dispose()


def test_canonical_json() -> None:
    """Keys are sorted and separators carry no whitespace"""
    assert canonical_json({"b": 1, "a": [1, 2]}) == '{"a":[1,2],"b":1}'
