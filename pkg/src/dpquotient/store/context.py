"""Persistence for certificates: lattice dictionaries, scan results and verdicts.

A certificate is a JSON payload filed under a kind and a key. Payloads are stored in
canonical form (sorted keys, no whitespace) so equal certificates compare equal as text.
"""

import json
import logging
from typing import Any

from attrs import define
from sqlalchemy import (
    Column,
    Engine,
    Integer,
    MetaData,
    Select,
    String,
    Table,
    Text,
    UniqueConstraint,
    create_engine,
    select,
)
from sqlalchemy.orm import Session, registry, sessionmaker
from typing_extensions import Self

from ..errors import DpQuotientError
from .provider import InMemoryStoreOptions, ProviderFactory, SqliteStoreOptions
from .provider.base import StoreProvider

logger = logging.getLogger(__name__)


@define(slots=False)
class Certificate:
    kind: str
    key: str
    payload: str
    id: int | None = None


_metadata = MetaData()
_certificates = Table(
    "certificates",
    _metadata,
    Column("id", Integer, primary_key=True, autoincrement=True),
    Column("kind", String(64), nullable=False),
    Column("key", String(256), nullable=False),
    Column("payload", Text, nullable=False),
    UniqueConstraint("kind", "key", name="uq_certificate_kind_key"),
)

if not hasattr(Certificate, "__mapper__"):
    registry().map_imperatively(Certificate, _certificates)


def canonical_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


class StoreError(DpQuotientError):
    pass


class StoreClosed(StoreError, RuntimeError):
    pass


class CertificateStore:
    """Session-scoped access to the certificate table.

    Use as a context manager: certificates written inside the block are committed on a
    clean exit and discarded when the block raises. Outside a block every call raises
    StoreClosed.
    """

    def __init__(self, provider: StoreProvider[Any]):
        self._engine: Engine = create_engine(
            provider.get_connection_string(), **provider.get_engine_options()
        )
        self._open_session = sessionmaker(bind=self._engine)
        self._session: Session | None = None
        # (kind, key) pairs written since the last commit
        self._written: set[tuple[str, str]] = set()
        _metadata.create_all(self._engine, checkfirst=True)

    @property
    def session(self) -> Session:
        if self._session is None:
            raise StoreClosed("The certificate store is closed; enter it with `with store:`")
        return self._session

    def _find(self, kind: str, key: str) -> Certificate | None:
        stmt = select(Certificate).where(
            _certificates.c.kind == kind, _certificates.c.key == key
        )
        return self.session.scalars(stmt).first()

    def put(self, kind: str, key: str, payload: Any) -> Certificate:
        """Files a payload, replacing an earlier one under the same kind and key"""
        text = canonical_json(payload)
        row = self._find(kind, key)
        if row is None:
            row = Certificate(kind, key, text)
            self.session.add(row)
        elif row.payload != text:
            row.payload = text
        else:
            return row
        self._written.add((kind, key))
        logger.debug("Stored certificate %s/%s (%d bytes)", kind, key, len(text))
        return row

    def get(self, kind: str, key: str) -> Any | None:
        row = self._find(kind, key)
        return None if row is None else json.loads(row.payload)

    def _column_query(self, stmt: Select[tuple[str]]) -> list[str]:
        # Core column selects skip autoflush
        session = self.session
        session.flush()
        return list(session.scalars(stmt))

    def kinds(self) -> list[str]:
        return self._column_query(
            select(_certificates.c.kind).distinct().order_by(_certificates.c.kind)
        )

    def keys(self, kind: str) -> list[str]:
        return self._column_query(
            select(_certificates.c.key)
            .where(_certificates.c.kind == kind)
            .order_by(_certificates.c.key)
        )

    def save_changes(self) -> int:
        """Commits the certificates written since the last commit.

        Returns:
            How many (kind, key) entries were created or changed

        Raises:
            StoreError: If the commit fails; the pending certificates are discarded
        """
        session = self.session
        written = len(self._written)
        try:
            session.commit()
        except Exception as e:
            session.rollback()
            self._written.clear()
            raise StoreError(f"Could not commit {written} certificates") from e
        self._written.clear()
        if written:
            logger.info("Committed %d certificates", written)
        return written

    def discard_changes(self) -> None:
        self.session.rollback()
        self._written.clear()

    def dispose(self) -> None:
        if self._session is not None:
            self._session.close()
            self._session = None
        self._engine.dispose()

    def __enter__(self) -> Self:
        if self._session is not None:
            raise StoreError("The certificate store is already open")
        self._session = self._open_session()
        return self

    def __exit__(
        self, exc_type: type[BaseException] | None, exc_val: BaseException | None, exc_tb: Any
    ) -> None:
        try:
            if exc_type is None:
                self.save_changes()
            else:
                self.discard_changes()
        finally:
            self.session.close()
            self._session = None


def open_store(path: str | None) -> CertificateStore:
    """A sqlite file store when a path is given, otherwise an in-memory one"""
    if path:
        provider = ProviderFactory.create_provider("sqlite", SqliteStoreOptions(path=path))
    else:
        provider = ProviderFactory.create_provider("inmemory", InMemoryStoreOptions())
    return CertificateStore(provider)
