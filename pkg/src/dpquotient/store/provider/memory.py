from typing import Any

from sqlalchemy.pool import StaticPool

from .base import BaseStoreOptions, StoreProvider


class InMemoryStoreOptions(BaseStoreOptions):

    def to_engine_opts(self) -> dict[str, Any]:
        """StaticPool takes no pool_* parameters; one connection keeps the database alive"""
        connect_args = self.connect_args.copy()
        connect_args["check_same_thread"] = False
        return {"poolclass": StaticPool, "echo": self.echo, "connect_args": connect_args}


class InMemoryStoreProvider(StoreProvider[InMemoryStoreOptions]):
    """A throwaway store for tests and single runs"""

    def get_connection_string(self) -> str:
        return "sqlite:///:memory:"
