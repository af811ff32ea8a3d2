from pathlib import Path

from pydantic import Field

from .base import BaseStoreOptions, StoreProvider


class SqliteStoreOptions(BaseStoreOptions):

    path: str = Field(min_length=1)


class SqliteStoreProvider(StoreProvider[SqliteStoreOptions]):
    """A store kept in a sqlite file, so certificates survive between runs"""

    def get_connection_string(self) -> str:
        return f"sqlite:///{Path(self._opt.path).expanduser()}"
