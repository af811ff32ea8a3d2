from .base import BaseStoreOptions, StoreProvider
from .factory import ProviderFactory, ProviderType
from .memory import InMemoryStoreOptions, InMemoryStoreProvider
from .sqlite import SqliteStoreOptions, SqliteStoreProvider

__all__ = [
    "BaseStoreOptions",
    "InMemoryStoreOptions",
    "InMemoryStoreProvider",
    "ProviderFactory",
    "ProviderType",
    "SqliteStoreOptions",
    "SqliteStoreProvider",
    "StoreProvider",
]
