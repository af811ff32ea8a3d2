from typing import Any, Literal

from .base import StoreProvider
from .memory import InMemoryStoreOptions, InMemoryStoreProvider
from .sqlite import SqliteStoreOptions, SqliteStoreProvider

ProviderType = Literal["inmemory", "sqlite"]


class ProviderFactory:
    """Factory for creating certificate store providers."""

    @staticmethod
    def create_provider(
        provider_type: ProviderType,
        opt: InMemoryStoreOptions | SqliteStoreOptions,
    ) -> StoreProvider[Any]:
        """Create a store provider of the specified type.

        Args:
            provider_type: The type of provider to create
            opt: Options specific to the provider type

        Returns:
            A configured store provider

        Raises:
            ValueError: If an unknown provider type is specified
        """
        if provider_type == "inmemory":
            return InMemoryStoreProvider(opt)  # type: ignore[arg-type]
        elif provider_type == "sqlite":
            return SqliteStoreProvider(opt)  # type: ignore[arg-type]
        else:
            raise ValueError(f"Unknown provider type: {provider_type}")
