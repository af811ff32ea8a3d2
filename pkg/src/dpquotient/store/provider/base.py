from abc import ABC, abstractmethod
from typing import Any, Generic, TypeVar

from pydantic import BaseModel, ConfigDict, Field

O = TypeVar("O", bound="BaseStoreOptions", covariant=True)


class StoreProvider(ABC, Generic[O]):

    def __init__(self, options: O):
        self._opt = options

    @abstractmethod
    def get_connection_string(self) -> str:
        """Gets the SQLAlchemy connection string of the certificate store.

        Returns:
            A database connection string
        """
        ...

    def get_engine_options(self) -> dict[str, Any]:
        """Gets SQLAlchemy engine configuration options."""
        return self._opt.to_engine_opts()


class BaseStoreOptions(BaseModel):

    model_config = ConfigDict(frozen=True)

    echo: bool = Field(default=False)
    connect_args: dict[str, Any] = Field(default_factory=dict)

    def to_engine_opts(self) -> dict[str, Any]:
        """Converts these options into SQLAlchemy engine keyword arguments"""
        opts: dict[str, Any] = {"echo": self.echo}
        if self.connect_args:
            opts["connect_args"] = self.connect_args
        return opts
