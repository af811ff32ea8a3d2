from .context import (
    Certificate,
    CertificateStore,
    StoreClosed,
    StoreError,
    canonical_json,
    open_store,
)

__all__ = [
    "Certificate",
    "CertificateStore",
    "StoreClosed",
    "StoreError",
    "canonical_json",
    "open_store",
]
