"""Flash/non-flash fingerprint presentation attack analysis toolkit."""

__version__ = "0.1.0"
