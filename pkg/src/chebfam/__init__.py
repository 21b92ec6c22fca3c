"""Chebotarev statistics, field families and explicit constants."""

__version__ = "0.1.0"
