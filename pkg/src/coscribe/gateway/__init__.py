from .client import ChatExchange, Gateway, HttpProvider
from .mock import MockScript
from .templates import render

__all__ = ["ChatExchange", "Gateway", "HttpProvider", "MockScript", "render"]
