"""Quantum union bound, Naimark dilation, hypothesis testing and sequential decoding."""

from __future__ import annotations

__version__ = "0.1.0"
