"""
Shared helpers for the API routes.
"""

import logging

from fastapi import HTTPException

from app.scheduling.errors import SchedulingError
from app.scheduling.instance import Instance, parse_tsplib

logger = logging.getLogger(__name__)


def error(status_code: int, message: str) -> HTTPException:
    """An ``HTTPException`` carrying the standard error envelope."""
    return HTTPException(
        status_code=status_code,
        detail={"status": "error", "message": message},
    )


def parse_instance(text: str) -> Instance:
    """
    Parse TSPLIB text from a request body.

    Raises **400** with the parser's message (field and line included) when
    the text is not a valid instance.
    """
    try:
        return parse_tsplib(text)
    except SchedulingError as exc:
        logger.warning("Rejected instance: %s", exc)
        raise error(400, f"invalid instance: {exc}") from exc
