import os

from mmengine.logging import MMLogger

LOGGER_NAME = 'u2detect'


def get_logger() -> MMLogger:
    """Get the package logger.

    The level is read from the ``U2DETECT_LOG`` environment variable the
    first time the logger is created. Defaults to ``WARNING``.
    """
    if MMLogger.check_instance_created(LOGGER_NAME):
        return MMLogger.get_instance(LOGGER_NAME)
    level = os.getenv('U2DETECT_LOG', 'WARNING').upper()
    return MMLogger.get_instance(
        LOGGER_NAME, logger_name=LOGGER_NAME, log_level=level)
