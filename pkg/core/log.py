# core/log.py
# Logger factory. Progress lines go to stderr so stdout stays a clean report stream.

import logging
import sys

import config

_FORMAT = "%(message)s"
_configured = False


def _configure():
    global _configured
    root = logging.getLogger("kh")
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(_FORMAT))
    root.addHandler(handler)
    root.setLevel(getattr(logging, config.LOG_LEVEL, logging.WARNING))
    root.propagate = False
    _configured = True


def get_logger(name):
    """Return the 'kh.<name>' logger, configuring the shared handler on first use."""
    if not _configured:
        _configure()
    return logging.getLogger(f"kh.{name}")


def set_level(level):
    """Override LOG_LEVEL at runtime (run.py --verbose)."""
    if not _configured:
        _configure()
    logging.getLogger("kh").setLevel(level)


def attach_stream(stream):
    """Mirror all log output to an extra stream (the run log file)."""
    if not _configured:
        _configure()
    handler = logging.StreamHandler(stream)
    handler.setFormatter(logging.Formatter(_FORMAT))
    logging.getLogger("kh").addHandler(handler)
    return handler


def detach_stream(handler):
    logging.getLogger("kh").removeHandler(handler)
