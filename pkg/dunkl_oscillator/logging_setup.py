import logging
import os
import sys

from . import config


def setup_logging(log_level=logging.INFO, log_dir=None, log_filename=config.LOG_FILENAME):
    """Configures logging to stderr and, when log_dir is given, to a file.

    stdout carries CSV/JSON output, so the console handler writes to stderr.
    """
    handlers = []
    if log_dir is not None:
        if not os.path.exists(log_dir):
            try:
                os.makedirs(log_dir)
            except OSError as e:
                print(f"Error creating log directory {log_dir}: {e}", file=sys.stderr)
        if os.path.isdir(log_dir):
            handlers.append(logging.FileHandler(os.path.join(log_dir, log_filename), mode='a'))

    # Force reconfiguration by removing existing handlers first
    root_logger = logging.getLogger()
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    # Simpler format for the console; basicConfig leaves preset formatters alone
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(log_level)
    console_handler.setFormatter(logging.Formatter('%(asctime)s - %(levelname)s - %(message)s'))
    handlers.append(console_handler)

    logging.basicConfig(level=log_level,
                        format='%(asctime)s - %(levelname)s - %(threadName)s - %(message)s',
                        handlers=handlers)
    logging.debug(f"Logging configured: level={logging.getLevelName(log_level)}, handlers={len(handlers)}")


if __name__ == '__main__':
    setup_logging(logging.DEBUG)
    logging.info("This is an info message from logging_setup test.")
    logging.warning("This is a warning message from logging_setup test.")
