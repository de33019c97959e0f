"""
Logging Configuration Module

Sets up logging for kummerlab runs by:
  - Loading environment variables using python-dotenv.
  - Reading the log level from LOG_LEVEL (defaulting to INFO).
  - Optionally mirroring the log to the file named by LOG_FILE, so long sweeps
    leave a trace next to their CSV/JSON artifacts.
  - Configuring the output format to include the timestamp, log level, and message.

Any module that logs through Python's logging after this module is imported
uses these settings.
"""
import os
import logging
from dotenv import load_dotenv

load_dotenv()

LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_FILE = os.getenv("LOG_FILE", "")
LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'

try:
    log_level = getattr(logging, LOG_LEVEL.upper())
except AttributeError:
    print(f"WARNING: Invalid LOG_LEVEL '{LOG_LEVEL}'. Defaulting to INFO.")
    log_level = logging.INFO

handlers = [logging.StreamHandler()]
if LOG_FILE:
    handlers.append(logging.FileHandler(LOG_FILE, encoding="utf-8"))

logging.basicConfig(level=log_level, format=LOG_FORMAT, handlers=handlers)
