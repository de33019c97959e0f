"""Runtime configuration: logging, version and numeric defaults."""
import logging

logging.getLogger(__name__).debug("Package '%s' loaded.", __name__)
