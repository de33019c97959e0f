"""Support code shared by the commands: errors, reports, config files, workers."""
import logging

logging.getLogger(__name__).debug("Package '%s' loaded.", __name__)
