import logging

logging.getLogger(__name__).debug("Command package '%s' loaded.", __name__)
