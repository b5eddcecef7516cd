import logging

# Initialize logger
LOGGER = logging.getLogger("tanglish")
LOGGER.setLevel(logging.INFO)
ch = logging.StreamHandler()
formatter = logging.Formatter("%(levelname)s - %(name)s - %(message)s")
ch.setFormatter(formatter)
LOGGER.addHandler(ch)
