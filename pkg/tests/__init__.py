import logging

import tanglish  # noqa: F401

# the package logger defaults to INFO; keep test output to warnings
logging.getLogger("tanglish").setLevel(logging.WARNING)
