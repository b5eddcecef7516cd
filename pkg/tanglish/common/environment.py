import logging
import os
from pathlib import Path
from typing import Optional, Union

from dotenv import load_dotenv

load_dotenv()

LOGGER = logging.getLogger(__name__)


class TanglishEnv:
    def __init__(self):
        self.assets_dir = Path(__file__).parent.parent / "assets"

        # Root data directory
        self.set_data_dir()

    def set_data_dir(self, DATA_DIR: Optional[Union[str, Path]] = None):
        if DATA_DIR is None:
            DATA_DIR = self.resolve_data_dir()

        self.data_dir = Path(DATA_DIR)

    def resolve_data_dir(self) -> Path:
        data_path = os.getenv("TANGLISH_DATA_PATH", "")
        if data_path != "":
            temp_path = Path(data_path)
            if temp_path.is_dir():
                LOGGER.info(f"Using workspace: {data_path} as per environment variable TANGLISH_DATA_PATH.")
                return temp_path
            raise FileNotFoundError(
                f"The path defined by environment variable TANGLISH_DATA_PATH ({data_path}) is not a directory."
            )
        return Path.cwd()

    @property
    def hasoc_dir(self) -> Optional[Path]:
        hasoc_path = os.getenv("TANGLISH_HASOC_DIR", "")
        if hasoc_path == "" or not Path(hasoc_path).is_dir():
            return None
        return Path(hasoc_path)

    def resolve_path(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        if path.is_absolute():
            return path
        return self.data_dir / path


TANGLISH_ENV = TanglishEnv()
