"""Configuration for the application"""

from typing import Optional
from pydantic_settings import BaseSettings, SettingsConfigDict
from dotenv import load_dotenv

load_dotenv()


class Settings(BaseSettings):
    """Settings for the application"""

    model_config = SettingsConfigDict(env_prefix="RCAD_", extra="ignore")

    PROJECT_NAME: str = "rcad"
    SEED: Optional[int] = None  # RCAD_SEED overrides config-file seeds
    LOG_LEVEL: str = "INFO"
    OUTPUT_DIR: str = "runs"


settings = Settings()
