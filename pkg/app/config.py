from pydantic_settings import BaseSettings
from pydantic import Field
from typing import Literal


class Settings(BaseSettings):
    """Process-level configuration settings."""
    
    # Environment
    environment: Literal["development", "production"] = Field(
        default="development",
        description="Runtime environment"
    )
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = Field(
        default="INFO",
        description="Root logging level"
    )
    
    # Output Configuration
    results_dir: str = Field(default="data/results", description="Directory for replay files, models, checkpoints and tables")
    default_format: Literal["csv", "json"] = Field(default="csv", description="Default report format")
    
    # Execution Configuration
    max_workers: int = Field(default=1, ge=1, description="Worker-pool width for seeds and sweep points (1 = serial)")
    
    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"
        env_prefix = "KPIN_"
        case_sensitive = False
        extra = "ignore"  # Ignore extra fields in .env file


# Global settings instance
settings = Settings()
