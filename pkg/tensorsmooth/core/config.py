from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    # Parallelism
    THREADS: int = 1

    # Work-buffer size for one observation chunk, in float64 elements
    CHUNK_ELEMENTS: int = 2**20

    # Largest coefficient dimension the dense trace check accepts
    DENSE_CHECK_LIMIT: int = 5000

    # Logging
    LOG_LEVEL: str = "WARNING"

    # Environment
    ENVIRONMENT: str = "development"

    class Config:
        env_prefix = "TENSORSMOOTH_"
        env_file = ".env"


settings = Settings()
