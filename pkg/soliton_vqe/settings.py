from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    THREADS: int = 1
    OUTPUT_DIR: str = "results"
    DEBUG_CHECKS: bool = False

    class Config:
        env_file = "./.env"
        env_prefix = "SOLITON_VQE_"


settings = Settings()


def worker_threads() -> int:
    return max(1, settings.THREADS)
