# app/core/config.py

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # --- Execução do Monte Carlo ---
    # Número de threads do ensemble (pode ser sobrescrito por --threads)
    THREADS: int = 1
    # Repetições por item de trabalho. Fixo e independente do número de threads,
    # para que o resultado seja idêntico bit a bit com qualquer paralelismo.
    CHUNK_SIZE: int = 512

    # --- Saída ---
    OUTPUT_PREFIX: str = "out/run"
    LOG_LEVEL: str = "INFO"

    # --- Suite de validação (comando `validate`) ---
    VALIDATE_REPEATS: int = 4000
    VALIDATE_DT: float = 1e-2
    VALIDATE_SEED: int = 20190417

    model_config = SettingsConfigDict(env_file=".env", env_prefix="ECHO_", extra="ignore")


settings = Settings()
