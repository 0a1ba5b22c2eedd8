"""
Application configuration loaded from environment variables / .env file.
"""

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    # Genetic algorithm defaults (r, a and budgets of the TSPLIB experiments)
    population_size: int = 30
    replacement_alpha: float = 0.5
    iterations: int = 4000
    stats_period: int = 400

    # Recombination / exact solver guards
    q_cap: int = 30
    bruteforce_q_cap: int = 20
    held_karp_max_k: int = 22

    # Batch execution; 0 means one worker per CPU, 1 runs inline
    workers: int = 0

    # Files
    output_dir: str = "results"
    targets_file: str = "data/optima.csv"
    tsplib_dir: str = "data/tsplib"

    log_level: str = "INFO"

    # API server
    api_host: str = "0.0.0.0"
    api_port: int = 8000
    api_max_runs: int = 200
    api_max_concurrent_batches: int = 1

    model_config = {"env_file": ".env", "env_file_encoding": "utf-8"}


settings = Settings()
