"""
Configuration settings for fpcount
"""
import os
import logging
from dotenv import load_dotenv
from pathlib import Path

# Load environment variables from .env file if it exists
load_dotenv()

# Sieve settings
SIEVE_CACHE_DIR = os.getenv("FP_SIEVE_CACHE_DIR") or None
SIEVE_BLOCK_SIZE = int(os.getenv("FP_SIEVE_BLOCK_SIZE", 2**20))  # entries per segment
SEGMENT_THRESHOLD = int(os.getenv("FP_SEGMENT_THRESHOLD", 2**26))
MAX_SIEVE_LIMIT = int(os.getenv("FP_MAX_SIEVE_LIMIT", 2**40))
MAX_TABLE_BYTES = int(os.getenv("FP_MAX_TABLE_BYTES", 2**31))
STREAM_THRESHOLD = int(os.getenv("FP_STREAM_THRESHOLD", 2**25))
PROGRESS_EVERY = int(os.getenv("FP_PROGRESS_EVERY", 10**7))

# In-memory sieve cache
CACHE_TTL = int(os.getenv("FP_CACHE_TTL", 3600))  # seconds
CACHE_MAXSIZE = int(os.getenv("FP_CACHE_MAXSIZE", 4))

# Worker pool
THREADS = int(os.getenv("FP_THREADS", os.cpu_count() or 1))

# Logging
LOG_LEVEL = os.getenv("FP_LOG_LEVEL", "INFO")
LOG_FILE = os.getenv("FP_LOG_FILE") or None

# Exponential sum cost limits
V_DIRECT_LIMIT = int(os.getenv("FP_V_DIRECT_LIMIT", 10**7))
QUADRATURE_LIMIT = int(os.getenv("FP_QUADRATURE_LIMIT", 10**5))
ABS_H_LIMIT = int(os.getenv("FP_ABS_H_LIMIT", 10**6))
DEFAULT_STEP_DIVISOR = int(os.getenv("FP_DEFAULT_STEP_DIVISOR", 8))

# Golden file of recorded empirical envelopes
ENVELOPES_PATH = os.getenv(
    "FP_ENVELOPES_PATH", str(Path(__file__).parent / "data" / "envelopes.json")
)

if SIEVE_CACHE_DIR:
    logging.getLogger(__name__).info(f"Persisting sieve tables under: {SIEVE_CACHE_DIR}")
