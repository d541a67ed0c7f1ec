"""
Cache service for sieve tables

Tables live in an in-memory TTL cache and, when FP_SIEVE_CACHE_DIR is set, in
FPSV1 files on disk:

    b"FPSV1" | limit (uint64 LE) | is_prime bitset (little bit order) | Lambda (float64 LE)

A request for limit L is served by any cached table whose limit is >= L.
"""
import logging
import os
import struct
import tempfile
import threading
from pathlib import Path
from typing import Optional

import numpy as np
from cachetools import TTLCache

from fpcount.config import CACHE_MAXSIZE, CACHE_TTL, SIEVE_CACHE_DIR
from fpcount.services.arith import SieveTables, build_sieve

logger = logging.getLogger(__name__)

MAGIC = b"FPSV1"
HEADER = struct.Struct("<Q")


def write_tables(tables: SieveTables, path: Path) -> None:
    """Write tables atomically: a temp file in the same directory, then rename."""
    path = Path(path)
    bits = np.packbits(tables.is_prime, bitorder="little")
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".fpsv-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(MAGIC)
            fh.write(HEADER.pack(tables.limit))
            fh.write(bits.tobytes())
            fh.write(np.ascontiguousarray(tables.lam, dtype="<f8").tobytes())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_tables(path: Path) -> SieveTables:
    """Load an FPSV1 file; raises ValueError on a malformed file."""
    data = Path(path).read_bytes()
    if not data.startswith(MAGIC):
        raise ValueError(f"{path}: not an FPSV1 file")
    offset = len(MAGIC)
    (limit,) = HEADER.unpack_from(data, offset)
    offset += HEADER.size
    entries = limit + 1
    bit_bytes = (entries + 7) // 8
    if len(data) != offset + bit_bytes + 8 * entries:
        raise ValueError(f"{path}: size does not match limit {limit}")
    bits = np.frombuffer(data, dtype=np.uint8, count=bit_bytes, offset=offset)
    is_prime = np.unpackbits(bits, count=entries, bitorder="little").astype(bool)
    lam = np.frombuffer(data, dtype="<f8", count=entries, offset=offset + bit_bytes).astype(np.float64)
    is_prime.flags.writeable = False
    lam.flags.writeable = False
    return SieveTables(limit=int(limit), is_prime=is_prime, lam=lam)


class SieveCache:
    def __init__(self, cache_dir: Optional[str] = SIEVE_CACHE_DIR,
                 maxsize: int = CACHE_MAXSIZE, ttl: int = CACHE_TTL):
        self.memory_cache = TTLCache(maxsize=maxsize, ttl=ttl)
        self.lock = threading.Lock()
        self.cache_dir = None

        if cache_dir:
            try:
                Path(cache_dir).mkdir(parents=True, exist_ok=True)
                self.cache_dir = Path(cache_dir)
                logger.info(f"Sieve disk cache at {self.cache_dir}")
            except OSError as e:
                logger.warning(f"Sieve cache dir unusable, using memory only: {str(e)}")

    def get(self, limit: int) -> Optional[SieveTables]:
        """Smallest cached table covering ``limit``, memory first, then disk."""
        try:
            with self.lock:
                covering = [key for key in self.memory_cache if key >= limit]
                if covering:
                    key = min(covering)
                    logger.debug(f"Memory cache hit for limit {limit} (table {key})")
                    return self.memory_cache[key]

            path = self._covering_file(limit)
            if path is not None:
                tables = read_tables(path)
                logger.info(f"Loaded sieve tables for limit {tables.limit} from {path}")
                with self.lock:
                    self.memory_cache[tables.limit] = tables
                return tables

            logger.debug(f"Cache miss for limit {limit}")
            return None

        except Exception as e:
            logger.error(f"Error reading sieve cache: {str(e)}")
            return None

    def set(self, tables: SieveTables) -> None:
        try:
            with self.lock:
                self.memory_cache[tables.limit] = tables
            if self.cache_dir is not None:
                path = self._path(tables.limit)
                if not path.exists():
                    write_tables(tables, path)
                    logger.info(f"Persisted sieve tables for limit {tables.limit} to {path}")
        except Exception as e:
            logger.error(f"Error storing sieve tables: {str(e)}")

    def get_or_build(self, limit: int) -> SieveTables:
        limit = max(int(limit), 2)
        tables = self.get(limit)
        if tables is None:
            tables = build_sieve(limit)
            self.set(tables)
        return tables

    def _path(self, limit: int) -> Path:
        return self.cache_dir / f"sieve-{limit}.fpsv"

    def _covering_file(self, limit: int) -> Optional[Path]:
        if self.cache_dir is None:
            return None
        best = None
        for path in self.cache_dir.glob("sieve-*.fpsv"):
            try:
                stored = int(path.stem.split("-", 1)[1])
            except ValueError:
                continue
            if stored >= limit and (best is None or stored < best[0]):
                best = (stored, path)
        return best[1] if best else None


sieve_cache = SieveCache()


def get_sieve(limit: int) -> SieveTables:
    return sieve_cache.get_or_build(limit)
