"""
Persistent Bessel zero cache for the Rotating Wave Toolkit.
"""

import os
import tempfile
import threading
import traceback
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

import pandas as pd

from ..specfun.bessel import BesselZero, bessel_j_zero, zero_bracket
from ..utils.logger import get_logger
from ..utils.validators import Validator

logger = get_logger()


class ZeroCache:
    """Zeros j_{nu,k} stored as a CSV file with header nu,k,value."""

    FILE_NAME = "bessel_zeros.csv"
    COLUMNS = ['nu', 'k', 'value']
    FLOAT_FORMAT = '%.17g'

    def __init__(self, directory: Optional[str] = None):
        self.directory = Path(directory or os.environ.get("ROTWAVE_CACHE_DIR", "cache"))
        self.path = self.directory / self.FILE_NAME
        self._records: Dict[Tuple[float, int], float] = {}
        self._lock = threading.Lock()
        self._pending = 0
        self.load()

    def __len__(self):
        return len(self._records)

    def __contains__(self, key) -> bool:
        nu, k = key
        return (float(nu), int(k)) in self._records

    def load(self) -> int:
        """Read the cache file if it exists; a corrupted file is ignored."""
        if not self.path.exists():
            return 0
        try:
            frame = pd.read_csv(self.path, dtype={'nu': float, 'k': int, 'value': float},
                                float_precision='round_trip')
            if list(frame.columns) != self.COLUMNS:
                raise ValueError(f"unexpected header {list(frame.columns)}")
            for nu, k, value in frame.itertuples(index=False, name=None):
                self._records.setdefault((float(nu), int(k)), float(value))
            logger.debug(f"Loaded {len(self._records)} cached zeros from {self.path}")
        except Exception as e:
            logger.warning(f"Ignoring unreadable zero cache {self.path}: {e}")
            self._records.clear()
        return len(self._records)

    def get(self, nu: float, k: int) -> Optional[float]:
        return self._records.get((float(nu), int(k)))

    def put(self, nu: float, k: int, value: float) -> bool:
        """Add one record; an existing key is never overwritten."""
        key = (float(nu), int(k))
        with self._lock:
            if key in self._records:
                return False
            self._records[key] = float(value)
            self._pending += 1
            return True

    def zeros(self, nu: float, ks: Iterable[int]) -> List[BesselZero]:
        """Zeros of one order, served from the cache and computed when missing."""
        nu = Validator.validate_order(nu)
        zeros = []
        for k in ks:
            value = self.get(nu, k)
            if value is None:
                zero = bessel_j_zero(nu, k)
                self.put(nu, k, zero.value)
            else:
                lower, upper = zero_bracket(nu, k)
                zero = BesselZero(order=nu, index=int(k), value=value, lower=lower, upper=upper)
            zeros.append(zero)
        return zeros

    def to_frame(self) -> pd.DataFrame:
        rows = [(nu, k, value) for (nu, k), value in sorted(self._records.items())]
        return pd.DataFrame(rows, columns=self.COLUMNS)

    def save(self) -> bool:
        """Rewrite the file through a temporary file and an atomic rename."""
        with self._lock:
            if not self._pending:
                return True
            try:
                self.directory.mkdir(parents=True, exist_ok=True)
                handle, temp_path = tempfile.mkstemp(dir=self.directory, suffix='.tmp')
                with os.fdopen(handle, 'w', newline='') as f:
                    self.to_frame().to_csv(f, index=False, float_format=self.FLOAT_FORMAT)
                os.replace(temp_path, self.path)
                logger.info(f"Zero cache saved: {len(self._records)} records ({self._pending} new) in {self.path}")
                self._pending = 0
                return True
            except Exception as e:
                logger.error(f"Error saving zero cache: {str(e)}")
                logger.error(f"Traceback: {traceback.format_exc()}")
                return False
