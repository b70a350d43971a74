"""
Result export for the Rotating Wave Toolkit.
"""

import json
import math
import sys
import traceback
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from ..utils.logger import get_logger

logger = get_logger()

SCHEMA_VERSION = 1


@dataclass
class ExportResult:
    """Result of writing one command output."""
    success: bool
    path: Optional[str] = None
    rows: int = 0
    error_message: Optional[str] = None


@dataclass
class CommandOutput:
    """A command's JSON document and, for tabular commands, its table."""
    command: str
    document: Dict[str, Any]
    frame: Optional[pd.DataFrame] = None
    embed_rows: bool = True
    failed_exports: List[str] = field(default_factory=list)


def _plain(value):
    """JSON-safe copy: numpy scalars unwrapped, non-finite reals as null."""
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return [_plain(item) for item in value.tolist()]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


class ResultExporter:
    """Serialises command outputs as JSON or CSV to a file or stdout."""

    FLOAT_FORMAT = '%.17g'

    def render(self, output: CommandOutput, output_format: str) -> str:
        if output_format == 'csv':
            frame = output.frame
            if frame is None:
                frame = pd.json_normalize(_plain(output.document))
            return frame.to_csv(index=False, float_format=self.FLOAT_FORMAT)

        document = {'schema': SCHEMA_VERSION, 'command': output.command}
        document.update(output.document)
        if output.frame is not None and output.embed_rows and 'rows' not in document:
            document['rows'] = output.frame.to_dict(orient='records')
        return json.dumps(_plain(document), indent=2) + "\n"

    def export(self, output: CommandOutput, output_format: str = 'json',
               output_path: Optional[str] = None) -> ExportResult:
        """Write to ``output_path`` or stdout; I/O failures are reported, not raised."""
        rows = len(output.frame) if output.frame is not None else 1
        try:
            text = self.render(output, output_format)
            if output_path is None:
                sys.stdout.write(text)
                sys.stdout.flush()
            else:
                path = Path(output_path)
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text(text)
                logger.info(f"{output.command} result exported to: {path}")
            return ExportResult(success=True, path=output_path, rows=rows)

        except Exception as e:
            error_msg = f"Error exporting {output.command} result: {str(e)}"
            logger.error(error_msg)
            logger.error(f"Traceback: {traceback.format_exc()}")
            return ExportResult(success=False, path=output_path, rows=0, error_message=error_msg)
