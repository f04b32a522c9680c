"""Line-oriented UTF-8 TSV reading shared by the fixture loaders."""

from __future__ import annotations

from pathlib import Path

from .errors import IngestError


def tsv_rows(path, min_cols: int, max_cols: int | None = None):
    """Yield (line_no, columns) per data row.

    Blank lines and '#' comments are skipped; a row with an unexpected
    column count raises IngestError naming the line.
    """
    path = Path(path)
    max_cols = max_cols or min_cols
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if not min_cols <= len(parts) <= max_cols:
                raise IngestError(
                    path, line_no,
                    f"expected {min_cols}..{max_cols} columns, got {len(parts)}",
                )
            yield line_no, parts
