from __future__ import annotations

import logging
from pathlib import Path

from src.core.errors import DataError
from src.data.dataset import Pathway, PathwayDB
from src.storage.atomic import atomic_write_text

LOGGER = logging.getLogger(__name__)


def parse_gmt(path: str | Path) -> PathwayDB:
    """Read a GMT file: ``name<TAB>description<TAB>gene...`` per line, description ignored."""
    source = Path(path)
    if not source.exists():
        raise FileNotFoundError(f"GMT file not found: {source}")
    pathways: list[Pathway] = []
    seen: set[str] = set()
    for line_no, line in enumerate(source.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        fields = [field.strip() for field in line.split("\t")]
        if len(fields) < 3:
            raise DataError(f"expected at least 3 tab-separated fields, got {len(fields)}", path=str(source), line=line_no)
        name = fields[0]
        if not name:
            raise DataError("empty pathway name", path=str(source), line=line_no)
        if name in seen:
            raise DataError(f"duplicate pathway name {name!r}", path=str(source), line=line_no)
        genes = tuple(dict.fromkeys(g for g in fields[2:] if g))
        if not genes:
            raise DataError(f"pathway {name!r} has no genes", path=str(source), line=line_no)
        seen.add(name)
        pathways.append(Pathway(name=name, genes=genes))
    LOGGER.info("Parsed %s pathways from %s", len(pathways), source)
    return PathwayDB(pathways=tuple(pathways))


def write_gmt(path: str | Path, db: PathwayDB, description: str = "na") -> None:
    lines = ["\t".join([p.name, description, *p.genes]) for p in db.pathways]
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))
