"""CSV/JSON artifact writers and the chromosome file format.

Every artifact carries the run manifest: CSV files start with a single
``# manifest: {...}`` comment line, JSON files hold a top-level
``"manifest"`` key. Floats are written with 17 significant digits so values
round-trip exactly.
"""
import csv
import json
import math
from pathlib import Path

import numpy as np

from .model import DimensionError, chromosome_length, gene_names, ntot_from_length

CHROMOSOME_ORDER = "c0, c_1..c_ntot, d_12, d_13, ..., d_(ntot-1)ntot (row-major upper triangle)"


def fmt(x):
    """17-significant-digit text for floats, plain text for everything else."""
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    if isinstance(x, (np.integer,)):
        return str(int(x))
    return str(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        # JSON has no inf/nan; keep the value readable and parseable
        return x if math.isfinite(x) else fmt(x)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dumps(obj):
    return json.dumps(_jsonable(obj), indent=2, sort_keys=False) + "\n"


def write_json(path, payload, manifest=None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = {"manifest": manifest, **payload} if manifest is not None else payload
    path.write_text(dumps(body))
    return path


def write_csv(path, header, rows, manifest=None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        if manifest is not None:
            fh.write("# manifest: " + json.dumps(_jsonable(manifest), sort_keys=True) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path):
    """Rows of a CSV artifact as dicts, skipping the manifest comment."""
    with Path(path).open() as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def write_chromosome(path, genes, nanc, delta, manifest=None, extra=None):
    genes = np.asarray(genes, dtype=np.float64)
    ntot = ntot_from_length(genes.size)
    payload = {
        "ntot": ntot,
        "nanc": nanc,
        "delta": delta,
        "order": CHROMOSOME_ORDER,
        "names": gene_names(ntot),
        "genes": genes,
    }
    if extra:
        payload.update(extra)
    return write_json(path, payload, manifest)


def read_chromosome(path):
    """Load a chromosome file; returns ``(genes, header)``.

    A bare JSON array is accepted too, in which case ``ntot`` is inferred from
    its length and the header only carries ``ntot``.
    """
    data = json.loads(Path(path).read_text())
    if isinstance(data, list):
        genes = np.asarray(data, dtype=np.float64)
        return genes, {"ntot": ntot_from_length(genes.size)}
    if not isinstance(data, dict) or "genes" not in data:
        raise ValueError(f"{path}: expected a JSON array or an object with a 'genes' array")
    genes = np.asarray(data["genes"], dtype=np.float64)
    header = {k: v for k, v in data.items() if k not in ("genes", "names")}
    if "ntot" in header and chromosome_length(int(header["ntot"])) != genes.size:
        raise DimensionError(f"{path}: {genes.size} genes do not match ntot={header['ntot']}")
    header.setdefault("ntot", ntot_from_length(genes.size))
    return genes, header
