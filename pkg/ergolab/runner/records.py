# Licensed under a 3-clause BSD style license - see LICENSE.rst
"""
Result records and their on-disk formats.

Records are written in a canonical order (replica, step, metric, metadata)
so that the bytes of an output file depend only on the configuration and
the seed.
"""
import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

__all__ = ['ResultRecord', 'COLUMNS', 'FORMATS', 'sort_records',
           'write_records', 'read_records', 'write_summary', 'series',
           'by_replica']

COLUMNS = ('experiment', 'replica', 'step', 'metric', 'value', 'metadata')

FORMATS = {'csv': '.csv', 'json': '.jsonl'}


@dataclass(frozen=True)
class ResultRecord:
    """One number produced by an experiment."""

    experiment: str
    replica: int
    step: int
    metric: str
    value: float
    metadata: str = ''

    def __post_init__(self):
        value = float(self.value)
        if not math.isfinite(value):
            raise ValueError("Record {0}/{1} has a non-finite value".format(
                self.metric, self.step))
        object.__setattr__(self, 'value', value)
        object.__setattr__(self, 'replica', int(self.replica))
        object.__setattr__(self, 'step', int(self.step))

    @property
    def sort_key(self):
        return self.replica, self.step, self.metric, self.metadata


def sort_records(records):
    return sorted(records, key=lambda r: r.sort_key)


def _row(record):
    row = asdict(record)
    row['value'] = repr(record.value)
    return row


def write_records(records, path, fmt='csv'):
    """Write records in canonical order; returns the path written."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    records = sort_records(records)
    with path.open('w', encoding='utf-8', newline='') as f:
        if fmt == 'csv':
            writer = csv.DictWriter(f, fieldnames=COLUMNS,
                                    lineterminator='\n')
            writer.writeheader()
            for record in records:
                writer.writerow(_row(record))
        elif fmt == 'json':
            for record in records:
                f.write(json.dumps(asdict(record), sort_keys=True) + '\n')
        else:
            raise ValueError("Unknown record format {0!r}".format(fmt))
    return path


def read_records(path):
    """Read a ``.csv`` or ``.jsonl`` file written by `write_records`."""
    path = Path(path)
    with path.open(encoding='utf-8', newline='') as f:
        if path.suffix == '.jsonl':
            rows = [json.loads(line) for line in f if line.strip()]
        else:
            rows = list(csv.DictReader(f))
    return [ResultRecord(row['experiment'], row['replica'], row['step'],
                         row['metric'], float(row['value']),
                         row['metadata'] or '')
            for row in rows]


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def write_summary(summary, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True)
                    + '\n', encoding='utf-8')
    return path


def series(records, metric, replica=None):
    """Values of ``metric`` ordered by step, as ``(steps, values)``."""
    rows = sorted((r.step, r.value) for r in records
                  if r.metric == metric
                  and (replica is None or r.replica == replica))
    steps = np.array([s for s, _ in rows], dtype=int)
    values = np.array([v for _, v in rows], dtype=float)
    return steps, values


def by_replica(records, metric):
    """``{replica: (steps, values)}`` for one metric."""
    replicas = sorted({r.replica for r in records if r.metric == metric})
    return {k: series(records, metric, k) for k in replicas}
