"""
Utility functions for writing run artifacts.

This module provides functions to:
- Write CSV (17 significant digits, header row, '\\n' line endings) and JSON
  (sorted keys, indent 2) files deterministically
- Record each written file in the output directory's manifest.json
- Record runs and their artifacts in the run ledger
- List recorded runs
"""

import hashlib
import json
import logging
import math
import os
from datetime import datetime

import numpy as np
import pandas as pd

from models import ArtifactRecord, RunRecord, init_db
from settings import VERSION, database_url

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'
MANIFEST = 'manifest.json'


def sha256_file(path):
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for block in iter(lambda: f.read(65536), b''):
            digest.update(block)
    return digest.hexdigest()


def _plain(value):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


class ArtifactWriter:
    """
    Writes the files of one run into out_dir and keeps their manifest entries.

    Every file gets {file, command, config_hash, version, sha256} in
    manifest.json; entries of earlier runs for other files are kept.
    """

    def __init__(self, out_dir, command, config_hash):
        self.out_dir = out_dir
        self.command = command
        self.config_hash = config_hash
        self.written = []
        os.makedirs(out_dir, exist_ok=True)

    def path(self, name):
        return os.path.join(self.out_dir, name)

    def _finish(self, name, kind):
        full = self.path(name)
        entry = {
            'file': name,
            'kind': kind,
            'command': self.command,
            'config_hash': self.config_hash,
            'version': VERSION,
            'sha256': sha256_file(full),
            'size': os.path.getsize(full),
        }
        self.written.append(entry)
        logger.info(f"Successfully wrote {full}")
        return full

    def _guarded(self, name, kind, write):
        full = self.path(name)
        try:
            write(full)
        except Exception as e:
            logger.error(f"Error writing {full}: {str(e)}")
            if os.path.exists(full):
                os.remove(full)
            raise
        return self._finish(name, kind)

    def write_csv(self, name, frame):
        if not isinstance(frame, pd.DataFrame):
            frame = pd.DataFrame(frame)

        def write(full):
            frame.to_csv(full, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')

        return self._guarded(name, 'csv', write)

    def write_json(self, name, payload):
        def write(full):
            with open(full, 'w', newline='\n') as f:
                json.dump(_plain(payload), f, indent=2, sort_keys=True)
                f.write('\n')

        return self._guarded(name, 'json', write)

    def write_svg(self, name, text):
        def write(full):
            with open(full, 'w', newline='\n') as f:
                f.write(text)

        return self._guarded(name, 'svg', write)

    def update_manifest(self):
        """Merge this run's entries into manifest.json, sorted by file name."""
        full = self.path(MANIFEST)
        entries = {}
        if os.path.exists(full):
            try:
                with open(full) as f:
                    entries = {e['file']: e for e in json.load(f).get('files', [])}
            except (ValueError, KeyError) as e:
                logger.warning(f"Ignoring unreadable manifest {full}: {str(e)}")
        for entry in self.written:
            entries[entry['file']] = {k: v for k, v in entry.items() if k not in ('kind', 'size')}
        with open(full, 'w', newline='\n') as f:
            json.dump({'files': [entries[k] for k in sorted(entries)]}, f, indent=2, sort_keys=True)
            f.write('\n')
        return full


def record_run(config, writer, status, exit_code, message=None, started_at=None, url=None):
    """
    Store one run and its artifacts in the ledger. Returns the run id, or
    None when the ledger cannot be written (the artifacts are still valid).
    """
    url = url or database_url(config.out_dir)
    try:
        Session = init_db(url)
        with Session.begin() as session:
            run = RunRecord(
                command=config.command,
                config_hash=config.config_hash(),
                version=VERSION,
                p=config.p,
                status=status,
                exit_code=exit_code,
                message=message,
                out_dir=os.path.abspath(config.out_dir),
                created_at=started_at or datetime.utcnow(),
                finished_at=datetime.utcnow(),
            )
            for entry in (writer.written if writer else []):
                run.artifacts.append(ArtifactRecord(
                    path=entry['file'],
                    kind=entry['kind'],
                    sha256=entry['sha256'],
                    size=entry['size'],
                ))
            session.add(run)
            session.flush()
            run_id = run.id
        logger.debug(f"Recorded run {run_id} ({config.command}, {status})")
        return run_id
    except Exception as e:
        logger.error(f"Error recording run in {url}: {str(e)}")
        return None


def list_runs(out_dir, url=None, limit=50):
    """Recorded runs, newest first, as dictionaries."""
    url = url or database_url(out_dir)
    Session = init_db(url)
    with Session() as session:
        runs = session.query(RunRecord).order_by(RunRecord.id.desc()).limit(limit).all()
        return [run.to_dict() for run in runs]
