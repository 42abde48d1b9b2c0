"""
Persistent store of motif bounds, one JSON record per line.

Records are keyed by canonical motif key and the params hash they were
computed under; a record made with other parameters is a miss. The file is
append-only; loading keeps the last record per key and rewrites the file
when it held duplicates or unreadable lines.
"""
import json
import logging
import os
import tempfile
import threading
from collections import Counter
from typing import Dict, Optional, Tuple

from rnapbound.common.errors import PersistenceError
from rnapbound.common.record import PBoundRecord

logger = logging.getLogger(__name__)


class BoundCache(object):
    def __init__(self, path: Optional[str] = None):
        """
        :param path: (str) JSON-lines file, created on first write; None keeps
            the cache in memory only
        """
        self.path = path
        self._storage: Dict[Tuple[str, str], PBoundRecord] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0
        if path is not None and os.path.exists(path):
            self._load()

    def __len__(self):
        return len(self._storage)

    def __contains__(self, key) -> bool:
        return any(stored_key == key for stored_key, _ in self._storage)

    def _load(self):
        lines = 0
        try:
            with open(self.path, encoding='utf-8') as fp:
                for line_no, line in enumerate(fp, start=1):
                    line = line.strip()
                    if not line:
                        continue
                    lines += 1
                    try:
                        record = PBoundRecord.from_dict(json.loads(line))
                    except (ValueError, TypeError, AssertionError) as e:
                        logger.warning("%s:%d: dropping unreadable cache line (%s)", self.path, line_no, e)
                        continue
                    self._storage[(record.key, record.params_hash)] = record
        except OSError as e:
            raise PersistenceError("cannot read cache {}: {}".format(self.path, e))
        if lines != len(self._storage):
            self.compact()
        logger.debug("loaded %d cached bounds from %s", len(self._storage), self.path)

    def get(self, key: str, params_hash: str) -> Optional[PBoundRecord]:
        record = self._storage.get((key, params_hash))
        with self._lock:
            if record is None:
                self.misses += 1
            else:
                self.hits += 1
        return record

    def put(self, key: str, record: PBoundRecord):
        if record.key != key:
            record = PBoundRecord.from_dict(dict(record.to_dict(), key=key))
        with self._lock:
            self._storage[(key, record.params_hash)] = record
            if self.path is not None:
                try:
                    with open(self.path, 'a', encoding='utf-8') as fp:
                        fp.write(record.to_json() + '\n')
                except OSError as e:
                    raise PersistenceError("cannot write cache {}: {}".format(self.path, e))

    def compact(self):
        """Rewrites the file with one line per stored record."""
        if self.path is None:
            return
        with self._lock:
            directory = os.path.dirname(os.path.abspath(self.path))
            try:
                fd, tmp = tempfile.mkstemp(dir=directory, prefix='.pbound-cache-')
                with os.fdopen(fd, 'w', encoding='utf-8') as fp:
                    for stored_key in sorted(self._storage):
                        fp.write(self._storage[stored_key].to_json() + '\n')
                os.replace(tmp, self.path)
            except OSError as e:
                raise PersistenceError("cannot rewrite cache {}: {}".format(self.path, e))

    def clear(self):
        with self._lock:
            self._storage = {}

    def inspect(self) -> dict:
        """Entry count plus how the entries break down by method and params hash."""
        records = list(self._storage.values())
        return {
            'path': self.path,
            'entries': len(records),
            'keys': len({record.key for record in records}),
            'methods': dict(sorted(Counter(record.method.value for record in records).items())),
            'params_hashes': dict(sorted(Counter(record.params_hash for record in records).items())),
        }


def cache_get(cache: BoundCache, key: str, params_hash: str) -> Optional[PBoundRecord]:
    return cache.get(key, params_hash)


def cache_put(cache: BoundCache, key: str, record: PBoundRecord):
    if not record.params_hash:
        raise PersistenceError("record for {} carries no params hash".format(key))
    cache.put(key, record)
