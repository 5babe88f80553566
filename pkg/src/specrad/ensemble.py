"""N x N i.i.d. matrices with provenance, dense or sparse, and their file format.

File layout (all little-endian)::

    header   "<4sHBBIQI": magic b"SRMX", version u16, storage u8 (0 dense,
             1 sparse), reserved u8, n u32, seed u64, descriptor length u32
    descriptor  UTF-8 JSON of the entry distribution ("null" if none)
    dense    n*n records of (re f64, im f64), row-major
    sparse   nnz u64, then nnz records of (row u32, col u32, re f64, im f64)

Sparse triplets use 0-based indices and are stored in row-major order.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dist import EntryDistribution, sample_array
from .errors import ConfigurationError, MatrixFormatError, UnsupportedError

MAGIC = b"SRMX"
VERSION = 1
_HEADER = struct.Struct("<4sHBBIQI")
_DENSE = np.dtype([("re", "<f8"), ("im", "<f8")])
_TRIPLET = np.dtype([("row", "<u4"), ("col", "<u4"), ("re", "<f8"), ("im", "<f8")])
_STORAGE_CODES = {"dense": 0, "sparse": 1}


@dataclass(frozen=True, eq=False)
class MatrixSample:
    n: int
    storage: str
    seed: int
    dist: EntryDistribution | None
    dense: np.ndarray | None = None
    rows: np.ndarray | None = None
    cols: np.ndarray | None = None
    values: np.ndarray | None = None

    def __post_init__(self):
        if self.storage == "dense":
            if self.dense is None or self.dense.shape != (self.n, self.n):
                raise ConfigurationError("dense storage needs an n x n array")
        elif self.storage == "sparse":
            if self.rows is None or self.cols is None or self.values is None:
                raise ConfigurationError("sparse storage needs rows, cols and values")
            if len({len(self.rows), len(self.cols), len(self.values)}) != 1:
                raise ConfigurationError("triplet arrays differ in length")
            if len(self.rows):
                if min(self.rows.min(), self.cols.min()) < 0 or max(self.rows.max(), self.cols.max()) >= self.n:
                    raise ConfigurationError("triplet index out of range")
                flat = self.rows.astype(np.int64) * self.n + self.cols
                if len(np.unique(flat)) != len(flat):
                    raise ConfigurationError("duplicate index pair in sparse storage")
        else:
            raise ConfigurationError(f"unknown storage {self.storage!r}")
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError("seed must fit in an unsigned 64-bit integer")

    @classmethod
    def from_array(cls, a, seed: int = 0, dist: EntryDistribution | None = None) -> MatrixSample:
        a = np.asarray(a)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ConfigurationError(f"expected a square matrix, got shape {a.shape}")
        if not np.iscomplexobj(a):
            a = a.astype(float)
        return cls(n=a.shape[0], storage="dense", seed=seed, dist=dist, dense=a)

    def to_dense(self) -> np.ndarray:
        if self.storage == "dense":
            return self.dense
        dtype = complex if np.iscomplexobj(self.values) else float
        out = np.zeros((self.n, self.n), dtype=dtype)
        out[self.rows, self.cols] = self.values
        return out

    def to_sparse(self) -> MatrixSample:
        if self.storage == "sparse":
            return self
        rows, cols = np.nonzero(self.dense)
        return MatrixSample(
            n=self.n, storage="sparse", seed=self.seed, dist=self.dist,
            rows=rows.astype(np.int64), cols=cols.astype(np.int64), values=self.dense[rows, cols],
        )

    @property
    def max_abs(self) -> float:
        if self.storage == "dense":
            return float(np.abs(self.dense).max()) if self.n else 0.0
        return float(np.abs(self.values).max()) if len(self.values) else 0.0

    @property
    def nnz(self) -> int:
        if self.storage == "sparse":
            return len(self.values)
        return int(np.count_nonzero(self.dense))

    def same_matrix(self, other: MatrixSample) -> bool:
        return self.n == other.n and np.array_equal(self.to_dense(), other.to_dense())


def as_array(X) -> np.ndarray:
    """Dense ndarray view of a MatrixSample or anything array-like."""
    if isinstance(X, MatrixSample):
        return X.to_dense()
    a = np.asarray(X)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ConfigurationError(f"expected a square matrix, got shape {a.shape}")
    return a


def sample_matrix(dist: EntryDistribution, n: int, seed: int, storage: str = "dense") -> MatrixSample:
    """Sample X with i.i.d. entries; entries are drawn row-major from one PCG64 stream."""
    if n < 1:
        raise ConfigurationError("n must be >= 1")
    if storage not in _STORAGE_CODES:
        raise ConfigurationError(f"unknown storage {storage!r}")
    if storage == "sparse" and not dist.has_atom_at_zero:
        raise UnsupportedError(f"sparse storage needs a law with an atom at 0; {dist.kind} has none")
    rng = np.random.default_rng(seed)
    dense = sample_array(dist, rng, (n, n))
    X = MatrixSample(n=n, storage="dense", seed=seed, dist=dist, dense=dense)
    return X.to_sparse() if storage == "sparse" else X


def event_B_holds(X) -> bool:
    """All entries bounded by n^2 in modulus."""
    if isinstance(X, MatrixSample):
        return X.max_abs <= X.n**2
    a = as_array(X)
    return float(np.abs(a).max()) <= a.shape[0] ** 2


# file format --------------------------------------------------------------


def save(X: MatrixSample, path) -> None:
    desc = b"null" if X.dist is None else X.dist.to_json().encode()
    parts = [_HEADER.pack(MAGIC, VERSION, _STORAGE_CODES[X.storage], 0, X.n, X.seed, len(desc)), desc]
    if X.storage == "dense":
        rec = np.empty(X.n * X.n, dtype=_DENSE)
        flat = X.dense.ravel()
        rec["re"] = flat.real
        rec["im"] = flat.imag if np.iscomplexobj(flat) else 0.0
        parts.append(rec.tobytes())
    else:
        rec = np.empty(len(X.values), dtype=_TRIPLET)
        rec["row"] = X.rows
        rec["col"] = X.cols
        rec["re"] = X.values.real
        rec["im"] = X.values.imag if np.iscomplexobj(X.values) else 0.0
        parts.append(struct.pack("<Q", len(rec)))
        parts.append(rec.tobytes())
    Path(path).write_bytes(b"".join(parts))


def _values(rec: np.ndarray) -> np.ndarray:
    re = rec["re"].astype(float)
    im = rec["im"].astype(float)
    return re + 1j * im if np.any(im != 0) else re


def loads(buf: bytes) -> MatrixSample:
    if len(buf) < _HEADER.size:
        raise MatrixFormatError(f"truncated header: {len(buf)} of {_HEADER.size} bytes", len(buf))
    magic, version, storage_code, _, n, seed, dlen = _HEADER.unpack_from(buf, 0)
    if magic != MAGIC:
        raise MatrixFormatError(f"bad magic {magic!r}", 0)
    if version != VERSION:
        raise MatrixFormatError(f"unsupported version {version}", 4)
    if storage_code not in (0, 1):
        raise MatrixFormatError(f"bad storage flag {storage_code}", 6)
    off = _HEADER.size
    if len(buf) < off + dlen:
        raise MatrixFormatError("truncated descriptor", len(buf))
    try:
        desc = json.loads(buf[off:off + dlen].decode())
        dist = None if desc is None else EntryDistribution.from_dict(desc)
    except (ValueError, UnicodeDecodeError) as exc:
        raise MatrixFormatError(f"bad descriptor JSON: {exc}", off) from exc
    off += dlen
    if storage_code == 0:
        need = n * n * _DENSE.itemsize
        if len(buf) - off != need:
            raise MatrixFormatError(f"dense payload has {len(buf) - off} bytes, expected {need}", min(len(buf), off + need))
        rec = np.frombuffer(buf, dtype=_DENSE, count=n * n, offset=off)
        return MatrixSample(n=n, storage="dense", seed=seed, dist=dist, dense=_values(rec).reshape(n, n))
    if len(buf) < off + 8:
        raise MatrixFormatError("truncated triplet count", len(buf))
    (nnz,) = struct.unpack_from("<Q", buf, off)
    off += 8
    need = nnz * _TRIPLET.itemsize
    if len(buf) - off != need:
        raise MatrixFormatError(f"sparse payload has {len(buf) - off} bytes, expected {need}", min(len(buf), off + need))
    rec = np.frombuffer(buf, dtype=_TRIPLET, count=nnz, offset=off)
    try:
        return MatrixSample(
            n=n, storage="sparse", seed=seed, dist=dist,
            rows=rec["row"].astype(np.int64), cols=rec["col"].astype(np.int64), values=_values(rec),
        )
    except ConfigurationError as exc:
        raise MatrixFormatError(str(exc), off) from exc


def load(path) -> MatrixSample:
    return loads(Path(path).read_bytes())
