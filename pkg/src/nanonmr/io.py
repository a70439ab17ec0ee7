"""File formats: binary traces, CSV exports, structured-text reports.

Binary trace layout (little-endian throughout):

    magic     4 bytes   b"NNMR"
    version   uint32    format version, currently 1
    dt        float64   sampling period, seconds
    n         uint64    number of samples
    seed      int64     root seed of the generating run
    tag_len   uint16    length of the model tag
    model_tag utf-8     tag_len bytes
    payload   n float64 samples

CSV files are written with the csv module (minimal RFC-style quoting,
header row first).  Structured-text reports are "key: value" lines with
schema_version always first, so they stay diffable and greppable.
"""

import csv
import hashlib
import struct
import time
from dataclasses import dataclass, field

import numpy as np

TRACE_MAGIC = b"NNMR"
TRACE_VERSION = 1
REPORT_SCHEMA_VERSION = 1

_HEADER_FMT = "<4sIdQq H"  # magic, version, dt, n, seed, tag_len


class TraceFormatError(ValueError):
    """Raised when a binary trace file fails header or size validation."""


def write_trace(path, samples, dt, seed, model_tag):
    """Write a sampled trace in the versioned binary format."""
    samples = np.ascontiguousarray(samples, dtype="<f8")
    tag = model_tag.encode("utf-8")
    if len(tag) > 0xFFFF:
        raise ValueError("model_tag too long")
    header = struct.pack(_HEADER_FMT, TRACE_MAGIC, TRACE_VERSION,
                         float(dt), samples.size, int(seed), len(tag))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(tag)
        fh.write(samples.tobytes())


def read_trace(path):
    """Read a binary trace; returns (samples, dt, seed, model_tag)."""
    hdr_size = struct.calcsize(_HEADER_FMT)
    with open(path, "rb") as fh:
        hdr = fh.read(hdr_size)
        if len(hdr) < hdr_size:
            raise TraceFormatError(f"{path}: truncated header")
        magic, version, dt, n, seed, tag_len = struct.unpack(_HEADER_FMT, hdr)
        if magic != TRACE_MAGIC:
            raise TraceFormatError(f"{path}: bad magic {magic!r}")
        if version != TRACE_VERSION:
            raise TraceFormatError(f"{path}: unsupported version {version}")
        tag = fh.read(tag_len)
        if len(tag) < tag_len:
            raise TraceFormatError(f"{path}: truncated model tag")
        payload = fh.read(n * 8)
        if len(payload) < n * 8:
            raise TraceFormatError(f"{path}: expected {n} samples, payload "
                                   f"holds {len(payload) // 8}")
    samples = np.frombuffer(payload, dtype="<f8")
    return samples, dt, seed, tag.decode("utf-8")


def write_csv(path, header, rows):
    """Write rows (iterable of sequences) with a header row."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, quoting=csv.QUOTE_MINIMAL)
        w.writerow(header)
        for row in rows:
            w.writerow(row)


def read_csv(path):
    """Read a CSV written by write_csv; returns (header, rows as strings)."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        return header, [row for row in r]


def correlation_to_csv(path, ac):
    """Export an AutoCorrelation as lag,value,count rows."""
    write_csv(path, ["lag_s", "value", "count"],
              zip((f"{v:.12g}" for v in ac.lags),
                  (f"{v:.12g}" for v in ac.values),
                  (int(c) for c in ac.counts)))


def spectra_to_csv(path, x_over_omega_d, s_exp, s_pl, s_mixed):
    """Export the three-model spectrum comparison on a shared grid."""
    write_csv(path, ["omega_over_omegaD", "S_exp", "S_pl", "S_mixed"],
              zip(*(map("{:.12g}".format, col)
                    for col in (x_over_omega_d, s_exp, s_pl, s_mixed))))


def write_report(path, entries, schema_version=REPORT_SCHEMA_VERSION):
    """Write a structured-text report: 'key: value' lines.

    entries is a dict or list of (key, value) pairs; schema_version is
    always emitted first regardless of its position in entries.
    """
    items = list(entries.items()) if isinstance(entries, dict) else list(entries)
    with open(path, "w") as fh:
        fh.write(f"schema_version: {schema_version}\n")
        for key, value in items:
            if key == "schema_version":
                continue
            if any(ch in str(key) for ch in ":\n"):
                raise ValueError(f"illegal report key {key!r}")
            fh.write(f"{key}: {value}\n")


def read_report(path):
    """Parse a structured-text report back into an ordered dict of strings."""
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            key, _, value = line.partition(": ")
            out[key] = value
    if "schema_version" not in out:
        raise ValueError(f"{path}: missing schema_version line")
    return out


@dataclass
class RunManifest:
    preset_hash: str
    seed: int
    tool_version: str
    created_at: str
    outputs: list = field(default_factory=list)   # (path, sha256) pairs

    def add(self, path):
        digest = hashlib.sha256()
        with open(path, "rb") as fh:
            for chunk in iter(lambda: fh.read(1 << 20), b""):
                digest.update(chunk)
        self.outputs.append((str(path), digest.hexdigest()))

    def write(self, path):
        entries = [("preset_hash", self.preset_hash),
                   ("seed", self.seed),
                   ("tool_version", self.tool_version),
                   ("created_at", self.created_at)]
        for i, (p, h) in enumerate(self.outputs):
            entries.append((f"output_{i}_path", p))
            entries.append((f"output_{i}_sha256", h))
        write_report(path, entries)


def preset_hash(preset):
    """Stable hash of a preset's numeric identity."""
    blob = repr(sorted(preset.__dict__.items(),
                       key=lambda kv: kv[0])).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def new_manifest(preset, seed, tool_version):
    return RunManifest(preset_hash=preset_hash(preset), seed=seed,
                       tool_version=tool_version,
                       created_at=time.strftime("%Y-%m-%dT%H:%M:%S",
                                                time.gmtime()))
