"""Binary tensor files, key=value manifests, and PGM image export.

Tensor file layout (little-endian throughout):

    magic "IRSD" | u8 version=1 | u8 dtype=1 (f32) | u16 reserved=0
    | u32 ndim | u32 dims[ndim] | f32 payload, row-major

The payload roundtrips bit-exactly (subnormals included). Manifests are
line-oriented UTF-8 ``key=value`` text; dataset manifests additionally carry
one line per sample of comma-separated fields, e.g.::

    id=s0000,hq=s0000_hq.irsd,lq=s0000_lq.irsd,probe=L11-5v,seed=42
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MAGIC = b"IRSD"
VERSION = 1
DTYPE_F32 = 1


def write_tensor(path, arr: np.ndarray) -> None:
    """Write an array as a version-1 f32 tensor file."""
    arr = np.asarray(arr)
    if arr.ndim < 1:
        arr = arr.reshape(1)
    if not np.all(np.isfinite(arr)):
        raise ValueError("tensor payload contains non-finite values")
    data = np.ascontiguousarray(arr, dtype="<f4")
    header = MAGIC + struct.pack("<BBH", VERSION, DTYPE_F32, 0)
    header += struct.pack("<I", data.ndim)
    header += struct.pack(f"<{data.ndim}I", *data.shape)
    with open(path, "wb") as f:
        f.write(header)
        f.write(data.tobytes())


def _read_exact(f, n: int, what: str) -> bytes:
    buf = f.read(n)
    if len(buf) != n:
        raise ValueError(f"tensor file truncated while reading {what}")
    return buf


def read_tensor_header(path) -> tuple[int, ...]:
    """Parse and validate the header only; returns the dims tuple."""
    with open(path, "rb") as f:
        magic = _read_exact(f, 4, "magic")
        if magic != MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected {MAGIC!r}")
        version, dtype, reserved = struct.unpack("<BBH", _read_exact(f, 4, "version/dtype"))
        if version != VERSION:
            raise ValueError(f"bad version {version}, expected {VERSION}")
        if dtype != DTYPE_F32:
            raise ValueError(f"bad dtype {dtype}, expected {DTYPE_F32} (f32)")
        if reserved != 0:
            raise ValueError(f"bad reserved field {reserved}, expected 0")
        (ndim,) = struct.unpack("<I", _read_exact(f, 4, "ndim"))
        if ndim < 1 or ndim > 8:
            raise ValueError(f"bad ndim {ndim}, expected 1..8")
        dims = struct.unpack(f"<{ndim}I", _read_exact(f, 4 * ndim, "dims"))
        if any(d < 1 for d in dims):
            raise ValueError(f"bad dims {dims}, all must be >= 1")
    return dims


def read_tensor(path) -> np.ndarray:
    """Read a tensor file back as a float32 array (bit-exact payload)."""
    dims = read_tensor_header(path)
    ndim = len(dims)
    n = int(np.prod(dims))
    header_len = 4 + 4 + 4 + 4 * ndim
    with open(path, "rb") as f:
        f.seek(header_len)
        payload = f.read(4 * n + 1)
    if len(payload) < 4 * n:
        raise ValueError("tensor file truncated while reading payload")
    if len(payload) > 4 * n:
        raise ValueError("tensor file has trailing bytes after payload")
    return np.frombuffer(payload, dtype="<f4").reshape(dims).copy()


def read_image(path) -> np.ndarray:
    """Read a tensor file that must contain a 2-D image."""
    arr = read_tensor(path)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D image tensor, got shape {arr.shape}")
    return arr


# -- key=value manifests -----------------------------------------------------


def write_kv(path, items: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for k, v in items.items():
            f.write(f"{k}={v}\n")


def read_kv(path) -> dict:
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def parse_sample_line(line: str) -> dict:
    """Parse one comma-separated sample record line into a field dict."""
    fields: dict[str, str] = {}
    for part in line.split(","):
        part = part.strip()
        if "=" not in part:
            raise ValueError(f"bad sample field {part!r} (expected key=value)")
        k, v = part.split("=", 1)
        fields[k.strip()] = v.strip()
    return fields


@dataclass
class SampleEntry:
    sample_id: str
    hq: str
    lq: str
    probe: str
    seed: int
    fg: str = ""  # optional foreground-mask tensor


@dataclass
class DatasetManifest:
    """Index of a simulated dataset: global config echo plus sample records."""

    config: dict = field(default_factory=dict)
    samples: list[SampleEntry] = field(default_factory=list)

    def ids(self) -> list[str]:
        return [s.sample_id for s in self.samples]


def save_manifest(path, manifest: DatasetManifest) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for k, v in manifest.config.items():
            f.write(f"{k}={v}\n")
        for s in manifest.samples:
            line = f"id={s.sample_id},hq={s.hq},lq={s.lq},probe={s.probe},seed={s.seed}"
            if s.fg:
                line += f",fg={s.fg}"
            f.write(line + "\n")


def load_manifest(path, check_files: bool = True) -> DatasetManifest:
    """Load a dataset manifest; validates ids and referenced tensor headers."""
    base = Path(path).parent
    man = DatasetManifest()
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("id="):
                fields = parse_sample_line(line)
                for need in ("id", "hq", "lq", "probe", "seed"):
                    if need not in fields:
                        raise ValueError(
                            f"{path}:{lineno}: sample line missing field {need!r}"
                        )
                man.samples.append(
                    SampleEntry(
                        sample_id=fields["id"],
                        hq=fields["hq"],
                        lq=fields["lq"],
                        probe=fields["probe"],
                        seed=int(fields["seed"]),
                        fg=fields.get("fg", ""),
                    )
                )
            else:
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected key=value")
                k, v = line.split("=", 1)
                man.config[k.strip()] = v.strip()
    ids = man.ids()
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise ValueError(f"duplicate sample ids in manifest: {dupes}")
    if check_files:
        for s in man.samples:
            for rel in (s.hq, s.lq) + ((s.fg,) if s.fg else ()):
                p = base / rel
                if not p.exists():
                    raise ValueError(f"manifest references missing file: {p}")
                read_tensor_header(p)
    return man


# -- PGM export ---------------------------------------------------------------


def write_pgm(path, img: np.ndarray) -> None:
    """8-bit binary PGM (P5); values quantized by round(255 * clamp(v, 0, 1))."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"PGM export needs a 2-D image, got shape {img.shape}")
    q = np.rint(255.0 * np.clip(img, 0.0, 1.0)).astype(np.uint8)
    h, w = q.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(q.tobytes())
