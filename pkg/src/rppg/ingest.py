"""Video, landmark, and ground-truth ingestion.

Two frame-storage layouts are supported, chosen so that no video codec is
ever needed:

* frame directory: ``manifest.json`` with keys fps/width/height/count plus
  binary PPM files named ``frame_000000.ppm``, ``frame_000001.ppm``, ...
* raw stream: a single file with a 24-byte header (magic ``RPPGRAW1``, then
  little-endian u32 width, height, frame count, fps in millihertz) followed
  by count*width*height*3 interleaved RGB bytes.

Landmarks ride in a JSON-lines sidecar, one record per frame:
``{"frame": i, "bbox": [x, y, w, h], "eyes": [[[x, y], ...], [...]],
"mouth": [[x, y], ...]}``. Polygon vertex lists may be empty (no occluder),
but one or two vertices is malformed.

Ground truth is a two-column CSV with header ``time_s,value`` per signal
(contact-PPG waveform or heart-rate numerics).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import (
    CountMismatchError,
    DataFormatError,
    DimensionMismatchError,
    EmptyFileError,
    MalformedPolygonError,
    MalformedStreamError,
    MissingInputError,
    MissingManifestError,
    NonMonotoneTimeError,
    NonPositiveFpsError,
    OutOfBoundsError,
)

RAW_MAGIC = b"RPPGRAW1"
RAW_HEADER = struct.Struct("<8s4I")

HR_BPM_MIN = 30.0
HR_BPM_MAX = 240.0


@dataclass(frozen=True)
class FrameSequence:
    """8-bit RGB frames with a constant frame rate. frames: (n, h, w, 3) uint8."""

    frames: np.ndarray
    fps: float

    def __post_init__(self):
        f = np.asarray(self.frames)
        if f.ndim != 4 or f.shape[3] != 3:
            raise DimensionMismatchError(f"frames must be (n, h, w, 3), got {f.shape}")
        if f.dtype != np.uint8:
            raise DataFormatError(f"frames must be uint8, got {f.dtype}")
        if f.shape[0] < 1 or f.shape[1] < 1 or f.shape[2] < 1:
            raise DimensionMismatchError("frame sequence must be non-empty")
        if not self.fps > 0:
            raise NonPositiveFpsError(f"fps must be positive, got {self.fps}")
        object.__setattr__(self, "frames", f)

    @property
    def count(self) -> int:
        return self.frames.shape[0]

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    @property
    def width(self) -> int:
        return self.frames.shape[2]

    @property
    def duration_s(self) -> float:
        return self.count / self.fps


@dataclass(frozen=True)
class LandmarkRecord:
    """Per-frame face geometry. bbox is (x, y, w, h) in pixels."""

    frame: int
    bbox: tuple[int, int, int, int]
    eye_polygons: tuple[tuple[tuple[int, int], ...], ...]
    mouth_polygon: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class LandmarkSidecar:
    records: tuple[LandmarkRecord, ...]

    def __len__(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class GroundTruth:
    """Reference signals: contact-PPG samples and/or heart-rate numerics."""

    ppg_time_s: np.ndarray | None = None
    ppg_value: np.ndarray | None = None
    hr_time_s: np.ndarray | None = None
    hr_bpm: np.ndarray | None = None

    def resample_ppg(self, fs_hz: float) -> tuple[np.ndarray, np.ndarray]:
        """Linearly interpolate the PPG onto a uniform grid at fs_hz."""
        if self.ppg_time_s is None:
            raise EmptyFileError("no PPG samples loaded")
        t0, t1 = float(self.ppg_time_s[0]), float(self.ppg_time_s[-1])
        n = int(np.floor((t1 - t0) * fs_hz)) + 1
        t = t0 + np.arange(n) / fs_hz
        return t, np.interp(t, self.ppg_time_s, self.ppg_value)

    @property
    def mean_hr_bpm(self) -> float:
        if self.hr_bpm is None:
            raise EmptyFileError("no heart-rate numerics loaded")
        return float(np.mean(self.hr_bpm))


# ---------------------------------------------------------------------------
# PPM frames
# ---------------------------------------------------------------------------


def read_ppm(path: Path) -> np.ndarray:
    data = Path(path).read_bytes()
    if not data.startswith(b"P6"):
        raise DataFormatError(f"{path}: not a binary PPM (P6) file")
    # header = magic, width, height, maxval as whitespace-separated tokens,
    # with '#' comments allowed between them
    tokens: list[bytes] = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise DataFormatError(f"{path}: truncated PPM header")
        tokens.append(data[start:pos])
    pos += 1  # single whitespace after maxval
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise DataFormatError(f"{path}: bad PPM header tokens {tokens}") from exc
    if maxval != 255:
        raise DataFormatError(f"{path}: only 8-bit PPM supported (maxval {maxval})")
    need = width * height * 3
    raster = data[pos : pos + need]
    if len(raster) != need:
        raise DataFormatError(f"{path}: PPM payload truncated")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3)


def write_ppm(frame: np.ndarray, path: Path) -> None:
    frame = np.ascontiguousarray(frame, dtype=np.uint8)
    h, w = frame.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(frame.tobytes())


def _frame_name(i: int) -> str:
    return f"frame_{i:06d}.ppm"


def load_frame_dir(directory: Path) -> FrameSequence:
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.exists():
        raise MissingManifestError(f"{directory}: manifest.json not found")
    try:
        manifest = json.loads(manifest_path.read_text())
        fps = float(manifest["fps"])
        width = int(manifest["width"])
        height = int(manifest["height"])
        count = int(manifest["count"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"{manifest_path}: bad manifest: {exc}") from exc
    if fps <= 0:
        raise NonPositiveFpsError(f"{manifest_path}: fps must be positive, got {fps}")
    if count < 1:
        raise DataFormatError(f"{manifest_path}: count must be >= 1")
    frames = np.empty((count, height, width, 3), dtype=np.uint8)
    for i in range(count):
        fp = directory / _frame_name(i)
        if not fp.exists():
            raise MissingInputError(f"{fp}: listed in manifest but missing")
        frame = read_ppm(fp)
        if frame.shape != (height, width, 3):
            raise DimensionMismatchError(
                f"{fp}: frame is {frame.shape[1]}x{frame.shape[0]}, "
                f"manifest says {width}x{height}"
            )
        frames[i] = frame
    return FrameSequence(frames=frames, fps=fps)


def write_frame_dir(seq: FrameSequence, directory: Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {
        "fps": seq.fps,
        "width": seq.width,
        "height": seq.height,
        "count": seq.count,
    }
    (directory / "manifest.json").write_text(json.dumps(manifest, sort_keys=True))
    for i in range(seq.count):
        write_ppm(seq.frames[i], directory / _frame_name(i))


# ---------------------------------------------------------------------------
# Raw stream
# ---------------------------------------------------------------------------


def load_raw_stream(path: Path) -> FrameSequence:
    data = Path(path).read_bytes()
    if len(data) < RAW_HEADER.size:
        raise MalformedStreamError(f"{path}: shorter than the 24-byte header")
    magic, width, height, count, fps_millihz = RAW_HEADER.unpack_from(data)
    if magic != RAW_MAGIC:
        raise MalformedStreamError(f"{path}: bad magic {magic!r}")
    if fps_millihz == 0:
        raise NonPositiveFpsError(f"{path}: fps_millihz must be positive")
    need = width * height * 3 * count
    payload = data[RAW_HEADER.size :]
    if len(payload) != need:
        raise MalformedStreamError(
            f"{path}: payload is {len(payload)} bytes, header implies {need}"
        )
    frames = np.frombuffer(payload, dtype=np.uint8).reshape(count, height, width, 3)
    return FrameSequence(frames=frames.copy(), fps=fps_millihz / 1000.0)


def write_raw_stream(seq: FrameSequence, path: Path) -> None:
    header = RAW_HEADER.pack(
        RAW_MAGIC, seq.width, seq.height, seq.count, round(seq.fps * 1000)
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(seq.frames).tobytes())


def load_frame_sequence(path: Path) -> FrameSequence:
    """Load either storage layout: a directory of PPMs or a raw stream file."""
    path = Path(path)
    if path.is_dir():
        return load_frame_dir(path)
    if path.is_file():
        return load_raw_stream(path)
    raise MissingInputError(f"{path}: no such file or directory")


# ---------------------------------------------------------------------------
# Landmark sidecar
# ---------------------------------------------------------------------------


def _parse_polygon(raw, where: str) -> tuple[tuple[int, int], ...]:
    if not isinstance(raw, list):
        raise MalformedPolygonError(f"{where}: polygon must be a list of [x, y] pairs")
    if len(raw) == 0:
        return ()
    if len(raw) < 3:
        raise MalformedPolygonError(
            f"{where}: polygon needs >= 3 vertices, got {len(raw)}"
        )
    verts = []
    for v in raw:
        if not (isinstance(v, list) and len(v) == 2):
            raise MalformedPolygonError(f"{where}: vertex {v!r} is not an [x, y] pair")
        verts.append((int(v[0]), int(v[1])))
    return tuple(verts)


def _check_bbox(bbox, width: int, height: int, where: str) -> tuple[int, int, int, int]:
    if not (isinstance(bbox, list) and len(bbox) == 4):
        raise DataFormatError(f"{where}: bbox must be [x, y, w, h]")
    x, y, w, h = (int(v) for v in bbox)
    if w < 0 or h < 0:
        raise OutOfBoundsError(f"{where}: bbox has negative extent {bbox}")
    if x < 0 or y < 0 or x + w > width or y + h > height:
        raise OutOfBoundsError(
            f"{where}: bbox {bbox} exceeds frame bounds {width}x{height}"
        )
    return x, y, w, h


def _check_polygon_in_bbox(poly, bbox, where: str) -> None:
    x, y, w, h = bbox
    for vx, vy in poly:
        if not (x <= vx <= x + w and y <= vy <= y + h):
            raise OutOfBoundsError(f"{where}: vertex ({vx}, {vy}) outside bbox {bbox}")


def load_landmarks(path: Path, frame_count: int, width: int, height: int) -> LandmarkSidecar:
    """Load and validate a JSONL sidecar against the owning frame sequence."""
    path = Path(path)
    if not path.exists():
        raise MissingInputError(f"{path}: no such file")
    records: dict[int, LandmarkRecord] = {}
    lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
    if not lines:
        raise EmptyFileError(f"{path}: no landmark records")
    for lineno, line in enumerate(lines, start=1):
        where = f"{path}:{lineno}"
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{where}: bad JSON: {exc}") from exc
        try:
            frame = int(obj["frame"])
            raw_bbox = obj["bbox"]
            raw_eyes = obj["eyes"]
            raw_mouth = obj["mouth"]
        except (KeyError, TypeError, ValueError) as exc:
            raise DataFormatError(f"{where}: missing field: {exc}") from exc
        bbox = _check_bbox(raw_bbox, width, height, where)
        if not (isinstance(raw_eyes, list) and len(raw_eyes) == 2):
            raise DataFormatError(f"{where}: eyes must hold exactly two polygons")
        eyes = tuple(_parse_polygon(p, where) for p in raw_eyes)
        mouth = _parse_polygon(raw_mouth, where)
        for poly in (*eyes, mouth):
            _check_polygon_in_bbox(poly, bbox, where)
        if frame in records:
            raise CountMismatchError(f"{where}: duplicate record for frame {frame}")
        records[frame] = LandmarkRecord(
            frame=frame, bbox=bbox, eye_polygons=eyes, mouth_polygon=mouth
        )
    if sorted(records) != list(range(frame_count)):
        raise CountMismatchError(
            f"{path}: {len(records)} records do not cover frames 0..{frame_count - 1}"
        )
    ordered = tuple(records[i] for i in range(frame_count))
    return LandmarkSidecar(records=ordered)


def write_landmarks(sidecar: LandmarkSidecar, path: Path) -> None:
    with open(path, "w") as fh:
        for rec in sidecar.records:
            obj = {
                "frame": rec.frame,
                "bbox": list(rec.bbox),
                "eyes": [[list(v) for v in poly] for poly in rec.eye_polygons],
                "mouth": [list(v) for v in rec.mouth_polygon],
            }
            fh.write(json.dumps(obj) + "\n")


def smooth_bboxes(sidecar: LandmarkSidecar, alpha: float = 0.9) -> LandmarkSidecar:
    """Exponentially smooth bbox jitter: s_t = alpha*s_{t-1} + (1-alpha)*b_t."""
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must be in [0, 1), got {alpha}")
    out = []
    state = np.asarray(sidecar.records[0].bbox, dtype=np.float64)
    for rec in sidecar.records:
        state = alpha * state + (1.0 - alpha) * np.asarray(rec.bbox, dtype=np.float64)
        out.append(replace(rec, bbox=tuple(int(round(v)) for v in state)))
    return LandmarkSidecar(records=tuple(out))


# ---------------------------------------------------------------------------
# Ground truth
# ---------------------------------------------------------------------------


def read_timeseries_csv(path: Path) -> tuple[np.ndarray, np.ndarray]:
    path = Path(path)
    if not path.exists():
        raise MissingInputError(f"{path}: no such file")
    lines = [ln.strip() for ln in path.read_text().splitlines() if ln.strip()]
    if not lines or lines[0].replace(" ", "") != "time_s,value":
        raise DataFormatError(f"{path}: first line must be the header 'time_s,value'")
    rows = lines[1:]
    if not rows:
        raise EmptyFileError(f"{path}: no data rows")
    t = np.empty(len(rows))
    v = np.empty(len(rows))
    for i, row in enumerate(rows):
        parts = row.split(",")
        if len(parts) != 2:
            raise DataFormatError(f"{path}: row {i + 2} is not two columns: {row!r}")
        try:
            t[i], v[i] = float(parts[0]), float(parts[1])
        except ValueError as exc:
            raise DataFormatError(f"{path}: row {i + 2} not numeric: {row!r}") from exc
    if np.any(np.diff(t) <= 0):
        raise NonMonotoneTimeError(f"{path}: time_s must be strictly increasing")
    return t, v


def load_ground_truth(hr_path: Path | None = None, ppg_path: Path | None = None) -> GroundTruth:
    gt = GroundTruth()
    if ppg_path is not None:
        t, v = read_timeseries_csv(ppg_path)
        gt = replace(gt, ppg_time_s=t, ppg_value=v)
    if hr_path is not None:
        t, v = read_timeseries_csv(hr_path)
        if np.any(v < HR_BPM_MIN) or np.any(v > HR_BPM_MAX):
            raise DataFormatError(
                f"{hr_path}: heart-rate numerics outside "
                f"[{HR_BPM_MIN}, {HR_BPM_MAX}] bpm"
            )
        gt = replace(gt, hr_time_s=t, hr_bpm=v)
    return gt


def write_timeseries_csv(t: np.ndarray, v: np.ndarray, path: Path) -> None:
    with open(path, "w") as fh:
        fh.write("time_s,value\n")
        for ti, vi in zip(t, v):
            fh.write(f"{float(ti)!r},{float(vi)!r}\n")
