"""Point-cloud storage, PLY/XYZ I/O, and exact spatial queries.

Clouds are float64 (n, 3) arrays. The spatial index wraps two KD-trees
(one over xyz, one over the xy projection) and guarantees the exact
brute-force result set with boundary-inclusive (<=) comparisons: both the
trees and the test oracles compare squared distances against the squared
radius, so no square roots enter the predicate.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import InputError, ParseError
from .geo import LocalPoint


@dataclass(frozen=True)
class PointCloud:
    """An immutable cloud of local-frame points."""

    xyz: np.ndarray  # (n, 3) float64, C-contiguous

    def __post_init__(self):
        arr = np.ascontiguousarray(self.xyz, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise InputError(f"expected (n, 3) coordinates, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise InputError("cloud contains non-finite coordinates")
        arr.flags.writeable = False
        object.__setattr__(self, "xyz", arr)

    @property
    def count(self) -> int:
        return self.xyz.shape[0]

    def __len__(self):
        return self.count

    def point(self, i: int) -> LocalPoint:
        x, y, z = self.xyz[i]
        return LocalPoint(float(x), float(y), float(z))


@dataclass(frozen=True)
class PointSet:
    """Result of a spatial query: indices into the parent cloud + coordinates."""

    indices: np.ndarray  # (k,) int64, strictly increasing
    points: np.ndarray  # (k, 3) float64

    def __len__(self):
        return self.indices.shape[0]

    @property
    def empty(self) -> bool:
        return self.indices.shape[0] == 0

    def mean_z(self) -> float:
        return float(self.points[:, 2].mean())


@dataclass(frozen=True)
class SpatialIndex:
    """Immutable KD-tree accelerator over a cloud; safe for concurrent reads."""

    cloud: PointCloud
    tree3d: cKDTree = field(repr=False)
    tree2d: cKDTree = field(repr=False)


def build_index(cloud: PointCloud) -> SpatialIndex:
    if cloud.count < 1:
        raise InputError("cannot index an empty cloud")
    return SpatialIndex(
        cloud=cloud,
        tree3d=cKDTree(cloud.xyz),
        tree2d=cKDTree(cloud.xyz[:, :2]),
    )


def _as_point_set(cloud: PointCloud, idx_list) -> PointSet:
    idx = np.sort(np.asarray(idx_list, dtype=np.int64))
    return PointSet(indices=idx, points=cloud.xyz[idx])


def query_disk_xy(index: SpatialIndex, x: float, y: float, tol: float) -> PointSet:
    """All points whose horizontal distance to (x, y) is <= tol; any z."""
    if not tol > 0:
        raise InputError(f"tolerance must be positive, got {tol}")
    idx = index.tree2d.query_ball_point([x, y], tol)
    return _as_point_set(index.cloud, idx)


def query_sphere(index: SpatialIndex, center: LocalPoint, r: float) -> PointSet:
    """All points within Euclidean distance r of center (boundary inclusive)."""
    if not r > 0:
        raise InputError(f"radius must be positive, got {r}")
    idx = index.tree3d.query_ball_point(center.as_tuple(), r)
    return _as_point_set(index.cloud, idx)


def nearest_distances(index: SpatialIndex, queries: np.ndarray) -> np.ndarray:
    """Euclidean distance from each query point to its nearest cloud point."""
    d, _ = index.tree3d.query(queries)
    return np.asarray(d, dtype=np.float64)


# ---------------------------------------------------------------------------
# File I/O

_PLY_SCALAR_SIZES = {
    "char": 1, "int8": 1, "uchar": 1, "uint8": 1,
    "short": 2, "int16": 2, "ushort": 2, "uint16": 2,
    "int": 4, "int32": 4, "uint": 4, "uint32": 4,
    "float": 4, "float32": 4,
    "double": 8, "float64": 8,
}

_PLY_NUMPY_TYPES = {
    "char": "i1", "int8": "i1", "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2", "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4", "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4",
    "double": "f8", "float64": "f8",
}


def load_cloud(path) -> PointCloud:
    """Load a PLY (ascii or binary little-endian) or XYZ text cloud.

    Only x/y/z of element "vertex" are read; other attributes are skipped.
    """
    path = str(path)
    with open(path, "rb") as f:
        head = f.read(4)
    if head[:3] == b"ply":
        return _load_ply(path)
    return _load_xyz(path)


def _load_xyz(path) -> PointCloud:
    rows = []
    offset = 0
    with open(path, "rb") as f:
        for line in f:
            stripped = line.strip()
            if stripped:
                parts = stripped.split()
                if len(parts) < 3:
                    raise ParseError(
                        f"expected at least 3 columns, got {len(parts)}",
                        offset=offset,
                    )
                try:
                    xyz = [float(v) for v in parts[:3]]
                except ValueError:
                    raise ParseError("non-numeric coordinate", offset=offset)
                if not all(np.isfinite(xyz)):
                    raise ParseError("non-finite coordinate", offset=offset)
                rows.append(xyz)
            offset += len(line)
    if not rows:
        raise ParseError("no points in file", offset=0)
    return PointCloud(np.array(rows, dtype=np.float64))


def _load_ply(path) -> PointCloud:
    with open(path, "rb") as f:
        data = f.read()

    # Header: ascii lines through "end_header".
    lines = []
    offset = 0
    while True:
        end = data.find(b"\n", offset)
        if end < 0:
            raise ParseError("unterminated PLY header", offset=offset)
        line = data[offset:end].decode("ascii", errors="replace").strip()
        lines.append((offset, line))
        offset = end + 1
        if line == "end_header":
            break
    body_start = offset

    if lines[0][1] != "ply":
        raise ParseError("missing 'ply' magic", offset=0)

    fmt = None
    elements = []  # [name, count, [(prop_name, prop_type)]]
    for off, line in lines[1:]:
        if not line or line.startswith("comment") or line.startswith("obj_info"):
            continue
        tokens = line.split()
        if tokens[0] == "format":
            if len(tokens) < 2 or tokens[1] not in (
                "ascii",
                "binary_little_endian",
            ):
                raise ParseError(f"unsupported PLY format {line!r}", offset=off)
            fmt = tokens[1]
        elif tokens[0] == "element":
            if len(tokens) != 3:
                raise ParseError(f"malformed element line {line!r}", offset=off)
            try:
                count = int(tokens[2])
            except ValueError:
                raise ParseError(f"bad element count in {line!r}", offset=off)
            elements.append([tokens[1], count, []])
        elif tokens[0] == "property":
            if not elements:
                raise ParseError("property before any element", offset=off)
            if tokens[1] == "list":
                if len(tokens) != 5:
                    raise ParseError(f"malformed list property {line!r}", offset=off)
                elements[-1][2].append((tokens[4], ("list", tokens[2], tokens[3])))
            else:
                if len(tokens) != 3 or tokens[1] not in _PLY_SCALAR_SIZES:
                    raise ParseError(f"malformed property line {line!r}", offset=off)
                elements[-1][2].append((tokens[2], tokens[1]))
        elif tokens[0] == "end_header":
            break
        else:
            raise ParseError(f"unrecognized header line {line!r}", offset=off)

    if fmt is None:
        raise ParseError("PLY header missing format line", offset=0)

    vertex = next((e for e in elements if e[0] == "vertex"), None)
    if vertex is None:
        raise ParseError("PLY file has no vertex element", offset=0)
    if elements.index(vertex) != 0 and fmt != "ascii":
        raise ParseError("binary PLY with vertex not first element unsupported", offset=0)

    _, count, props = vertex
    names = [p[0] for p in props]
    for axis in ("x", "y", "z"):
        if axis not in names:
            raise ParseError(f"vertex element missing property '{axis}'", offset=0)
    if any(isinstance(p[1], tuple) for p in props):
        raise ParseError("list properties on vertex element unsupported", offset=0)

    if fmt == "ascii":
        xyz = _parse_ply_ascii(data, body_start, count, names)
    else:
        xyz = _parse_ply_binary(data, body_start, count, props)

    bad = np.flatnonzero(~np.isfinite(xyz).all(axis=1))
    if bad.size:
        raise ParseError(
            f"non-finite coordinate in vertex {bad[0]}",
            offset=body_start,
        )
    return PointCloud(xyz)


def _parse_ply_ascii(data, body_start, count, names):
    ix, iy, iz = names.index("x"), names.index("y"), names.index("z")
    xyz = np.empty((count, 3), dtype=np.float64)
    offset = body_start
    for i in range(count):
        end = data.find(b"\n", offset)
        line = data[offset:] if end < 0 else data[offset:end]
        parts = line.split()
        if len(parts) < len(names):
            raise ParseError(
                f"vertex {i}: expected {len(names)} values, got {len(parts)}",
                offset=offset,
            )
        try:
            xyz[i, 0] = float(parts[ix])
            xyz[i, 1] = float(parts[iy])
            xyz[i, 2] = float(parts[iz])
        except ValueError:
            raise ParseError(f"vertex {i}: non-numeric coordinate", offset=offset)
        if end < 0:
            if i < count - 1:
                raise ParseError("truncated vertex data", offset=offset)
            offset = len(data)
        else:
            offset = end + 1
    return xyz


def _parse_ply_binary(data, body_start, count, props):
    dtype = np.dtype(
        [(name, "<" + _PLY_NUMPY_TYPES[t]) for name, t in props]
    )
    need = count * dtype.itemsize
    if len(data) - body_start < need:
        raise ParseError(
            f"truncated payload: need {need} bytes, have {len(data) - body_start}",
            offset=body_start + (len(data) - body_start),
        )
    records = np.frombuffer(data, dtype=dtype, count=count, offset=body_start)
    xyz = np.empty((count, 3), dtype=np.float64)
    xyz[:, 0] = records["x"]
    xyz[:, 1] = records["y"]
    xyz[:, 2] = records["z"]
    return xyz


def save_cloud(path, cloud: PointCloud):
    """Write a binary little-endian PLY with float64 x/y/z (deterministic bytes)."""
    header = (
        "ply\n"
        "format binary_little_endian 1.0\n"
        f"element vertex {cloud.count}\n"
        "property double x\n"
        "property double y\n"
        "property double z\n"
        "end_header\n"
    )
    with open(path, "wb") as f:
        f.write(header.encode("ascii"))
        f.write(np.ascontiguousarray(cloud.xyz, dtype="<f8").tobytes())
