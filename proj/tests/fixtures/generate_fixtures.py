#!/usr/bin/env python3
"""Regenerates the synthetic tabletop fixtures (frames, scene, clouds).

A projector on a mast looks forward and down at a table carrying three
white boxes and one green cylinder (the manipulation target). The clouds
are expressed in a head camera frame, so rendering them exercises the
frame tree. Output is deterministic; rerun only when the scenario changes.
"""

import pathlib

import numpy as np
from scipy.spatial.transform import Rotation

HERE = pathlib.Path(__file__).resolve().parent
rng = np.random.default_rng(20240611)


def optical_rotation(pitch_down_deg):
    """base <- optical rotation for a frame looking along +x, pitched down."""
    p = np.radians(pitch_down_deg)
    z = np.array([np.cos(p), 0.0, -np.sin(p)])
    x = np.array([0.0, -1.0, 0.0])
    y = np.cross(z, x)
    return Rotation.from_matrix(np.column_stack([x, y, z]))


def wxyz(rot):
    x, y, z, w = rot.as_quat()
    return [float(w), float(x), float(y), float(z)]


def fmt(v):
    return repr(float(v))


mount_t = np.array([0.1, 0.0, 1.2])
lens_t = np.array([0.03, 0.0, -0.02])
lens_rot = optical_rotation(60.0)
camera_t = np.array([0.15, 0.02, 1.4])
camera_rot = optical_rotation(55.0)

frames = [
    ("base_link", "world", [0.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0]),
    ("projector_mount", "base_link", list(mount_t), [1.0, 0.0, 0.0, 0.0]),
    ("projector_lens", "projector_mount", list(lens_t), wxyz(lens_rot)),
    ("head_camera", "base_link", list(camera_t), wxyz(camera_rot)),
]
with open(HERE / "frames.yaml", "w") as f:
    f.write("# Tabletop rig: projector on a mast, head camera above it.\n")
    for child, parent, t, q in frames:
        f.write(f"- child: {child}\n  parent: {parent}\n")
        f.write(f"  translation: [{', '.join(fmt(v) for v in t)}]\n")
        f.write(f"  rotation_wxyz: [{', '.join(fmt(v) for v in q)}]\n")

TABLE_Z = 0.75


def box(center, size, n):
    """Samples the top and the four side faces of a box resting on the table."""
    cx, cy = center
    sx, sy, sz = size
    pts = []
    top = rng.uniform([-sx / 2, -sy / 2], [sx / 2, sy / 2], size=(n, 2))
    pts += [[cx + a, cy + b, TABLE_Z + sz] for a, b in top]
    for _ in range(n):
        face = rng.integers(4)
        h = rng.uniform(0, sz)
        t = rng.uniform(-0.5, 0.5)
        if face == 0:
            pts.append([cx - sx / 2, cy + t * sy, TABLE_Z + h])
        elif face == 1:
            pts.append([cx + sx / 2, cy + t * sy, TABLE_Z + h])
        elif face == 2:
            pts.append([cx + t * sx, cy - sy / 2, TABLE_Z + h])
        else:
            pts.append([cx + t * sx, cy + sy / 2, TABLE_Z + h])
    return np.array(pts)


def cylinder(center, radius, height, n):
    cx, cy = center
    pts = []
    for _ in range(n):
        a = rng.uniform(0, 2 * np.pi)
        if rng.uniform() < 0.4:
            r = radius * np.sqrt(rng.uniform())
            pts.append([cx + r * np.cos(a), cy + r * np.sin(a), TABLE_Z + height])
        else:
            pts.append([cx + radius * np.cos(a), cy + radius * np.sin(a),
                        TABLE_Z + rng.uniform(0, height)])
    return np.array(pts)


def to_camera(points_base):
    return camera_rot.inv().apply(points_base - camera_t).astype(np.float32)


def write_pcd(path, pts, binary):
    n = len(pts)
    header = (
        "# .PCD v0.7 - Point Cloud Data file format\n"
        "VERSION 0.7\nFIELDS x y z\nSIZE 4 4 4\nTYPE F F F\nCOUNT 1 1 1\n"
        f"WIDTH {n}\nHEIGHT 1\nVIEWPOINT 0 0 0 1 0 0 0\nPOINTS {n}\n"
    )
    with open(path, "wb") as f:
        if binary:
            f.write((header + "DATA binary\n").encode())
            f.write(pts.astype("<f4").tobytes())
        else:
            f.write((header + "DATA ascii\n").encode())
            for p in pts:
                f.write((" ".join(str(np.float32(v)) for v in p) + "\n").encode())


clusters = [
    ("box_left", box((0.28, 0.12), (0.06, 0.05, 0.08), 250), (255, 255, 255), False),
    ("box_middle", box((0.40, -0.02), (0.05, 0.07, 0.05), 250), (255, 255, 255), True),
    ("box_right", box((0.24, -0.14), (0.07, 0.04, 0.06), 250), (255, 255, 255), False),
    ("target", cylinder((0.30, 0.01), 0.03, 0.10, 400), (0, 255, 0), True),
]
(HERE / "clouds").mkdir(exist_ok=True)
with open(HERE / "scene_tabletop.yaml", "w") as f:
    f.write("# Three detected objects (white) and the object to manipulate (green).\n")
    f.write("clusters:\n")
    for label, pts, color, binary in clusters:
        write_pcd(HERE / "clouds" / f"{label}.pcd", to_camera(pts), binary)
        f.write(f"  - label: {label}\n    pcd: clouds/{label}.pcd\n"
                f"    frame: head_camera\n    color: [{color[0]}, {color[1]}, {color[2]}]\n")
