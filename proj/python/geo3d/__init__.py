"""Auditable 2D-anchored 3D bounding box deduction."""

import json

try:
    from geo3d._geo3d import (
        __version__,
        back_project,
        build_trace as _build_trace,
        detect_boxes,
        iou,
        project_point,
        verify_trace as _verify_trace,
    )
except ImportError:  # built in-tree, module next to the package
    from _geo3d import (
        __version__,
        back_project,
        build_trace as _build_trace,
        detect_boxes,
        iou,
        project_point,
        verify_trace as _verify_trace,
    )

__all__ = [
    "__version__",
    "back_project",
    "project_point",
    "iou",
    "detect_boxes",
    "build_trace",
    "verify_trace",
]


def build_trace(scene_dir, task, seed=0, n_points=5, min_depth=0.1):
    """Build a verifiable reasoning trace for a scene bundle, as a dict."""
    return json.loads(_build_trace(scene_dir, task, seed, n_points, min_depth))


def verify_trace(scene_dir, trace):
    """Re-derive a trace (dict or JSON text) against its scene bundle."""
    if not isinstance(trace, str):
        trace = json.dumps(trace)
    return json.loads(_verify_trace(scene_dir, trace))
