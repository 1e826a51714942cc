"""CPU tile-based 3D Gaussian Splatting renderer with viewpoint-adaptive
per-Gaussian threshold scaling."""

from ._core import (
    Scene,
    calibrate,
    load_ply,
    pack_pair_key,
    peripheral_score_closed,
    psnr,
    render,
    synth_scene,
    write_image,
)

__all__ = [
    "Scene",
    "calibrate",
    "load_ply",
    "pack_pair_key",
    "peripheral_score_closed",
    "psnr",
    "render",
    "synth_scene",
    "write_image",
]
