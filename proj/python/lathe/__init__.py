# Copyright 2026 The Lathe Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Inverse rendering of solids of revolution."""

import json

from . import _lathe
from ._lathe import (
    Camera,
    CameraPose,
    FormatError,
    IoError,
    OptimizerAbort,
    RadiusProfile,
    distance_transform,
    generate_scene,
    normal_angular_error,
    rasterize_silhouette,
    read_pfm,
    read_png,
    si_mse,
    silhouette_iou,
    tonemap,
    write_pfm,
    write_png,
)

__all__ = [
    "Camera", "CameraPose", "FormatError", "IoError", "OptimizerAbort", "RadiusProfile",
    "default_config", "derender", "distance_transform", "generate_scene", "normal_angular_error",
    "rasterize_silhouette", "read_pfm", "read_png", "si_mse", "silhouette_iou", "tonemap",
    "write_pfm", "write_png",
]


def default_config():
    """Default weights and optimizer settings as a dict."""
    return json.loads(_lathe.default_config())


def derender(image, silhouette, config=None, fov_deg=10.0):
    """Fits shape, pose, material and lighting to one image.

    `config` is a dict in the --config file format; missing keys keep
    their defaults.
    """
    text = None if config is None else json.dumps(config)
    return _lathe.derender(image, silhouette, text, fov_deg)
