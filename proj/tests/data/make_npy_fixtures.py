#!/usr/bin/env python3
# Copyright 2026 The attnfilter Authors.
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
"""Writes NPY and PNG fixtures under npy/ with numpy and Pillow."""

import os

import numpy as np
from PIL import Image

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "npy")


def save(name, array, version=None):
    path = os.path.join(OUT, name)
    if version is None:
        np.save(path, array)
    else:
        with open(path, "wb") as f:
            np.lib.format.write_array(f, array, version=version)


def main():
    os.makedirs(OUT, exist_ok=True)
    save("identity_2x2.npy", np.eye(2, dtype=np.float32))
    save("f4_2x3.npy", (np.arange(6, dtype=np.float32) / 4).reshape(2, 3))
    save("f4_scalar.npy", np.array(1.5, dtype=np.float32))
    save("f4_empty.npy", np.zeros((0, 3), dtype=np.float32))
    save("f4_long_shape.npy", np.arange(6, dtype=np.float32).reshape((1, 2) + (1,) * 16 + (3,)))
    save("f4_wide_dim.npy", np.arange(12345, dtype=np.float32) / 7)
    save("f4_v2.npy", (np.arange(6, dtype=np.float32) / 4).reshape(2, 3), version=(2, 0))
    save("f8_3.npy", np.array([0.1, -2.5, 3.0], dtype=np.float64))
    save("fortran_2x3.npy", np.asfortranarray(np.arange(6, dtype=np.float32).reshape(2, 3)))
    save("i4_3.npy", np.arange(3, dtype=np.int32))
    save("be_f4_3.npy", np.arange(3, dtype=">f4"))
    gaze = np.zeros((3, 4), dtype=np.uint8)
    gaze[1, 2] = 255
    gaze[0, 0] = 51
    Image.fromarray(gaze).save(os.path.join(OUT, "gaze_3x4.png"))
    rgb = np.zeros((2, 2, 3), dtype=np.uint8)
    rgb[0, 1] = (255, 0, 102)
    Image.fromarray(rgb).save(os.path.join(OUT, "rgb_2x2.png"))


if __name__ == "__main__":
    main()
