"""RAW reconstruction from sRGB: packed RGGB pipelines, fitting and metrics.

Images cross the API as float64 numpy arrays: Bayer mosaics are (H, W),
packed RAW is (H, W, 4) in R, G1, G2, B order, RGB is (H, W, 3).
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
