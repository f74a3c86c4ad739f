"""LiDAR weather augmentation and range-image projection."""

from ._core import Error, augment_array, project_array, version

__version__ = version()
__all__ = ["Error", "augment_array", "project_array", "version", "__version__"]
