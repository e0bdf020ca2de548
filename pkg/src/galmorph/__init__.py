"""Morphological galaxy classification from standardized images.

Pipeline: standardize grayscale images, extract PCA eigenfeatures and a
box-counting fractal dimension, then evaluate four classifiers under
seeded k-fold cross-validation.
"""

from galmorph.raster import GrayImage, load_image, save_image

CLASSES = ("elliptical", "spiral", "irregular")

__all__ = ["CLASSES", "GrayImage", "load_image", "save_image"]
__version__ = "0.1.0"
