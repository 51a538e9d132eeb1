"""uqseg: epistemic uncertainty quantification benchmark for segmentation."""

__version__ = "0.1.0"
