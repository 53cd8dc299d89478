"""geotrainer: toy-scale trainer exercising the geoforge dataset format.

Talks to the geoforge package only through its external interfaces: the
dataset directory layout (PNG renders, junction JSON, GJT1 grid targets,
boundary PNGs, manifest.json) and the `geoforge loss-oracle` CLI.
"""

__version__ = "0.1.0"
