"""HTTP service wrapping the simulator and experiment runners."""

from twinmig.api.app import create_app

__all__ = ["create_app"]
