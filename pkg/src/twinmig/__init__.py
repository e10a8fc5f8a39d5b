"""UAV-assisted vehicle-twin task pre-migration: simulator, diffusion-policy
RL agent, A*-based UAV routing, experiment harness, and HTTP service."""

__version__ = "0.1.0"
