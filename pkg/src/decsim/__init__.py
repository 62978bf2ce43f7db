"""Distributed modular posture-control simulator.

A deterministic sagittal-plane triple-inverted-pendulum balancing model
controlled by one DEC (disturbance estimation and compensation) module per
joint, with a max-consensus protocol electing the single enabled module
per arbitration slot.
"""

from .kernels import backend_name

__version__ = "0.1.0"
__all__ = ["backend_name", "__version__"]
