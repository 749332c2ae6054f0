"""demokit: handheld-device sensor logs to training-ready robot
demonstration episodes."""

__version__ = "0.1.0"
