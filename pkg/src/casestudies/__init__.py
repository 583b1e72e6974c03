"""Bundled case studies, generated at a configurable scale."""

from src.casestudies.arinc import ArincConfig, ArincScale, build_arinc, render_arinc
from src.casestudies.stepper import StepperScale, build_stepper, collide, render_stepper

__all__ = [
    "ArincConfig",
    "ArincScale",
    "StepperScale",
    "build_arinc",
    "build_stepper",
    "collide",
    "render_arinc",
    "render_stepper",
]
