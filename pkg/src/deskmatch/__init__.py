"""Desk-scale FPS deathmatch simulator and behavioural-cloning pipeline."""

__version__ = "0.1.0"
