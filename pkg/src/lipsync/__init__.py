"""Desk-scale trainable lip-sync pipeline.

Stages: synthetic face corpus -> landmark similarity normalization ->
PCA mouth-shape coding -> time-delayed recurrent audio-to-coefficient
prediction -> outline-conditioned mouth in-painting, orchestrated by a
dataset/training/rendering CLI.
"""

__version__ = "0.1.0"
