"""Metric learning driven by clustering quality.

Trains a small embedding network so that nearest-medoid clustering of the
embedded points recovers the ground-truth classes, using a structured hinge
loss over medoid sets (greedy + PAM loss-augmented inference, NMI margin),
plus three classical pair/triplet-based losses for comparison.
"""

__version__ = "0.1.0"
