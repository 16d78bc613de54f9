"""Hybrid neural world-model workbench.

Reference physics solvers, a small tensor/autodiff engine, multi-horizon
surrogate training, the label-free step-doubling error map with its baseline
trust signals, and the two-mode trust-gated deployment policy, all sized to
run on a single desk CPU.
"""

__version__ = "0.1.0"
