"""Simulation and numerics lab for tie-break-biased coarsening dynamics.

Subpackages cover the finite-lattice spin model and its event-driven
dynamics, modified bootstrap percolation, the ASEP and its corner-growth
coupling, the closed-form large-deviation rate function, Fredholm
determinant evaluation of exact tail probabilities, and the block-argument
parameter schedules.  Everything is seeded and replicable; see README.
"""

__version__ = "0.1.0"
