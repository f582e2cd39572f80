"""Short solutions of homogeneous linear congruences: solvers, lattices,
closed-form probabilities, Monte Carlo experiments and exponential sums."""

__version__ = "0.1.0"
