"""Independent checks: tensor-level finite differences on a torus base and a randomized Rayleigh search."""
