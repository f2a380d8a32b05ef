"""D2Q9 stencil constants.

Direction 0 is the rest particle, 1..4 are the axial links and 5..8 the
diagonals.  Index tables for opposite and wall-reflected directions are
precomputed so streaming kernels can stay slice-based.
"""

import numpy as np

# Lattice velocities e_i, one row per direction.
E = np.array(
    [
        [0, 0],
        [1, 0],
        [0, 1],
        [-1, 0],
        [0, -1],
        [1, 1],
        [-1, 1],
        [-1, -1],
        [1, -1],
    ],
    dtype=np.int64,
)

# Quadrature weights w_i; they sum to exactly 1.
W = np.array(
    [4 / 9, 1 / 9, 1 / 9, 1 / 9, 1 / 9, 1 / 36, 1 / 36, 1 / 36, 1 / 36]
)

# Lattice speed of sound squared.
CS2 = 1.0 / 3.0

# OPPOSITE[i] is the direction with velocity -e_i.
OPPOSITE = np.array([0, 3, 4, 1, 2, 7, 8, 5, 6], dtype=np.int64)

# REFLECT_X[i] negates the x component of e_i (specular bounce off an
# x-normal wall); REFLECT_Y likewise for y.
REFLECT_X = np.array([0, 3, 2, 1, 4, 6, 5, 8, 7], dtype=np.int64)
REFLECT_Y = np.array([0, 1, 4, 3, 2, 8, 7, 6, 5], dtype=np.int64)
