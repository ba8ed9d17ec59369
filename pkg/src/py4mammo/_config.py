# Copyright © py4mammo developers,
# Licensed under the Apache License 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
PHANTOM_SCALE = 1.22
PHANTOM_PLATE_OFFSET = 2.25
DIAGONAL_REFERENCE = PHANTOM_SCALE

RADII_DISPARITY = 0.11

SKIN_LAYER_FACTOR = 0.97
SKIN_CHORD_LENGTH = 0.5  # cm, distance between the MLO images of L and R
SIDE_AMBIGUITY = 0.02
RADICAND_CLAMP = 1e-12

REFINE_TOLERANCE = 0.05  # cm
REFINE_LF_TOLERANCE = 1e-4
REFINE_MAX_ITER = 60
MLO_ACCEPTABLE = 1.5  # cm

DISK_SLACK = 1e-9
GEODESIC_REL_TOL = 1e-8
SURFACE_TOLERANCE = 1e-6
