# Copyright © py4mammo developers,
# Licensed under the Apache License 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
from py4mammo.conformal import MobiusParams, mobius_forward, mobius_inverse
from py4mammo.forward import AffineProjector, CalibratedProjector, refine_layer_factor
from py4mammo.model import BreastMeasurements, CaseInputs, build_measurements
from py4mammo.report import LocateOptions, locate

__version__ = "0.3.0"
