# Copyright © py4mammo developers,
# Licensed under the Apache License 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
"""Affine compression model fitted to the transparent breast phantom.

Artificial nodules inside a transparent phantom are recorded before and after the
craniocaudal compression in the phantom frame OXYZ. With the shift y = Y + 2.25 (the
offset of the lower plate) the displacement is close to linear: the matrix C
minimizing the residual E = A - B C of the stacked coordinates is close to 1.22 times
the identity. This motivates the compression model

    (x, y, z) -> (k x, (plate_y - y) / k, k z)

with k = 1.22 and plate_y = -2.25 in the frame of the simulator.
"""
import dataclasses
import importlib.resources
import io
import logging
from typing import Tuple

import numpy as np
from scipy import linalg

from py4mammo import _config, exception
from py4mammo._util import import_

pd = import_.optional("pandas", feature="reading phantom tables")
logger = logging.getLogger(__name__)

AXES = ("x", "y", "z")
COLUMNS = ["label", "xb", "yb", "zb", "xa", "ya", "za"]
MINIMUM_RECORDS = 4


@dataclasses.dataclass(frozen=True)
class TrajectoryRecord:
    "A single nodule of the phantom before and after the compression."

    label: str
    "Single letter identifying the nodule."
    before: Tuple[float, float, float]
    "Position (X, Y, Z) before the compression."
    after: Tuple[float, float, float]
    "Position (X, Y, Z) after the compression."


@dataclasses.dataclass(frozen=True)
class TrajectoryDataset:
    """Trajectories of the phantom nodules in the phantom frame OXYZ.

    The coordinates store the signed Y. The shift y = Y + plate_offset is only applied
    when the data is fitted."""

    records: Tuple[TrajectoryRecord, ...]
    plate_offset: float = _config.PHANTOM_PLATE_OFFSET
    "Offset of the lower plate added to Y before fitting."

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        labels = self.labels
        for label in labels:
            if len(label) != 1 or not label.isalpha():
                message = f"'{label}' is not a single letter."
                raise exception.ValidationError("label", message)
        duplicates = sorted({label for label in labels if labels.count(label) > 1})
        if duplicates:
            message = f"The nodules {', '.join(duplicates)} are listed more than once."
            raise exception.ValidationError("label", message)
        if len(self.records) < MINIMUM_RECORDS:
            message = (
                f"At least {MINIMUM_RECORDS} nodules are required for a meaningful "
                f"affine fit, but only {len(self.records)} were provided."
            )
            raise exception.ValidationError("records", message)

    @property
    def labels(self):
        return [record.label for record in self.records]

    def before(self, shifted=True):
        "Matrix B of the positions before the compression, one row per nodule."
        return self._matrix("before", shifted)

    def after(self, shifted=True):
        "Matrix A of the positions after the compression, one row per nodule."
        return self._matrix("after", shifted)

    def _matrix(self, attribute, shifted):
        matrix = np.array([getattr(record, attribute) for record in self.records])
        if shifted:
            matrix[:, 1] += self.plate_offset
        return matrix


@dataclasses.dataclass(frozen=True)
class AffineFit:
    "Result of the least-squares fit of the compression."

    C: np.ndarray
    "3 x 3 coefficients minimizing the Frobenius norm of A - B C."
    E: np.ndarray
    "Residual A - B C, one row per nodule."
    labels: Tuple[str, ...]
    "Labels of the nodules in the order of the rows of E."
    max_abs_residual: float
    "Largest absolute entry of E."
    max_residual_location: Tuple[str, str]
    "Nodule label and axis of the largest residual."

    def residual_table(self):
        "Rows (label, e_x, e_y, e_z) of the residual."
        return [(label, *row) for label, row in zip(self.labels, self.E)]

    def normalized(self, compression=None):
        "Coefficients divided by the isotropic scale k of the compression model."
        compression = compression or PhantomCompression()
        return self.C / compression.k


@dataclasses.dataclass(frozen=True)
class PhantomCompression:
    "Parameters of the compression model of the phantom."

    k: float = _config.PHANTOM_SCALE
    "Isotropic spreading in x and z; k = 1 is admitted as the no-compression limit."
    plate_y: float = -_config.PHANTOM_PLATE_OFFSET
    "Position of the lower plate."

    def __post_init__(self):
        if not self.k >= 1:
            raise exception.ValidationError("k", f"must be at least 1 but is {self.k}.")
        if not self.plate_y < 0:
            message = f"must lie below the origin but is {self.plate_y}."
            raise exception.ValidationError("plate_y", message)


def load_trajectories(csv_source, plate_offset=_config.PHANTOM_PLATE_OFFSET):
    """Read the phantom trajectories from a CSV file.

    The header must read ``label,xb,yb,zb,xa,ya,za``, where the suffix b stands for
    before and a for after the compression. Note that tables of the phantom often print
    -Y, the file stores the signed Y. For example, the printed row

        A | -1.75  0.75  4.75 | -2.25  0.00  5.75   (columns X, -Y, Z)

    is stored as ``A,-1.75,-0.75,4.75,-2.25,0.00,5.75``.

    Parameters
    ----------
    csv_source : str or Path or file-like
        Location or open handle of the CSV data.
    plate_offset : float
        Offset of the lower plate used when fitting.

    Returns
    -------
    TrajectoryDataset
        The parsed nodules in the order of the file.
    """
    frame = _read_frame(csv_source)
    if list(frame.columns) != COLUMNS:
        message = f"Expected the header {','.join(COLUMNS)} but found {','.join(map(str, frame.columns))}."
        raise exception.ParserError(message, line=1)
    values = frame[COLUMNS[1:]].apply(pd.to_numeric, errors="coerce")
    for index, row in values.iterrows():
        if row.isna().any():
            raw = ",".join(frame.loc[index].astype(str))
            message = f"Could not read six coordinates from the row '{raw}'."
            raise exception.ParserError(message, line=index + 2)
    records = [
        TrajectoryRecord(
            label=str(label).strip(),
            before=tuple(float(x) for x in row[:3]),
            after=tuple(float(x) for x in row[3:]),
        )
        for label, row in zip(frame["label"], values.to_numpy())
    ]
    return TrajectoryDataset(records=records, plate_offset=plate_offset)


def bundled_table():
    "Open the trajectories of the eleven nodules of the reference phantom."
    resource = importlib.resources.files("py4mammo.data") / "phantom_trajectories.csv"
    return io.StringIO(resource.read_text(encoding="utf-8"))


def fit_affine(dataset):
    """Fit the linear map C that carries the nodules from before to after compression.

    The least-squares problem is solved with an orthogonal factorization instead of the
    normal equations (BᵀB)⁻¹BᵀA.

    Raises
    ------
    SingularConfiguration
        If the positions before the compression do not span the three dimensions.
    """
    B = dataset.before()
    A = dataset.after()
    C, _, rank, singular_values = linalg.lstsq(B, A)
    if rank < B.shape[1]:
        message = (
            f"The nodules span only {rank} dimensions (singular values "
            f"{np.array2string(singular_values, precision=3)}), C is not unique."
        )
        raise exception.SingularConfiguration(message)
    E = A - B @ C
    row, column = np.unravel_index(np.argmax(np.abs(E)), E.shape)
    labels = tuple(dataset.labels)
    fit = AffineFit(
        C=C,
        E=E,
        labels=labels,
        max_abs_residual=float(np.abs(E[row, column])),
        max_residual_location=(labels[row], AXES[column]),
    )
    logger.debug(
        "phantom fit of %d nodules: max |E| = %.4f at %s",
        len(labels),
        fit.max_abs_residual,
        fit.max_residual_location,
    )
    return fit


def diagonal_gap(fit, reference=_config.DIAGONAL_REFERENCE):
    "Largest deviation of C from the isotropic matrix reference · I."
    return float(np.max(np.abs(fit.C - reference * np.eye(3))))


def apply_phantom_compression(point, compression=None):
    "Map a point of LAT to CRC with (x, y, z) -> (k x, (plate_y - y) / k, k z)."
    compression = compression or PhantomCompression()
    x, y, z = point
    k = compression.k
    return k * x, (compression.plate_y - y) / k, k * z


def invert_phantom_compression(point, compression=None):
    "Inverse of :func:`apply_phantom_compression`."
    compression = compression or PhantomCompression()
    x, y, z = point
    k = compression.k
    return x / k, compression.plate_y - k * y, z / k


def compression_fixed_point(compression=None):
    "The point left in place by the compression model, y = plate_y / (1 + k)."
    compression = compression or PhantomCompression()
    return 0.0, compression.plate_y / (1 + compression.k), 0.0


def release_scale(compression=None):
    """Upper bound 1/k of the re-scaling constant relating heights at CRC and SRG.

    The phantom cannot assume the SRG shape, so the constant itself stays symbolic."""
    compression = compression or PhantomCompression()
    return 1 / compression.k


def _read_frame(csv_source):
    import_.require(pd)
    try:
        return pd.read_csv(
            csv_source, dtype=str, keep_default_na=False, skipinitialspace=True
        )
    except pd.errors.EmptyDataError as error:
        raise exception.ParserError("The phantom table is empty.") from error
    except pd.errors.ParserError as error:
        raise exception.ParserError(str(error).strip()) from error
