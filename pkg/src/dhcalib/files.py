"""Versioned JSON formats for datasets, calibration results and reports.

Units are fixed: millimetres, radians, pixels.  Floats are written with
``repr`` precision so a load after save reproduces every value bit for bit.
Numeric leaf arrays are kept on one line to keep files diffable.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .camera import CameraIntrinsics, PlateSpec
from .dataset import GroundTruth, SweepDataset, SweepRecord
from .errors import CalibrationError
from .identification import CalibrationResult, RoughResult, evaluate
from .kinematics import (
    PARAM_NAMES,
    BaseFrameParams,
    DHTable,
    KinematicModel,
    ToolFrameParams,
    delta_between,
)

SCHEMA_VERSION = 1
UNITS = {"length": "mm", "angle": "rad", "pixel": "px"}


class FormatError(CalibrationError):
    """File does not match the expected schema."""


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _format(obj, indent: int = 0) -> str:
    pad = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_format(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + "  " * indent + "}"
    if isinstance(obj, list):
        if all(not isinstance(v, (list, dict)) for v in obj):
            return "[" + ", ".join(json.dumps(v, allow_nan=False) for v in obj) + "]"
        items = [pad + _format(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + "  " * indent + "]"
    return json.dumps(obj, allow_nan=False)


def dumps(doc: dict) -> str:
    return _format(_plain(doc)) + "\n"


def write_json(path, doc: dict) -> None:
    Path(path).write_text(dumps(doc), encoding="utf-8")


def read_json(path, kind: str) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: expected a JSON object")
    if doc.get("format") != kind:
        raise FormatError(f"{path}: expected format {kind!r}, got {doc.get('format')!r}")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise FormatError(f"{path}: unsupported schema_version {doc.get('schema_version')!r}")
    return doc


def header(kind: str) -> dict:
    return {"format": kind, "schema_version": SCHEMA_VERSION, "units": dict(UNITS)}


# --- datasets ---

def dataset_to_dict(ds: SweepDataset) -> dict:
    k, plate = ds.intrinsics, ds.plate
    doc = header("dhcalib-dataset")
    doc["intrinsics"] = {
        "fx": k.fx, "fy": k.fy, "cx": k.cx, "cy": k.cy,
        "image_width": k.image_width, "image_height": k.image_height,
    }
    doc["plate"] = {"rows": plate.rows, "cols": plate.cols, "square_size": plate.square_size}
    doc["nominal"] = {
        "dh": ds.nominal_dh.as_array(),
        "base": None if ds.nominal_base is None else ds.nominal_base.as_array(),
        "base_rotation_prior": list(ds.base_rotation_prior),
        "tool_prior": ds.tool_prior.as_array(),
    }
    doc["records"] = [
        {
            "joint": r.joint_index,
            "commanded_angles": r.commanded_angles,
            "joint_configs": r.joint_configs,
            "observed_pixels": r.observed_pixels,
            "measured_points3d": r.measured_points3d,
        }
        for r in ds.records
    ]
    if ds.ground_truth is not None:
        doc["ground_truth"] = {
            "params": ds.ground_truth.model.pack(),
            "delta": ds.ground_truth.delta,
        }
    return doc


def _array(value, shape=None) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if shape is not None and arr.shape != shape:
        raise FormatError(f"expected array of shape {shape}, got {arr.shape}")
    return arr


def dataset_from_dict(doc: dict) -> SweepDataset:
    try:
        plate = PlateSpec(**doc["plate"])
        nominal = doc["nominal"]
        records = []
        for r in doc["records"]:
            records.append(
                SweepRecord(
                    joint_index=int(r["joint"]),
                    commanded_angles=_array(r["commanded_angles"]),
                    joint_configs=_array(r["joint_configs"]),
                    observed_pixels=_array(r["observed_pixels"]),
                    measured_points3d=_array(r["measured_points3d"]),
                )
            )
        truth = None
        if doc.get("ground_truth") is not None:
            gt = doc["ground_truth"]
            truth = GroundTruth(
                model=KinematicModel.unpack(_array(gt["params"], (36,))),
                delta=_array(gt["delta"], (36,)),
            )
        return SweepDataset(
            records=tuple(records),
            intrinsics=CameraIntrinsics(**doc["intrinsics"]),
            plate=plate,
            nominal_dh=DHTable.from_array(nominal["dh"]),
            base_rotation_prior=tuple(float(x) for x in nominal["base_rotation_prior"]),
            tool_prior=ToolFrameParams(*nominal["tool_prior"]),
            nominal_base=None if nominal.get("base") is None else BaseFrameParams(*nominal["base"]),
            ground_truth=truth,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed dataset: {exc!r}") from exc


def save_dataset(ds: SweepDataset, path) -> None:
    write_json(path, dataset_to_dict(ds))


def load_dataset(path) -> SweepDataset:
    return dataset_from_dict(read_json(path, "dhcalib-dataset"))


# --- calibration results ---

def result_to_dict(result: CalibrationResult, rough: Optional[RoughResult] = None) -> dict:
    doc = header("dhcalib-result")
    doc["param_names"] = list(PARAM_NAMES)
    doc["dh_rough"] = result.dh_rough.as_array()
    if rough is not None:
        doc["rough_identified"] = rough.identified
    doc["seed"] = result.seed.pack()
    doc["delta"] = result.delta
    doc["compensated"] = result.compensated.pack()
    doc["objective_value"] = result.objective_value
    doc["initial_objective"] = result.initial_objective
    doc["iterations"] = result.iterations
    doc["converged"] = result.converged
    doc["status"] = result.status
    doc["trace"] = [list(t) for t in result.trace]
    return doc


def result_from_dict(doc: dict) -> CalibrationResult:
    try:
        return CalibrationResult(
            dh_rough=DHTable.from_array(doc["dh_rough"]),
            seed=KinematicModel.unpack(_array(doc["seed"], (36,))),
            delta=_array(doc["delta"], (36,)),
            compensated=KinematicModel.unpack(_array(doc["compensated"], (36,))),
            objective_value=float(doc["objective_value"]),
            initial_objective=float(doc["initial_objective"]),
            iterations=int(doc["iterations"]),
            converged=bool(doc["converged"]),
            status=str(doc["status"]),
            trace=[tuple(float(v) for v in t) for t in doc["trace"]],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed result: {exc!r}") from exc


def save_result(result: CalibrationResult, path, rough: Optional[RoughResult] = None) -> None:
    write_json(path, result_to_dict(result, rough))


def load_result(path) -> CalibrationResult:
    return result_from_dict(read_json(path, "dhcalib-result"))


# --- comparison variants and reports ---

VARIANTS = ("classic", "rough", "compensated")


def variant_model(
    variant: str, dataset: SweepDataset, result: Optional[CalibrationResult] = None
) -> KinematicModel:
    """Parameter set for one comparison variant.

    Every variant shares the compensated base and tool frames, so the
    comparison isolates the D-H table.  Without a result only ``classic`` is
    available, built from the dataset's nominal frames.
    """
    if variant not in VARIANTS:
        raise FormatError(f"unknown variant {variant!r}")
    if result is None:
        if variant != "classic" or dataset.nominal_model() is None:
            raise FormatError(f"variant {variant!r} needs a calibration result (--params)")
        return dataset.nominal_model()
    frames = result.compensated
    dh = {
        "classic": dataset.nominal_dh,
        "rough": result.dh_rough,
        "compensated": frames.dh,
    }[variant]
    return KinematicModel(dh, frames.base, frames.tool)


def variant_series(model: KinematicModel, dataset: SweepDataset) -> dict:
    ev = evaluate(model, dataset)
    return {
        "joint": [j for j, _ in ev.labels],
        "angle": [a for _, a in ev.labels],
        "per_pose": ev.per_pose,
        "mean": ev.mean,
    }


def _deg(x):
    return np.degrees(np.asarray(x, dtype=float))


def build_report(
    dataset: SweepDataset, rough: RoughResult, result: CalibrationResult
) -> dict:
    doc = header("dhcalib-report")
    doc["variants"] = {
        v: variant_series(variant_model(v, dataset, result), dataset) for v in VARIANTS
    }
    doc["circle_fits"] = [
        {
            "joint": j + 1,
            "plane": c.plane,
            "center": c.center,
            "radius": c.radius,
            "d_cp": q.d_cp,
            "m_p": q.m_p,
            "m_c": q.m_c,
        }
        for j, (c, q) in enumerate(zip(rough.circles, rough.quality))
    ]
    nominal = dataset.nominal_dh.as_array()
    measured = rough.dh.as_array()
    doc["rough_dh"] = [
        {
            "joint": j + 1,
            "alpha_nominal": nominal[j, 0],
            "alpha_measured": measured[j, 0] if rough.identified[j, 0] else None,
            "a_nominal": nominal[j, 1],
            "a_measured": measured[j, 1] if rough.identified[j, 1] else None,
            "d_nominal": nominal[j, 2],
            "d_measured": measured[j, 2] if rough.identified[j, 2] else None,
        }
        for j in range(7)
    ]
    delta = result.delta
    doc["dh_offsets"] = [
        {
            "joint": j + 1,
            "d_alpha_rad": delta[j],
            "d_a_mm": delta[7 + j],
            "d_d_mm": delta[14 + j],
            "d_theta_deg": float(_deg(delta[21 + j])),
        }
        for j in range(7)
    ]
    doc["frame_offsets"] = {
        "base_translation_mm": delta[28:31],
        "base_rotation_deg": _deg(delta[31:34]),
        "tool_translation_mm": delta[34:36],
    }
    doc["optimization"] = {
        "initial_objective": result.initial_objective,
        "objective_value": result.objective_value,
        "iterations": result.iterations,
        "converged": result.converged,
        "status": result.status,
        "trace": [list(t) for t in result.trace],
    }
    if dataset.ground_truth is not None:
        err = delta_between(dataset.ground_truth.model, result.compensated)
        doc["ground_truth_error"] = dict(zip(PARAM_NAMES, err.tolist()))
    return doc


def save_report(report: dict, path) -> None:
    write_json(path, report)


def load_report(path) -> dict:
    return read_json(path, "dhcalib-report")


def check_report_means(report: dict, tol: float = 1e-9) -> bool:
    for series in report["variants"].values():
        if not math.isclose(float(np.mean(series["per_pose"])), series["mean"], abs_tol=tol):
            return False
    return True
