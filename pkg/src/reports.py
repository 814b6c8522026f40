#!/usr/bin/env python3
# Copyright 2025 Canonical Ltd.
# See LICENSE file for licensing details.

"""Check reports, report documents and their JSON and text renderings."""

import json
import logging
from pathlib import Path
from typing import Any, Literal, Optional

import jsonschema
from jinja2 import Environment, FileSystemLoader, StrictUndefined
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from numlin import Tolerances

logger = logging.getLogger(__name__)

TEMPLATES_PATH = Path(__file__).parent / "templates"

TRACEABILITY: dict[str, str] = {
    "fixed-space": "D = Fix R = ker(Id - R)",
    "fixed-space-adjoint": "Fix R* = Fix R",
    "range-identities": "ran(Id - R) = ran(Id - R*) = D^perp",
    "t-definition": "T = P_{D^perp} (Id - R)^-1 P_{D^perp} - 1/2 P_{D^perp}",
    "t-structure": "ran T in D^perp and P_{D^perp} T = T P_{D^perp} = T",
    "t-monotone": "T is monotone and maximally monotone",
    "closed-range-constant": "||y - Ry|| >= alpha ||y|| for y in D^perp",
    "selection-norm-bound": "||P_{D^perp} (Id - R)^-1 P_{D^perp}|| <= 1/alpha",
    "selection-linear": (
        "P_{D^perp} (Id - R)^+ restricted to D^perp is a linear selection of (Id - R)^-1"
    ),
    "a-domain": "A = (Id - R)^-1 - 1/2 Id has dom A = D^perp",
    "a-kernel-image": "A0 = D",
    "a-decomposition": "A = N_{D^perp} + B",
    "b-equals-t": "B = T",
    "b-selection": "B restricted to dom A is a selection of A",
    "set-valued-inverse": "(Id - R)^-1 = 1/2 Id + T + N_{D^perp}",
    "moore-penrose": "(Id - R)^+ = T + 1/2 P_{D^perp}",
    "penrose-equations": "MPM = M, PMP = P, (MP)* = MP, (PM)* = PM",
    "t-uniqueness": (
        "(Id - R)^-1 = 1/2 Id + S + N_{D^perp} and P_{D^perp} S P_{D^perp} = S force S = T"
    ),
    "half-shift-strongly-monotone": "1/2 Id + T is 1/2-strongly monotone",
    "half-shift-inverse": "(1/2 Id + T)^-1 = 2 J_{2T}",
    "half-shift-inverse-closed-form": (
        "(1/2 Id + T)^-1 = (Id - R) P_{D^perp} + 2 P_D = Id - R + 2 P_D"
    ),
    "half-shift-inverse-restriction": "(1/2 Id + T)^-1 restricted to D^perp is Id - R",
    "doubled-t": "2T + Id = 2 P_{D^perp} (Id - R)^-1 P_{D^perp} + P_D",
    "resolvent-2t": "J_{2T} = (Id + 2T)^-1 = P_D + 1/2 (Id - R) P_{D^perp}",
    "reflected-resolvent": "2 J_{2T} - Id is nonexpansive",
    "half-displacement-firm": "1/2 (Id - R) is firmly nonexpansive",
    "displacement-lipschitz": "||Id - R|| <= 2",
    "displacement-monotone": "Id - R is monotone",
    "displacement-cocoercive": "Id - R is 1/2-cocoercive",
    "displacement-maximal": "Id - R and (Id - R)^-1 are maximally monotone",
    "inverse-strongly-monotone": "(Id - R)^-1 is 1/2-strongly monotone",
    "displacement-paramonotone": "Id - R is paramonotone",
    "rectangular-hypotheses": (
        "Id - R and (Id - R)^-1 are 3* monotone: bounded and monotone hypotheses"
    ),
    "a-maximal": "(Id - R)^-1 - 1/2 Id is maximally monotone",
    "isometry-order": "R^m = Id with m minimal",
    "orbit-projector": "P_D = (1/m) sum_{k=0}^{m-1} R^k",
    "orbit-invariance": "R^l sum_k R^k = sum_k R^k",
    "orbit-shift": "sum_k R^{k+1} = sum_k R^{k-1} = sum_k R^k",
    "orbit-symmetric": "(R + R^-1) (1/m) sum_k R^k = (2/m) sum_k R^k",
    "isometry-t-series": "T = (1/2m) sum_{k=1}^{m-1} (m - 2k) R^k = -T*",
    "isometry-sandwich": (
        "1/2 P_{D^perp} (R + R*) P_{D^perp} = "
        "(1/m)(-Id - sum_{k=2}^{m-2} R^k + max{1, m-2}/2 (R + R^{m-1}))"
    ),
    "isometry-t-symmetry": "T is symmetric only when m = 2",
    "projection-example": (
        "R = P_U: D = U, Id - R = P_{U^perp}, (Id - R)^-1 = Id + N_{U^perp}, T = 1/2 P_{U^perp}"
    ),
    "negative-projection-example": (
        "R = -P_U: D = {0}, Id - R = Id + P_U, (Id - R)^-1 = 1/2 Id + 1/2 P_{U^perp}, "
        "T = 1/2 P_{U^perp}"
    ),
    "reflection-example": (
        "R = R_U: D = U, Id - R = 2 P_{U^perp}, (Id - R)^-1 = 1/2 Id + N_{U^perp}, T = 0"
    ),
    "negative-reflection-example": (
        "R = -R_U: D = U^perp, Id - R = 2 P_U, (Id - R)^-1 = 1/2 Id + N_U, T = 0"
    ),
}


class CheckReport(BaseModel):
    """One verification outcome; pass holds exactly when residual <= tol."""

    model_config = ConfigDict(frozen=True, populate_by_name=True, extra="forbid")

    check_id: str = Field(
        description="Stable identifier, used for ordering.",
        examples=["inverse.set_valued"],
        pattern=r"^[a-z0-9_.\-]+$",
    )
    reference: str = Field(
        description="Key of the traceability table naming the identity under test.",
        examples=["set-valued-inverse"],
    )
    residual: float = Field(ge=0, allow_inf_nan=False)
    tol: float = Field(ge=0, allow_inf_nan=False)
    passed: bool = Field(alias="pass")
    note: Optional[str] = None

    @field_validator("reference")
    @classmethod
    def reference_is_traceable(cls, value: str) -> str:
        """Reject references missing from the traceability table."""
        if value not in TRACEABILITY:
            raise ValueError(f"unknown reference {value!r}")
        return value

    @model_validator(mode="after")
    def pass_matches_residual(self) -> "CheckReport":
        """Keep the pass flag consistent with residual and tolerance."""
        if self.passed != (self.residual <= self.tol):
            raise ValueError(
                f"pass={self.passed} contradicts residual {self.residual} and tol {self.tol}"
            )
        return self


class SkippedCheck(BaseModel):
    """A check that does not apply to the analyzed operator."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    check_id: str
    reference: str
    reason: str


class VerificationDocument(BaseModel):
    """Output of `verify`."""

    spec: dict[str, Any]
    suite: str
    seed: int
    tolerances: Tolerances
    checks: list[CheckReport]
    skipped: list[SkippedCheck]


class Discrepancy(BaseModel):
    """A stated closed form compared against the computed one."""

    kind: Literal["DISCREPANCY", "SUSPECTED_TYPO"]
    example: str
    item: str
    stated: str
    computed: str
    residual_vs_stated: float
    residual_vs_computed: float


class GalleryBlock(BaseModel):
    """Checks for one operator of the gallery."""

    name: str
    checks: list[CheckReport]
    skipped: list[SkippedCheck] = Field(default_factory=list)


class GalleryDocument(BaseModel):
    """Output of `gallery`."""

    n: int
    dim_u: int
    seed: int
    tolerances: Tolerances
    blocks: list[GalleryBlock]
    discrepancies: list[Discrepancy]
    notes: list[Discrepancy]


def evaluate(
    check_id: str, reference: str, residual: float, tol: float, note: Optional[str] = None
) -> CheckReport:
    """Build the CheckReport for a residual against a tolerance."""
    residual = float(residual)
    report = CheckReport.model_validate(
        {
            "check_id": check_id,
            "reference": reference,
            "residual": residual,
            "tol": float(tol),
            "pass": residual <= tol,
            "note": note,
        }
    )
    if not report.passed:
        logger.warning("Check %s failed: residual %s > tol %s", check_id, residual, tol)
    return report


def sorted_checks(checks: list[CheckReport]) -> list[CheckReport]:
    """Return checks ordered by check_id."""
    return sorted(checks, key=lambda check: check.check_id)


def dump_json(payload: Any) -> str:
    """Serialize a payload as indented JSON with shortest round-trip floats."""
    return json.dumps(payload, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def validate_document(payload: dict[str, Any], model: type[BaseModel]) -> None:
    """Validate a dumped document against the JSON schema of its model.

    Raises:
        RuntimeError: if the payload does not match the published schema.
    """
    schema = model.model_json_schema(by_alias=True, mode="serialization")
    try:
        jsonschema.Draft202012Validator(schema).validate(payload)
    except jsonschema.ValidationError as e:
        logger.error("Document does not match the %s schema: %s", model.__name__, e.message)
        raise RuntimeError(f"invalid {model.__name__} document: {e.message}") from e


def _format_number(value: Any) -> str:
    if value is None:
        return "undefined"
    return f"{float(value):.6g}"


def _format_matrix(rows: list[list[float]]) -> str:
    if not rows:
        return "  (empty)"
    return "\n".join("  " + " ".join(f"{value:>11.4g}" for value in row) for row in rows)


def render_text(template_name: str, **context: Any) -> str:
    """Render one of the text templates."""
    environment = Environment(
        loader=FileSystemLoader(TEMPLATES_PATH),
        undefined=StrictUndefined,
        keep_trailing_newline=True,
        trim_blocks=True,
        lstrip_blocks=True,
    )
    environment.filters["num"] = _format_number
    environment.filters["matrix"] = _format_matrix
    return environment.get_template(template_name).render(**context)


def write_text(path: Path, text: str) -> None:
    """Write a rendered document to path."""
    path.write_text(text, encoding="utf-8")
    logger.info("Wrote %s", path)
