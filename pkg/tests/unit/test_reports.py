# Copyright 2025 Canonical Ltd.
# See LICENSE file for licensing details.

import math

import pytest
from pydantic import ValidationError

from numlin import Tolerances
from reports import (
    TRACEABILITY,
    CheckReport,
    SkippedCheck,
    VerificationDocument,
    dump_json,
    evaluate,
    render_text,
    sorted_checks,
    validate_document,
    write_text,
)


def _document(checks: list[CheckReport], skipped: list[SkippedCheck]) -> VerificationDocument:
    return VerificationDocument(
        spec={"kind": "cyclic_shift", "n": 3},
        suite="all",
        seed=0,
        tolerances=Tolerances(),
        checks=checks,
        skipped=skipped,
    )


class TestCheckReport:
    def test_given_residual_below_tol_when_evaluate_then_check_passes(self):
        report = evaluate("inverse.set_valued", "set-valued-inverse", 1e-12, 1e-9)

        assert report.passed
        assert report.residual == 1e-12
        assert report.note is None

    def test_given_residual_above_tol_when_evaluate_then_check_fails(self):
        report = evaluate("inverse.set_valued", "set-valued-inverse", 1e-3, 1e-9, note="off")

        assert not report.passed
        assert report.note == "off"

    def test_given_residual_equal_to_tol_when_evaluate_then_check_passes(self):
        assert evaluate("properties.t_maximal", "t-monotone", 0, 0.0).passed

    def test_given_unknown_reference_when_evaluate_then_validation_error_is_raised(self):
        with pytest.raises(ValidationError):
            evaluate("inverse.set_valued", "no-such-identity", 0.0, 1e-9)

    def test_given_infinite_residual_when_evaluate_then_validation_error_is_raised(self):
        with pytest.raises(ValidationError):
            evaluate("inverse.set_valued", "set-valued-inverse", math.inf, 1e-9)

    def test_given_pass_flag_contradicting_residual_when_created_then_error_is_raised(self):
        with pytest.raises(ValidationError):
            CheckReport.model_validate(
                {
                    "check_id": "inverse.set_valued",
                    "reference": "set-valued-inverse",
                    "residual": 1.0,
                    "tol": 1e-9,
                    "pass": True,
                }
            )

    def test_given_uppercase_check_id_when_evaluate_then_validation_error_is_raised(self):
        with pytest.raises(ValidationError):
            evaluate("Inverse.SetValued", "set-valued-inverse", 0.0, 1e-9)

    def test_given_report_when_dumped_by_alias_then_pass_key_is_written(self):
        report = evaluate("inverse.set_valued", "set-valued-inverse", 0.0, 1e-9)

        assert report.model_dump(by_alias=True)["pass"] is True

    def test_given_unordered_checks_when_sorted_checks_then_ordered_by_check_id(self):
        checks = [
            evaluate("penrose.r2", "penrose-equations", 0.0, 1e-9),
            evaluate("inverse.moore_penrose", "moore-penrose", 0.0, 1e-9),
            evaluate("penrose.r1", "penrose-equations", 0.0, 1e-9),
        ]

        assert [check.check_id for check in sorted_checks(checks)] == [
            "inverse.moore_penrose",
            "penrose.r1",
            "penrose.r2",
        ]

    def test_given_traceability_table_when_read_then_every_entry_is_a_statement(self):
        assert all(statement.strip() for statement in TRACEABILITY.values())


class TestDumpJson:
    def test_given_floats_when_dump_json_then_shortest_round_trip_form_is_written(self):
        assert dump_json({"residual": 0.1, "values": [1e-17, 2.0]}) == (
            '{\n  "residual": 0.1,\n  "values": [\n    1e-17,\n    2.0\n  ]\n}\n'
        )

    def test_given_nan_when_dump_json_then_value_error_is_raised(self):
        with pytest.raises(ValueError):
            dump_json({"residual": math.nan})


class TestValidateDocument:
    def test_given_dumped_document_when_validate_document_then_no_error_is_raised(self):
        document = _document(
            [evaluate("inverse.set_valued", "set-valued-inverse", 0.0, 1e-9)],
            [SkippedCheck(check_id="isometry.order", reference="isometry-order", reason="x")],
        )

        validate_document(document.model_dump(by_alias=True), VerificationDocument)

    def test_given_document_missing_skipped_when_validate_document_then_runtime_error_is_raised(
        self,
    ):
        payload = _document([], []).model_dump(by_alias=True)
        del payload["skipped"]

        with pytest.raises(RuntimeError):
            validate_document(payload, VerificationDocument)


class TestRenderText:
    def test_given_verification_document_when_render_text_then_one_line_per_check(self, tmp_path):
        document = _document(
            [
                evaluate("inverse.set_valued", "set-valued-inverse", 0.0, 1e-9),
                evaluate("penrose.r1", "penrose-equations", 1.0, 1e-9),
            ],
            [SkippedCheck(check_id="isometry.order", reference="isometry-order", reason="R = Id")],
        )

        text = render_text("verification.txt.j2", document=document, summary="cyclic_shift")
        write_text(tmp_path / "report.txt", text)

        assert "PASS  inverse.set_valued" in text
        assert "FAIL  penrose.r1" in text
        assert "SKIP  isometry.order  R = Id" in text
        assert "1/2 checks passed, 1 skipped" in text
        assert (tmp_path / "report.txt").read_text() == text
