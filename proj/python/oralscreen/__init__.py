# Copyright 2026 The Oralscreen Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ==============================================================================
"""Oral-systemic screening analysis toolkit."""

from oralscreen._core import (
    IoError,
    NumericalError,
    ValidationError,
    auc,
    calibration_report,
    fisher_exact,
    implied_prevalence,
    iou,
    pooled_roc,
    student_t_sf,
    table1_csv,
    welch_from_summary,
    write_fixture,
    write_report,
)

__all__ = [
    "IoError",
    "NumericalError",
    "ValidationError",
    "auc",
    "calibration_report",
    "fisher_exact",
    "implied_prevalence",
    "iou",
    "pooled_roc",
    "student_t_sf",
    "table1_csv",
    "welch_from_summary",
    "write_fixture",
    "write_report",
]
