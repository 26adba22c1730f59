/* Copyright 2026 The Oralscreen Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <string>
#include <vector>

#include "oralscreen/cooccurrence.hpp"
#include "oralscreen/errors.hpp"
#include "oralscreen/exact_stats.hpp"
#include "oralscreen/fixtures.hpp"
#include "oralscreen/pipeline_io.hpp"
#include "oralscreen/seg_metrics.hpp"

namespace py = pybind11;
namespace os = oralscreen;

namespace {

using BoolArray = py::array_t<bool, py::array::c_style | py::array::forcecast>;
using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

os::BinaryMask ToMask(const BoolArray& a) {
  if (a.ndim() != 2) throw os::ValidationError("mask must be 2-D (height, width)");
  os::BinaryMask m(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  const bool* data = a.data();
  for (std::size_t i = 0; i < m.size(); ++i) m.set(i, data[i]);
  return m;
}

os::ProbabilityMap ToMap(const FloatArray& a) {
  if (a.ndim() != 2) throw os::ValidationError("scores must be 2-D (height, width)");
  return os::ProbabilityMap(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)),
                            std::vector<float>(a.data(), a.data() + a.size()));
}

py::dict ResultDict(const os::TestResult& r) {
  py::dict d;
  d["p_value"] = r.p_value;
  d["statistic"] = r.statistic;
  d["df"] = r.df;
  d["tail"] = std::string(os::to_string(r.tail));
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the oralscreen toolkit.";

  py::register_exception<os::ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<os::IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<os::NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def(
      "fisher_exact",
      [](std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d,
         const std::string& tail) {
        return ResultDict(os::fisher_exact({a, b, c, d}, os::parse_tail_mode(tail)));
      },
      py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"),
      py::arg("tail") = "two-sided",
      "Fisher exact test on [[a, b], [c, d]]; tail is two-sided, greater or less.");

  m.def("student_t_sf", &os::student_t_sf, py::arg("t"), py::arg("df"),
        "Upper tail P(T > t) of Student's t.");

  m.def(
      "welch_from_summary",
      [](double mean1, double sd1, std::int64_t n1, double mean2, double sd2,
         std::int64_t n2) {
        return ResultDict(os::welch_t_from_summary({mean1, sd1, n1}, {mean2, sd2, n2}));
      },
      py::arg("mean1"), py::arg("sd1"), py::arg("n1"), py::arg("mean2"), py::arg("sd2"),
      py::arg("n2"));

  m.def(
      "auc",
      [](const std::vector<std::pair<double, double>>& points) {
        os::RocCurve curve;
        for (const auto& [fpr, tpr] : points) curve.points.push_back({fpr, tpr});
        return os::auc_trapezoid(curve);
      },
      py::arg("points"), "Trapezoidal AUC of (fpr, tpr) points ordered by fpr.");

  m.def("implied_prevalence", &os::implied_prevalence, py::arg("tpr"), py::arg("fpr"),
        py::arg("precision"));

  m.def(
      "iou", [](const BoolArray& pred, const BoolArray& truth) {
        return os::iou(ToMask(pred), ToMask(truth));
      },
      py::arg("pred"), py::arg("truth"));

  m.def(
      "pooled_roc",
      [](const std::vector<FloatArray>& scores, const std::vector<BoolArray>& truths) {
        std::vector<os::ProbabilityMap> maps;
        std::vector<os::BinaryMask> masks;
        for (const auto& s : scores) maps.push_back(ToMap(s));
        for (const auto& t : truths) masks.push_back(ToMask(t));
        const os::RocCurve roc = os::pooled_roc(maps, masks);
        py::dict d;
        std::vector<double> fpr, tpr;
        for (const auto& p : roc.points) {
          fpr.push_back(p.fpr);
          tpr.push_back(p.tpr);
        }
        d["fpr"] = fpr;
        d["tpr"] = tpr;
        d["thresholds"] = roc.thresholds;
        d["auc"] = os::auc_trapezoid(roc);
        return d;
      },
      py::arg("scores"), py::arg("truths"),
      "Pixel-pooled ROC over paired score maps and ground-truth masks.");

  m.def("calibration_report",
        [] { return os::calibration_report_json(os::calibrate_convention(os::study_reference_values())); },
        "Calibration of the Fisher convention as a JSON string.");

  m.def(
      "write_fixture",
      [](const std::filesystem::path& dir, bool images) {
        os::fixtures::write_study_fixture(os::fixtures::build_study_fixture(), dir, images);
      },
      py::arg("dir"), py::arg("images") = false,
      "Writes the synthetic study dataset into dir.");

  m.def(
      "table1_csv",
      [](const std::filesystem::path& data_dir) {
        return os::table1_csv(os::emit_table1(os::ingest(os::DatasetPaths::in_directory(data_dir))));
      },
      py::arg("data_dir"));

  m.def(
      "write_report",
      [](const std::filesystem::path& data_dir, const std::filesystem::path& out_dir,
         double alpha, const std::string& stratify) {
        const os::Dataset ds = os::ingest(os::DatasetPaths::in_directory(data_dir));
        return os::write_report(os::emit_grids(ds, alpha, {}, os::parse_strata(stratify)),
                                out_dir);
      },
      py::arg("data_dir"), py::arg("out_dir"), py::arg("alpha") = 0.05,
      py::arg("stratify") = "none",
      "Ingests data_dir and writes the report tables; returns the written paths.");
}
