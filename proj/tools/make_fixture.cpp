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
// Writes the synthetic study cohort as a dataset directory.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "oralscreen/errors.hpp"
#include "oralscreen/fixtures.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write the synthetic study dataset"};
  std::string out;
  bool images = false;
  app.add_option("--out", out, "Output directory")->required();
  app.add_flag("--images", images, "Also render one PNG per image");
  CLI11_PARSE(app, argc, argv);

  try {
    const oralscreen::fixtures::StudyFixture fx =
        oralscreen::fixtures::build_study_fixture();
    oralscreen::fixtures::write_study_fixture(fx, out, images);
    std::cout << "wrote " << fx.dataset.subjects.size() << " subjects, "
              << fx.images.size() << " images, " << fx.dataset.annotations.size()
              << " annotations to " << out << '\n';
    for (const auto& a : fx.adjustments) {
      std::cout << "adjusted MGI " << a.mgi << " x "
                << oralscreen::name_of(a.condition) << ": total " << a.used_total
                << " (table " << a.main_table << ", by gender " << a.gender_total
                << ", by cohort " << a.cohort_total << "), female/male "
                << a.used_gender[0] << '/' << a.used_gender[1] << '\n';
    }
  } catch (const oralscreen::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 2;
  } catch (const oralscreen::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
