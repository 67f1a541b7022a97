#pragma once

#include <string>

#include "rieszdr/data.hpp"

namespace rieszdr {

// Observational CSV: header row with covariate columns x1..xd, treatment
// column `d` (0/1) and outcome column `y`, in any column order.
ObservationalDataset read_observational_csv(const std::string& path);
void write_observational_csv(const std::string& path, const ObservationalDataset& data);

// Two-sample CSV: covariate columns x1..xd plus a label column `sample`
// with values `de` / `nu`.
TwoSampleDataset read_two_sample_csv(const std::string& path);
void write_two_sample_csv(const std::string& path, const TwoSampleDataset& data);

}  // namespace rieszdr
