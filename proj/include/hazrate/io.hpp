#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hazrate/model.hpp"

namespace hazrate {

// Counting-process CSV with header id,start,stop,treat,event.
void write_counting_rows(std::ostream& os, const std::vector<CountingRow>& rows);
std::vector<CountingRow> read_counting_rows(std::istream& is);
void write_counting_rows_file(const std::string& path, const std::vector<CountingRow>& rows);
std::vector<CountingRow> read_counting_rows_file(const std::string& path);

// Model file: a "# kernel ..." comment naming lambda12, then t,lambda01,lambda02 on the grid.
// Only two-piece kernels can be written.
void write_model(std::ostream& os, const IllnessDeathModel& model);
IllnessDeathModel read_model(std::istream& is);
void write_model_file(const std::string& path, const IllnessDeathModel& model);
IllnessDeathModel read_model_file(const std::string& path);

// Shortest round-trippable decimal for a double at 6 significant digits.
std::string fmt6(double x);

}  // namespace hazrate
