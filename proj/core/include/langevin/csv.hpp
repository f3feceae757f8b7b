#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace langevin {

// Round-trip decimal formatting (17 significant digits, %.17g).
std::string fmt17(double v);

// One header row, then data rows; column counts are enforced.  Rows are
// written with '\n' so identical inputs produce byte-identical files.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);

 private:
  std::ostream& os_;
  std::size_t cols_;
};

}  // namespace langevin
