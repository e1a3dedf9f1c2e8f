#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "loewner/control.hpp"

namespace loewner::io {

using Json = nlohmann::ordered_json;

/// %.17g with "-0" normalized; round-trips doubles exactly.
std::string format_double(double x);
std::string format_complex(Cplx z);  // "re+imi" for report text

Json complex_to_json(Cplx z);
Cplx complex_from_json(const Json& j);

Json vector_to_json(const CVec& z);
CVec vector_from_json(const Json& j, int expected_dim = -1);

Json jet_to_json(const Jet& jet);
Jet jet_from_json(const Json& j, int dim, int min_degree = 1);

Json descriptor_to_json(const MapDescriptor& m);
MapDescriptor descriptor_from_json(const Json& j, int dim);

Json field_to_json(const HerglotzField& g);
HerglotzField field_from_json(const Json& j, int dim);

Json functional_to_json(const LinearFunctional& l);
LinearFunctional functional_from_json(const Json& j, int dim);

Json family_to_json(const ControlFamily& f);
ControlFamily family_from_json(const Json& j, int dim);

/// Comma-separated, header row, UTF-8, LF line endings.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

std::vector<std::string> point_header(const std::string& prefix, int dim);
std::vector<std::string> point_cells(const CVec& z);

/// Renders a JSON tree as indented "key: value" text with stable field order.
std::string render_report(const Json& j);

void write_text(const std::filesystem::path& path, const std::string& content);

}  // namespace loewner::io
