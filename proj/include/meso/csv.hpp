#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace meso::csv {

// 17 significant digits, '.' decimal; nan/inf spelled as such.
std::string format(double v);
// RFC-4180 quoting when the field holds a comma, quote or line break.
std::string quote(const std::string& field);

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  Writer& field(const std::string& s);
  Writer& field(const char* s) { return field(std::string(s)); }
  Writer& field(double v);
  Writer& field(long long v);
  Writer& field(int v) { return field(static_cast<long long>(v)); }
  Writer& field(bool v) { return field(std::string(v ? "true" : "false")); }
  void end_row();
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
  bool first_ = true;
};

// Splits one record; handles quoted fields but not embedded line breaks.
std::vector<std::string> split_line(const std::string& line);

}  // namespace meso::csv
