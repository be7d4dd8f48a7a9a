#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace ncentre {

/// Shortest round-trip-safe text for a double: 17 significant digits.
std::string format_double(double value);

/// RFC-4180 CSV with LF line endings. Fields containing a comma, quote or
/// newline are quoted; numbers use format_double.
class CsvWriter {
 public:
  using Cell = std::variant<double, long long, std::string>;

  void header(std::initializer_list<std::string_view> names);
  void row(std::initializer_list<double> values);
  void row(const std::vector<Cell>& cells);

  const std::string& str() const noexcept { return out_; }

 private:
  void append_text(std::string_view text);

  std::string out_;
};

void write_text(const std::filesystem::path& file, std::string_view contents);
void write_json(const std::filesystem::path& file, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& file);

}  // namespace ncentre
