#include "ncentre/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ncentre/errors.hpp"

namespace ncentre {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void CsvWriter::append_text(std::string_view text) {
  const bool quote = text.find_first_of(",\"\n\r") != std::string_view::npos;
  if (!quote) {
    out_.append(text);
    return;
  }
  out_.push_back('"');
  for (char ch : text) {
    if (ch == '"') out_.push_back('"');
    out_.push_back(ch);
  }
  out_.push_back('"');
}

void CsvWriter::header(std::initializer_list<std::string_view> names) {
  bool first = true;
  for (auto n : names) {
    if (!first) out_.push_back(',');
    append_text(n);
    first = false;
  }
  out_.push_back('\n');
}

void CsvWriter::row(std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) out_.push_back(',');
    out_ += format_double(v);
    first = false;
  }
  out_.push_back('\n');
}

void CsvWriter::row(const std::vector<Cell>& cells) {
  bool first = true;
  for (const auto& c : cells) {
    if (!first) out_.push_back(',');
    first = false;
    if (const auto* d = std::get_if<double>(&c)) out_ += format_double(*d);
    else if (const auto* i = std::get_if<long long>(&c)) out_ += std::to_string(*i);
    else append_text(std::get<std::string>(c));
  }
  out_.push_back('\n');
}

void write_text(const std::filesystem::path& file, std::string_view contents) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream os(file, std::ios::binary);
  if (!os) throw Error(ErrorCode::invalid_argument, "cannot open " + file.string() + " for writing");
  os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

void write_json(const std::filesystem::path& file, const nlohmann::json& j) {
  write_text(file, j.dump(2) + "\n");
}

nlohmann::json read_json(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw Error(ErrorCode::invalid_config, "config: cannot open " + file.string());
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    return nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::invalid_config, std::string("config: malformed JSON: ") + e.what());
  }
}

}  // namespace ncentre
