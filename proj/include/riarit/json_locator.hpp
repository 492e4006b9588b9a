#pragma once

#include <string>
#include <string_view>
#include <unordered_map>

#include "json.hpp"

namespace riarit {

/// Maps JSON pointers of an already-validated document to the line where each
/// value starts, so semantic errors can name a line.
class JsonLocator {
public:
  JsonLocator() = default;
  explicit JsonLocator(std::string_view text);

  /// Line (1-based) of the value at `pointer`, falling back to the nearest
  /// located ancestor; 0 when nothing is known.
  int line_of(const nlohmann::json::json_pointer& pointer) const;

private:
  void scan_value(const std::string& path);
  void scan_object(const std::string& path);
  void scan_array(const std::string& path);
  std::string scan_string();
  void skip_ws();

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::unordered_map<std::string, int> lines_;
};

/// Parses `text`, turning parse failures into ConfigError with line and column.
nlohmann::json parse_json_document(std::string_view text, const std::string& source);

std::string read_text_file(const std::string& path);

} // namespace riarit
