#include "riarit/json_locator.hpp"

#include "riarit/model.hpp"

#include <fstream>
#include <sstream>

namespace riarit {

namespace {

std::string escape_token(const std::string& key) {
  std::string out;
  for (char ch : key) {
    if (ch == '~') {
      out += "~0";
    } else if (ch == '/') {
      out += "~1";
    } else {
      out += ch;
    }
  }
  return out;
}

} // namespace

JsonLocator::JsonLocator(std::string_view text) : text_(text) {
  try {
    skip_ws();
    scan_value("");
  } catch (const std::out_of_range&) {
    // Partial map is still useful for documents with trailing garbage.
  }
  text_ = {};
}

void JsonLocator::skip_ws() {
  while (pos_ < text_.size()) {
    const char ch = text_[pos_];
    if (ch == '\n') {
      ++line_;
    } else if (ch != ' ' && ch != '\t' && ch != '\r') {
      return;
    }
    ++pos_;
  }
}

std::string JsonLocator::scan_string() {
  // Assumes text_[pos_] == '"'.
  std::string out;
  ++pos_;
  while (pos_ < text_.size() && text_[pos_] != '"') {
    if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) {
      out += text_[pos_ + 1];
      pos_ += 2;
      continue;
    }
    out += text_[pos_++];
  }
  ++pos_;
  return out;
}

void JsonLocator::scan_value(const std::string& path) {
  skip_ws();
  if (pos_ >= text_.size()) {
    throw std::out_of_range("eof");
  }
  lines_.emplace(path, line_);
  const char ch = text_[pos_];
  if (ch == '{') {
    scan_object(path);
  } else if (ch == '[') {
    scan_array(path);
  } else if (ch == '"') {
    scan_string();
  } else {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ',' || c == '}' || c == ']' || c == ' ' || c == '\n' || c == '\t' || c == '\r') {
        break;
      }
      ++pos_;
    }
  }
}

void JsonLocator::scan_object(const std::string& path) {
  ++pos_;
  skip_ws();
  if (pos_ < text_.size() && text_[pos_] == '}') {
    ++pos_;
    return;
  }
  while (pos_ < text_.size()) {
    skip_ws();
    const std::string key = scan_string();
    skip_ws();
    ++pos_;  // ':'
    scan_value(path + "/" + escape_token(key));
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == ',') {
      ++pos_;
      continue;
    }
    ++pos_;  // '}'
    return;
  }
}

void JsonLocator::scan_array(const std::string& path) {
  ++pos_;
  skip_ws();
  if (pos_ < text_.size() && text_[pos_] == ']') {
    ++pos_;
    return;
  }
  std::size_t index = 0;
  while (pos_ < text_.size()) {
    scan_value(path + "/" + std::to_string(index++));
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == ',') {
      ++pos_;
      continue;
    }
    ++pos_;  // ']'
    return;
  }
}

int JsonLocator::line_of(const nlohmann::json::json_pointer& pointer) const {
  auto p = pointer;
  while (true) {
    if (auto it = lines_.find(p.to_string()); it != lines_.end()) {
      return it->second;
    }
    if (p.empty()) {
      return 0;
    }
    p.pop_back();
  }
}

nlohmann::json parse_json_document(std::string_view text, const std::string& source) {
  try {
    return nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    // Byte offset -> line/column.
    const std::size_t offset = e.byte == 0 ? 0 : e.byte - 1;
    int line = 1;
    std::size_t line_start = 0;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        line_start = i + 1;
      }
    }
    std::ostringstream msg;
    msg << source << ":" << line << ":" << (offset - line_start + 1) << ": invalid JSON ("
        << e.what() << ")";
    throw ConfigError(msg.str());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open '" + path + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace riarit
