#pragma once

// Strict JSON reading helpers shared by the file-format parsers.

#include <cstdint>
#include <set>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "dclab/error.hpp"
#include "dclab/logic.hpp"
#include "dclab/stimulus.hpp"

namespace dclab::detail {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

/// Parses `bytes`; syntax errors become FormatError with the byte offset.
Json parse_json(std::string_view bytes);

std::string child_path(std::string_view parent, std::string_view key);
std::string child_path(std::string_view parent, std::size_t index);

/// Reads fields of one JSON object and rejects fields nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const Json& value, std::string path);

  const Json& required(std::string_view key);
  const Json* optional(std::string_view key);

  std::string string(std::string_view key);
  std::int64_t integer(std::string_view key);
  double number(std::string_view key);
  const Json& array(std::string_view key);
  const Json& object(std::string_view key);

  std::string path(std::string_view key) const { return child_path(path_, key); }
  const std::string& path() const { return path_; }

  /// Throws FormatError for the first field that was never read.
  void finish() const;

 private:
  const Json& value_;
  std::string path_;
  std::set<std::string, std::less<>> seen_;
};

std::string expect_string(const Json& v, const std::string& path);
std::int64_t expect_integer(const Json& v, const std::string& path);
double expect_number(const Json& v, const std::string& path);
const Json& expect_array(const Json& v, const std::string& path);
LogicValue expect_logic(const Json& v, const std::string& path);

/// Stimulus document as a JSON value; used where stimuli nest in other files.
Json stimulus_to_json(const StimulusSet& s);
StimulusSet stimulus_from_json(const Json& doc, const std::string& path);

}  // namespace dclab::detail
