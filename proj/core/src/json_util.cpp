#include "json_util.hpp"

namespace dclab::detail {

Json parse_json(std::string_view bytes) {
  try {
    return Json::parse(bytes.begin(), bytes.end());
  } catch (const Json::parse_error& e) {
    std::string reason = e.what();
    // Drop nlohmann's "[json.exception.parse_error.101] " prefix.
    if (auto pos = reason.find("] "); pos != std::string::npos) reason = reason.substr(pos + 2);
    std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    throw FormatError("malformed JSON: " + reason, "", offset);
  }
}

std::string child_path(std::string_view parent, std::string_view key) {
  std::string out(parent);
  out += '/';
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

std::string child_path(std::string_view parent, std::size_t index) {
  return std::string(parent) + "/" + std::to_string(index);
}

ObjectReader::ObjectReader(const Json& value, std::string path)
    : value_(value), path_(std::move(path)) {
  if (!value_.is_object()) throw FormatError("expected an object", path_.empty() ? "/" : path_);
}

const Json* ObjectReader::optional(std::string_view key) {
  seen_.emplace(key);
  auto it = value_.find(std::string(key));
  if (it == value_.end()) return nullptr;
  return &*it;
}

const Json& ObjectReader::required(std::string_view key) {
  const Json* v = optional(key);
  if (v == nullptr) throw FormatError("missing required field \"" + std::string(key) + "\"", path(key));
  return *v;
}

std::string ObjectReader::string(std::string_view key) {
  return expect_string(required(key), path(key));
}

std::int64_t ObjectReader::integer(std::string_view key) {
  return expect_integer(required(key), path(key));
}

double ObjectReader::number(std::string_view key) {
  return expect_number(required(key), path(key));
}

const Json& ObjectReader::array(std::string_view key) {
  return expect_array(required(key), path(key));
}

const Json& ObjectReader::object(std::string_view key) {
  const Json& v = required(key);
  if (!v.is_object()) throw FormatError("expected an object", path(key));
  return v;
}

void ObjectReader::finish() const {
  for (auto it = value_.begin(); it != value_.end(); ++it) {
    if (!seen_.contains(it.key())) {
      throw FormatError("unknown field \"" + it.key() + "\"", path(it.key()));
    }
  }
}

std::string expect_string(const Json& v, const std::string& path) {
  if (!v.is_string()) throw FormatError("expected a string", path);
  return v.get<std::string>();
}

std::int64_t expect_integer(const Json& v, const std::string& path) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    double d = v.get<double>();
    if (d == static_cast<double>(static_cast<std::int64_t>(d))) return static_cast<std::int64_t>(d);
  }
  throw FormatError("expected an integer", path);
}

double expect_number(const Json& v, const std::string& path) {
  if (!v.is_number()) throw FormatError("expected a number", path);
  return v.get<double>();
}

const Json& expect_array(const Json& v, const std::string& path) {
  if (!v.is_array()) throw FormatError("expected an array", path);
  return v;
}

LogicValue expect_logic(const Json& v, const std::string& path) {
  if (v.is_string()) {
    if (auto l = logic_from_string(v.get<std::string>())) return *l;
  } else if (v.is_number_integer()) {
    auto i = v.get<std::int64_t>();
    if (i == 0) return LogicValue::Zero;
    if (i == 1) return LogicValue::One;
  }
  throw FormatError("expected a logic value (\"0\", \"1\", \"X\" or \"Z\")", path);
}

}  // namespace dclab::detail
