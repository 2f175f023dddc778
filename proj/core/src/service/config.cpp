#include "dclab/service/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "../json_util.hpp"
#include "dclab/error.hpp"

namespace dclab::service {

using detail::Json;
using detail::ObjectReader;

void set_listen(ServiceConfig& cfg, const std::string& value) {
  auto colon = value.rfind(':');
  if (colon == std::string::npos) throw FormatError("listen must be host:port", "/listen");
  std::string host = value.substr(0, colon);
  std::string port = value.substr(colon + 1);
  int p = 0;
  try {
    std::size_t used = 0;
    p = std::stoi(port, &used);
    if (used != port.size()) throw std::invalid_argument(port);
  } catch (const std::exception&) {
    throw FormatError("bad port in listen address \"" + value + "\"", "/listen");
  }
  if (p < 0 || p > 65535) throw FormatError("port out of range in \"" + value + "\"", "/listen");
  if (!host.empty()) cfg.listen_host = host;
  cfg.listen_port = p;
}

int parse_utc_offset(const std::string& tz) {
  if (tz == "UTC" || tz == "Z" || tz == "utc") return 0;
  std::string s = tz;
  if (s.rfind("UTC", 0) == 0) s = s.substr(3);
  if (s.size() < 3 || (s[0] != '+' && s[0] != '-')) {
    throw FormatError("timezone must be UTC or an offset like +08:00 (named zones are not supported): " + tz,
                      "/timezone");
  }
  std::string digits;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i] == ':' && i == 3) continue;
    if (s[i] < '0' || s[i] > '9') throw FormatError("bad timezone offset " + tz, "/timezone");
    digits += s[i];
  }
  if (digits.size() != 2 && digits.size() != 4) throw FormatError("bad timezone offset " + tz, "/timezone");
  int hours = std::stoi(digits.substr(0, 2));
  int minutes = digits.size() == 4 ? std::stoi(digits.substr(2, 2)) : 0;
  if (hours > 14 || minutes > 59) throw FormatError("timezone offset out of range: " + tz, "/timezone");
  int total = hours * 60 + minutes;
  return s[0] == '-' ? -total : total;
}

void apply_env(ServiceConfig& cfg, const std::function<std::optional<std::string>(const char*)>& getenv) {
  auto get = [&](const char* name) -> std::optional<std::string> {
    if (getenv) return getenv(name);
    const char* v = std::getenv(name);
    if (v == nullptr) return std::nullopt;
    return std::string(v);
  };
  auto number = [](const std::string& v, const char* name) {
    try {
      std::size_t used = 0;
      auto n = std::stoull(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return n;
    } catch (const std::exception&) {
      throw FormatError(std::string(name) + " must be a non-negative integer", name);
    }
  };
  if (auto v = get("DCLAB_LISTEN")) set_listen(cfg, *v);
  if (auto v = get("DCLAB_STORE")) cfg.store_path = *v;
  if (auto v = get("DCLAB_BLOB_DIR")) cfg.blob_dir = *v;
  if (auto v = get("DCLAB_TIMEZONE")) cfg.timezone = *v;
  if (auto v = get("DCLAB_MAX_HORIZON_NS")) cfg.max_horizon_ns = number(*v, "DCLAB_MAX_HORIZON_NS");
  if (auto v = get("DCLAB_MAX_DELTAS")) {
    cfg.max_deltas_per_instant = static_cast<std::uint32_t>(number(*v, "DCLAB_MAX_DELTAS"));
  }
  if (auto v = get("DCLAB_ADMIN_NAME")) cfg.admin_name = *v;
  if (auto v = get("DCLAB_ADMIN_PASSWORD")) cfg.admin_password = *v;
  parse_utc_offset(cfg.timezone);
}

ServiceConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read config file " + path, "");
  std::stringstream ss;
  ss << in.rdbuf();
  Json doc = detail::parse_json(ss.str());
  ObjectReader r(doc, "");
  ServiceConfig cfg;
  if (const Json* v = r.optional("listen")) set_listen(cfg, detail::expect_string(*v, "/listen"));
  if (const Json* v = r.optional("store")) cfg.store_path = detail::expect_string(*v, "/store");
  if (const Json* v = r.optional("blob_dir")) cfg.blob_dir = detail::expect_string(*v, "/blob_dir");
  if (const Json* v = r.optional("timezone")) cfg.timezone = detail::expect_string(*v, "/timezone");
  if (const Json* v = r.optional("max_horizon_ns")) {
    auto n = detail::expect_integer(*v, "/max_horizon_ns");
    if (n <= 0) throw FormatError("max_horizon_ns must be positive", "/max_horizon_ns");
    cfg.max_horizon_ns = static_cast<std::uint64_t>(n);
  }
  if (const Json* v = r.optional("max_deltas_per_instant")) {
    auto n = detail::expect_integer(*v, "/max_deltas_per_instant");
    if (n <= 0) throw FormatError("max_deltas_per_instant must be positive", "/max_deltas_per_instant");
    cfg.max_deltas_per_instant = static_cast<std::uint32_t>(n);
  }
  if (const Json* v = r.optional("admin_name")) cfg.admin_name = detail::expect_string(*v, "/admin_name");
  if (const Json* v = r.optional("admin_password")) {
    cfg.admin_password = detail::expect_string(*v, "/admin_password");
  }
  r.finish();
  // Relative store and blob paths are taken relative to the config file.
  std::filesystem::path base = std::filesystem::path(path).parent_path();
  auto anchor = [&](std::string& p) {
    if (!p.empty() && p != ":memory:" && std::filesystem::path(p).is_relative()) p = (base / p).string();
  };
  anchor(cfg.store_path);
  anchor(cfg.blob_dir);
  apply_env(cfg);
  return cfg;
}

}  // namespace dclab::service
