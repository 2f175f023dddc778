#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace dclab::service {

struct ServiceConfig {
  std::string listen_host = "127.0.0.1";
  int listen_port = 8080;
  std::string store_path = "dclab.db";  // ":memory:" for a throwaway store
  std::string blob_dir;                 // empty: blobs live in the store
  std::string timezone = "UTC";         // "UTC" or a fixed offset such as "+08:00"
  std::uint64_t max_horizon_ns = 10'000'000'000;
  std::uint32_t max_deltas_per_instant = 1000;
  std::string admin_name;               // created on first start when the store has no users
  std::string admin_password;
};

/// Reads a JSON config file (keys: listen, store, blob_dir, timezone,
/// max_horizon_ns, max_deltas_per_instant, admin_name, admin_password) and
/// applies environment overrides. Throws FormatError.
ServiceConfig load_config(const std::string& path);

/// DCLAB_LISTEN, DCLAB_STORE, DCLAB_BLOB_DIR, DCLAB_TIMEZONE,
/// DCLAB_MAX_HORIZON_NS, DCLAB_MAX_DELTAS, DCLAB_ADMIN_NAME,
/// DCLAB_ADMIN_PASSWORD. `getenv` is injectable for tests.
void apply_env(ServiceConfig& cfg,
               const std::function<std::optional<std::string>(const char*)>& getenv = {});

/// "host:port" or ":port".
void set_listen(ServiceConfig& cfg, const std::string& value);

/// Minutes east of UTC for "UTC", "Z", "+08:00", "-0530". IANA zone names are
/// not supported. Throws FormatError.
int parse_utc_offset(const std::string& tz);

}  // namespace dclab::service
