#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

struct sqlite3;
struct sqlite3_stmt;

namespace dclab::service {

/// Prepared statement; columns are read by index.
class Stmt {
 public:
  Stmt(sqlite3* db, std::string_view sql);
  ~Stmt();
  Stmt(const Stmt&) = delete;
  Stmt& operator=(const Stmt&) = delete;

  Stmt& bind(int i, std::int64_t v);
  Stmt& bind(int i, const std::string& v);
  Stmt& bind(int i, std::nullopt_t);
  Stmt& bind(int i, const std::optional<std::int64_t>& v);
  Stmt& bind(int i, const std::optional<std::string>& v);

  /// true while a row is available.
  bool step();
  void run();

  std::int64_t integer(int col) const;
  std::string text(int col) const;
  bool is_null(int col) const;
  std::optional<std::int64_t> opt_integer(int col) const;
  std::optional<std::string> opt_text(int col) const;

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

/// SQLite database with the service schema. Submissions are protected by
/// triggers against UPDATE and DELETE.
class Store {
 public:
  explicit Store(const std::string& path);
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  void exec(std::string_view sql);
  Stmt prepare(std::string_view sql) { return Stmt(db_, sql); }
  std::int64_t last_id() const;

  /// BEGIN IMMEDIATE ... COMMIT, rolled back when the scope unwinds early.
  class Transaction {
   public:
    explicit Transaction(Store& s);
    ~Transaction();
    void commit();

   private:
    Store& store_;
    bool done_ = false;
  };

 private:
  sqlite3* db_ = nullptr;
};

/// Content-addressed artifacts (VCD, logs) keyed by SHA-256. Files under a
/// directory when one is configured, otherwise a table in the store.
class BlobStore {
 public:
  BlobStore(Store& store, std::string dir);

  /// Returns the hex digest.
  std::string put(const std::string& data);
  std::optional<std::string> get(const std::string& hash);

 private:
  Store& store_;
  std::string dir_;
};

std::string sha256_hex(std::string_view data);

}  // namespace dclab::service
