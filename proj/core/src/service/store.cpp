#include "store.hpp"

#include <sqlite3.h>

#include <array>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "dclab/error.hpp"

namespace dclab::service {

namespace fs = std::filesystem;

namespace {

const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS users (
  id INTEGER PRIMARY KEY,
  name TEXT NOT NULL UNIQUE,
  role TEXT NOT NULL,
  salt TEXT NOT NULL,
  pw_hash TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS sessions (
  token_hash TEXT PRIMARY KEY,
  user_id INTEGER NOT NULL REFERENCES users(id),
  created_at INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS assignments (
  id INTEGER PRIMARY KEY,
  title TEXT NOT NULL,
  author INTEGER NOT NULL REFERENCES users(id),
  reference_project INTEGER NOT NULL,
  reference_design TEXT NOT NULL,
  test_points TEXT NOT NULL,
  required_repr TEXT NOT NULL,
  deadline INTEGER NOT NULL,
  posted_at INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS roster (
  assignment_id INTEGER NOT NULL REFERENCES assignments(id),
  student_id INTEGER NOT NULL REFERENCES users(id),
  PRIMARY KEY (assignment_id, student_id)
);
CREATE TABLE IF NOT EXISTS projects (
  id INTEGER PRIMARY KEY,
  owner INTEGER NOT NULL REFERENCES users(id),
  col TEXT NOT NULL,
  repr TEXT NOT NULL,
  title TEXT NOT NULL,
  design TEXT NOT NULL,
  stimulus TEXT NOT NULL,
  created_at INTEGER NOT NULL,
  updated_at INTEGER NOT NULL,
  assignment_id INTEGER REFERENCES assignments(id),
  visible INTEGER NOT NULL DEFAULT 0
);
CREATE INDEX IF NOT EXISTS projects_by_assignment ON projects(assignment_id);
CREATE TABLE IF NOT EXISTS submissions (
  id INTEGER PRIMARY KEY,
  project_id INTEGER NOT NULL REFERENCES projects(id),
  submitter INTEGER NOT NULL REFERENCES users(id),
  submitted_at INTEGER NOT NULL,
  design TEXT NOT NULL,
  status TEXT NOT NULL,
  score INTEGER,
  report TEXT,
  trace_blob TEXT,
  log_blob TEXT NOT NULL
);
CREATE INDEX IF NOT EXISTS submissions_by_project ON submissions(project_id, submitted_at, id);
CREATE TRIGGER IF NOT EXISTS submissions_immutable BEFORE UPDATE ON submissions
BEGIN SELECT RAISE(ABORT, 'submissions are immutable'); END;
CREATE TRIGGER IF NOT EXISTS submissions_permanent BEFORE DELETE ON submissions
BEGIN SELECT RAISE(ABORT, 'submissions are immutable'); END;
CREATE TABLE IF NOT EXISTS notices (
  id INTEGER PRIMARY KEY,
  author INTEGER NOT NULL REFERENCES users(id),
  title TEXT NOT NULL,
  body TEXT NOT NULL,
  posted_at INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS blobs (
  hash TEXT PRIMARY KEY,
  data BLOB NOT NULL
);
)sql";

[[noreturn]] void fail(sqlite3* db, const std::string& what) {
  throw Error("store: " + what + ": " + (db != nullptr ? sqlite3_errmsg(db) : "out of memory"));
}

}  // namespace

Stmt::Stmt(sqlite3* db, std::string_view sql) : db_(db) {
  if (sqlite3_prepare_v2(db, sql.data(), static_cast<int>(sql.size()), &stmt_, nullptr) != SQLITE_OK) {
    fail(db, "prepare");
  }
}

Stmt::~Stmt() { sqlite3_finalize(stmt_); }

Stmt& Stmt::bind(int i, std::int64_t v) {
  sqlite3_bind_int64(stmt_, i, v);
  return *this;
}

Stmt& Stmt::bind(int i, const std::string& v) {
  sqlite3_bind_text(stmt_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
  return *this;
}

Stmt& Stmt::bind(int i, std::nullopt_t) {
  sqlite3_bind_null(stmt_, i);
  return *this;
}

Stmt& Stmt::bind(int i, const std::optional<std::int64_t>& v) { return v ? bind(i, *v) : bind(i, std::nullopt); }

Stmt& Stmt::bind(int i, const std::optional<std::string>& v) { return v ? bind(i, *v) : bind(i, std::nullopt); }

bool Stmt::step() {
  int rc = sqlite3_step(stmt_);
  if (rc == SQLITE_ROW) return true;
  if (rc == SQLITE_DONE) return false;
  fail(db_, "step");
}

void Stmt::run() {
  while (step()) {
  }
}

std::int64_t Stmt::integer(int col) const { return sqlite3_column_int64(stmt_, col); }

std::string Stmt::text(int col) const {
  const auto* p = sqlite3_column_text(stmt_, col);
  int n = sqlite3_column_bytes(stmt_, col);
  return p == nullptr ? std::string() : std::string(reinterpret_cast<const char*>(p), static_cast<std::size_t>(n));
}

bool Stmt::is_null(int col) const { return sqlite3_column_type(stmt_, col) == SQLITE_NULL; }

std::optional<std::int64_t> Stmt::opt_integer(int col) const {
  if (is_null(col)) return std::nullopt;
  return integer(col);
}

std::optional<std::string> Stmt::opt_text(int col) const {
  if (is_null(col)) return std::nullopt;
  return text(col);
}

Store::Store(const std::string& path) {
  if (sqlite3_open_v2(path.c_str(), &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                      nullptr) != SQLITE_OK) {
    std::string msg = db_ != nullptr ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    throw Error("store: cannot open " + path + ": " + msg);
  }
  sqlite3_busy_timeout(db_, 5000);
  exec("PRAGMA foreign_keys = ON;");
  if (path != ":memory:") exec("PRAGMA journal_mode = WAL;");
  exec(kSchema);
}

Store::~Store() { sqlite3_close(db_); }

void Store::exec(std::string_view sql) {
  char* err = nullptr;
  if (sqlite3_exec(db_, std::string(sql).c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err != nullptr ? err : "unknown error";
    sqlite3_free(err);
    throw Error("store: " + msg);
  }
}

std::int64_t Store::last_id() const { return sqlite3_last_insert_rowid(db_); }

Store::Transaction::Transaction(Store& s) : store_(s) { store_.exec("BEGIN IMMEDIATE;"); }

Store::Transaction::~Transaction() {
  if (!done_) {
    try {
      store_.exec("ROLLBACK;");
    } catch (...) {
    }
  }
}

void Store::Transaction::commit() {
  store_.exec("COMMIT;");
  done_ = true;
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

BlobStore::BlobStore(Store& store, std::string dir) : store_(store), dir_(std::move(dir)) {
  if (!dir_.empty()) fs::create_directories(dir_);
}

std::string BlobStore::put(const std::string& data) {
  std::string hash = sha256_hex(data);
  if (dir_.empty()) {
    store_.prepare("INSERT OR IGNORE INTO blobs(hash, data) VALUES (?, ?)").bind(1, hash).bind(2, data).run();
    return hash;
  }
  fs::path final_path = fs::path(dir_) / hash.substr(0, 2) / hash;
  if (fs::exists(final_path)) return hash;
  fs::create_directories(final_path.parent_path());
  fs::path tmp = final_path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error("blob store: cannot write " + tmp.string());
  }
  fs::rename(tmp, final_path);
  return hash;
}

std::optional<std::string> BlobStore::get(const std::string& hash) {
  if (dir_.empty()) {
    Stmt s = store_.prepare("SELECT data FROM blobs WHERE hash = ?");
    s.bind(1, hash);
    if (!s.step()) return std::nullopt;
    return s.text(0);
  }
  if (hash.size() < 2 || hash.find_first_not_of("0123456789abcdef") != std::string::npos) return std::nullopt;
  std::ifstream in(fs::path(dir_) / hash.substr(0, 2) / hash, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace dclab::service
