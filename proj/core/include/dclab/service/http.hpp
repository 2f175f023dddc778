#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>

#include "dclab/service/service.hpp"

namespace dclab::service {

struct HttpRequest {
  std::string method;  // GET, POST, PUT
  std::string path;    // without the query string
  std::string authorization;  // raw Authorization header
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// Maps API requests onto a Service. Independent of any socket library so
/// tests can drive it directly. Every failure is answered with
/// {"code", "message"}.
class Router {
 public:
  explicit Router(Service& service) : service_(service) {}

  HttpResponse handle(const HttpRequest& req);

 private:
  Service& service_;
};

/// Binds the router to a listening socket (cpp-httplib).
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  /// Binds host:port (port 0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// --- wire format -----------------------------------------------------------------

std::string user_json(const User& u);
std::string project_json(const Project& p);
std::string submission_json(const Submission& s);
std::string stats_json(const CohortStats& s);
std::string home_json(const HomeView& h);
std::string simulation_json(const SimulationView& v);

}  // namespace dclab::service
