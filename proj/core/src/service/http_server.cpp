#include <httplib.h>

#include "dclab/service/http.hpp"

namespace dclab::service {

struct HttpServer::Impl {
  explicit Impl(Service& s) : router(s) {}

  Router router;
  httplib::Server server;
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {
  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    HttpRequest r{req.method, req.path, req.get_header_value("Authorization"), req.body};
    HttpResponse out = impl_->router.handle(r);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  const char* pattern = R"(/api/.*)";
  impl_->server.Get(pattern, forward);
  impl_->server.Post(pattern, forward);
  impl_->server.Put(pattern, forward);
  impl_->server.Delete(pattern, forward);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error("cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) throw Error("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace dclab::service
