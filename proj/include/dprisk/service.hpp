#pragma once

// Local HTTP scoring service backing the assessor UI.
//
//   GET  /api/health     {"status":"ok"}
//   GET  /api/taxonomy   loaded taxonomy
//   GET  /api/profiles   {"profiles":[...]}
//   GET  /api/detectors  {"detectors":[...]}
//   POST /api/score      {case, mode?, profile?, detector?} -> one assessment
//   POST /api/compare    {case, profile?, detector?}        -> both modes + delta
//
// `profile` / `detector` in a request are either the name of a loaded entry
// or an inline object; inline profiles must pass validation. Input problems
// answer 422 with {"error": phrase, "code": token, "detail": text}.

#include "dprisk/json_io.hpp"
#include "dprisk/model.hpp"

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace dprisk {

struct ServiceConfig {
    Taxonomy taxonomy;
    std::vector<WeightProfile> profiles;    // first entry is the default
    std::vector<DetectorProfile> detectors; // first entry is the default
};

struct HttpResponse {
    int status = 200;
    std::string body;
};

class ScoringService {
public:
    /// Throws InvalidProfile if a profile fails validation or a list is empty.
    explicit ScoringService(ServiceConfig config);

    HttpResponse handle(std::string_view method, std::string_view path,
                        std::string_view body) const;

    const ServiceConfig& config() const noexcept { return config_; }

private:
    HttpResponse score(const Json& request) const;
    HttpResponse compare(const Json& request) const;

    ServiceConfig config_;
};

/// Blocking-free wrapper around the socket server.
class HttpServer {
public:
    explicit HttpServer(const ScoringService& service);
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds; port 0 picks a free port. Returns false if the address is taken.
    bool bind(const std::string& host, int port);
    int port() const noexcept { return port_; }

    /// Serves until stop(); call from a dedicated thread or the main thread.
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int port_ = 0;
};

} // namespace dprisk
