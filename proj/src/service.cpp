#include "dprisk/service.hpp"

#include "dprisk/corpus.hpp"
#include "dprisk/error.hpp"
#include "dprisk/scoring.hpp"

#include <httplib.h>

namespace dprisk {

using json_io::ObjectReader;

namespace {

constexpr std::string_view kJsonType = "application/json; charset=utf-8";

HttpResponse json_response(int status, const Json& body)
{
    return {status, body.dump()};
}

HttpResponse error_response(int status, ErrorCode code, const std::string& detail,
                            Json extra = Json::object())
{
    Json body{{"error", std::string(error_phrase(code))},
              {"code", std::string(error_token(code))},
              {"detail", detail}};
    for (auto& [key, value] : extra.items()) {
        body[key] = value;
    }
    return json_response(status, body);
}

struct InvalidProfileRequest {
    ProfileValidation validation;
};

Json scored(const Assessment& a, const WeightProfile& profile, const DetectorProfile& detector)
{
    Json out = to_json(a);
    out["breakdown"] = to_json(a.breakdown);
    out["profile"] = profile.name;
    out["detector"] = detector.name;
    return out;
}

} // namespace

ScoringService::ScoringService(ServiceConfig config) : config_(std::move(config))
{
    if (config_.profiles.empty() || config_.detectors.empty()) {
        throw Error(ErrorCode::InvalidProfile, "service needs at least one profile and one detector");
    }
    for (const auto& p : config_.profiles) {
        if (auto v = validate_profile(p); !v.ok()) {
            throw Error(ErrorCode::InvalidProfile, "'" + p.name + "': " + v.violations.front().message);
        }
    }
}

HttpResponse ScoringService::handle(std::string_view method, std::string_view path,
                                    std::string_view body) const
{
    const bool get = method == "GET";
    const bool post = method == "POST";
    try {
        if (path == "/api/health") {
            return get ? json_response(200, {{"status", "ok"}})
                       : error_response(405, ErrorCode::InvalidValue, "use GET");
        }
        if (path == "/api/taxonomy") {
            return get ? json_response(200, to_json(config_.taxonomy))
                       : error_response(405, ErrorCode::InvalidValue, "use GET");
        }
        if (path == "/api/profiles") {
            if (!get) return error_response(405, ErrorCode::InvalidValue, "use GET");
            Json list = Json::array();
            for (const auto& p : config_.profiles) {
                list.push_back(to_json(p));
            }
            return json_response(200, {{"profiles", std::move(list)}});
        }
        if (path == "/api/detectors") {
            if (!get) return error_response(405, ErrorCode::InvalidValue, "use GET");
            Json list = Json::array();
            for (const auto& d : config_.detectors) {
                list.push_back(to_json(d));
            }
            return json_response(200, {{"detectors", std::move(list)}});
        }
        if (path == "/api/score" || path == "/api/compare") {
            if (!post) return error_response(405, ErrorCode::InvalidValue, "use POST");
            Json request;
            try {
                request = json_io::parse(body, "request");
            } catch (const Error& e) {
                return error_response(400, e.code(), e.detail());
            }
            return path == "/api/score" ? score(request) : compare(request);
        }
        return error_response(404, ErrorCode::InvalidValue, "no route " + std::string(path));
    } catch (const InvalidProfileRequest& bad) {
        Json violations = Json::array();
        for (const auto& v : bad.validation.violations) {
            violations.push_back({{"code", v.code}, {"message", v.message}});
        }
        return error_response(422, ErrorCode::InvalidProfile, "inline profile fails validation",
                              {{"violations", std::move(violations)}});
    } catch (const Error& e) {
        return error_response(is_input_error(e.code()) ? 422 : 500, e.code(), e.detail());
    } catch (const std::exception& e) {
        return error_response(500, ErrorCode::Internal, e.what());
    }
}

namespace {

struct ScoreInputs {
    CaseRecord record;
    WeightProfile profile;
    DetectorProfile detector;
};

ScoreInputs decode_request(const Json& request, const ServiceConfig& config, bool with_mode)
{
    ObjectReader root(request, "request");
    if (with_mode) {
        root.allow_only({"case", "mode", "profile", "detector"});
    } else {
        root.allow_only({"case", "profile", "detector"});
    }
    ScoreInputs in;
    in.record = case_from_json(root.required("case"), {.require_id = false,
                                                       .require_descriptive_fields = false});
    validate_case(in.record, config.taxonomy);

    in.profile = config.profiles.front();
    if (root.has("profile")) {
        const Json& p = root.required("profile");
        if (p.is_string()) {
            auto it = std::find_if(config.profiles.begin(), config.profiles.end(),
                                   [&](const WeightProfile& w) { return w.name == p.get<std::string>(); });
            if (it == config.profiles.end()) {
                throw Error(ErrorCode::InvalidProfile, "no loaded profile '" + p.get<std::string>() + "'");
            }
            in.profile = *it;
        } else {
            in.profile = profile_from_json(p);
            if (auto v = validate_profile(in.profile); !v.ok()) {
                throw InvalidProfileRequest{std::move(v)};
            }
        }
    }

    in.detector = config.detectors.front();
    if (root.has("detector")) {
        const Json& d = root.required("detector");
        if (d.is_string()) {
            auto it = std::find_if(config.detectors.begin(), config.detectors.end(),
                                   [&](const DetectorProfile& x) { return x.name == d.get<std::string>(); });
            if (it == config.detectors.end()) {
                throw Error(ErrorCode::InvalidValue, "no loaded detector '" + d.get<std::string>() + "'");
            }
            in.detector = *it;
        } else {
            in.detector = detector_from_json(d);
        }
    }
    return in;
}

} // namespace

HttpResponse ScoringService::score(const Json& request) const
{
    const ScoreInputs in = decode_request(request, config_, true);
    AssessmentMode mode = AssessmentMode::WithChallenger;
    if (auto token = ObjectReader(request, "request").optional_string("mode")) {
        mode = mode_from_token(*token);
    }
    const Assessment a = assess_case(in.record, config_.taxonomy, in.profile, in.detector, mode);
    return json_response(200, scored(a, in.profile, in.detector));
}

HttpResponse ScoringService::compare(const Json& request) const
{
    const ScoreInputs in = decode_request(request, config_, false);
    const ModeComparison cmp = compare_modes(in.record, config_.taxonomy, in.profile, in.detector);
    return json_response(200, {{"with", scored(cmp.with_challenger, in.profile, in.detector)},
                               {"baseline", scored(cmp.baseline, in.profile, in.detector)},
                               {"delta", round2(cmp.delta)},
                               {"delta_exact", cmp.delta}});
}

struct HttpServer::Impl {
    httplib::Server server;
};

HttpServer::HttpServer(const ScoringService& service) : impl_(std::make_unique<Impl>())
{
    auto route = [&service](const httplib::Request& req, httplib::Response& res) {
        const HttpResponse out = service.handle(req.method, req.path, req.body);
        res.status = out.status;
        res.set_content(out.body, std::string(kJsonType));
    };
    impl_->server.Get(R"(/api/.*)", route);
    impl_->server.Post(R"(/api/.*)", route);
    impl_->server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.status = 204;
    });
    // Without SO_REUSEPORT a second server on a live port fails to bind.
    impl_->server.set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof yes);
    });
    impl_->server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                       {"Access-Control-Allow-Headers", "Content-Type"},
                                       {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
}

HttpServer::~HttpServer()
{
    stop();
}

bool HttpServer::bind(const std::string& host, int port)
{
    if (port == 0) {
        port_ = impl_->server.bind_to_any_port(host);
        return port_ > 0;
    }
    if (!impl_->server.bind_to_port(host, port)) {
        return false;
    }
    port_ = port;
    return true;
}

void HttpServer::listen()
{
    impl_->server.listen_after_bind();
}

void HttpServer::stop()
{
    if (impl_) {
        impl_->server.stop();
    }
}

} // namespace dprisk
