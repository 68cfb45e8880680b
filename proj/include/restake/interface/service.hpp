#pragma once

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>

#include "restake/core/error.hpp"
#include "restake/core/io.hpp"
#include "restake/flowgraph.hpp"
#include "restake/interface/analysis.hpp"
#include "restake/pipeline/fetch.hpp"
#include "restake/stress.hpp"

namespace restake::interface {

enum class ApiCode { BadRequest, NotFound, EngineError };

inline const char* to_string(ApiCode c) {
  switch (c) {
    case ApiCode::BadRequest: return "BadRequest";
    case ApiCode::NotFound: return "NotFound";
    case ApiCode::EngineError: return "EngineError";
  }
  return "EngineError";
}

struct ApiError {
  ApiCode code = ApiCode::EngineError;
  std::string message;
  std::string detail;

  int status() const {
    switch (code) {
      case ApiCode::BadRequest: return 400;
      case ApiCode::NotFound: return 404;
      case ApiCode::EngineError: return 500;
    }
    return 500;
  }
};

inline nlohmann::ordered_json to_json(const ApiError& e) {
  return {{"error", {{"code", to_string(e.code)}, {"message", e.message}, {"detail", e.detail}}}};
}

using QueryParams = std::multimap<std::string, std::string>;

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

struct ServiceConfig {
  flow::FlowGraph graph;
  stress::ScenarioConfig scenario_defaults;
  std::filesystem::path ui_dir;
  /// Worker threads for the HTTP listener and the compute gate.
  unsigned workers = 4;
  std::chrono::milliseconds request_timeout{60000};
  int max_trees = 2000;
  int max_sweep_steps = 2001;
  std::size_t max_body_bytes = 32u << 20;
};

/// Translates an exception into the error body; only the message crosses the wire.
inline ApiError api_error_from(std::exception_ptr ep) {
  try {
    std::rethrow_exception(ep);
  } catch (const nlohmann::json::exception& ex) {
    return {ApiCode::BadRequest, "malformed JSON body", ex.what()};
  } catch (const ValidationError& ex) {
    return {ApiCode::BadRequest, ex.what(), "ValidationError"};
  } catch (const DataError& ex) {
    return {ApiCode::BadRequest, ex.what(), "DataError"};
  } catch (const InsufficientDataError& ex) {
    return {ApiCode::BadRequest, ex.what(), "InsufficientDataError"};
  } catch (const DegenerateInputError& ex) {
    return {ApiCode::BadRequest, ex.what(), "DegenerateInputError"};
  } catch (const SingularDesignError& ex) {
    std::string cols;
    for (const auto& c : ex.columns()) cols += (cols.empty() ? "" : ", ") + c;
    return {ApiCode::BadRequest, ex.what(), "SingularDesignError: " + cols};
  } catch (const UndefinedRatioError& ex) {
    return {ApiCode::BadRequest, ex.what(), "UndefinedRatioError"};
  } catch (const Error& ex) {
    return {ApiCode::EngineError, ex.what(), "EngineError"};
  } catch (const std::exception& ex) {
    return {ApiCode::EngineError, "internal error", ex.what()};
  } catch (...) {
    return {ApiCode::EngineError, "internal error", ""};
  }
}

namespace detail {

inline std::optional<std::string> query_value(const QueryParams& q, const std::string& key) {
  auto it = q.find(key);
  if (it == q.end()) return std::nullopt;
  return it->second;
}

inline double query_double(const QueryParams& q, const std::string& key, double fallback) {
  auto v = query_value(q, key);
  return v ? parse_double(*v, key) : fallback;
}

inline int query_int(const QueryParams& q, const std::string& key, int fallback) {
  auto v = query_value(q, key);
  if (!v) return fallback;
  const double d = parse_double(*v, key);
  if (d != static_cast<int>(d)) throw ValidationError(key + " must be an integer");
  return static_cast<int>(d);
}

inline nlohmann::json parse_body(const std::string& body) {
  if (body.empty()) throw ValidationError("request body is empty");
  auto j = nlohmann::json::parse(body);
  if (!j.is_object()) throw ValidationError("request body must be a JSON object");
  return j;
}

inline LoadedFrame frame_from_body(const nlohmann::json& j) {
  const bool has_panel = j.contains("panel_csv");
  const bool has_frame = j.contains("frame_csv");
  if (has_panel == has_frame) throw ValidationError("send exactly one of panel_csv or frame_csv");
  const std::string text = j.at(has_panel ? "panel_csv" : "frame_csv").get<std::string>();
  if (has_frame && !is_feature_frame_csv(text)) throw ValidationError("frame_csv lacks the feature-frame header");
  return load_frame_text(text, has_panel ? "panel_csv" : "frame_csv", j.value("ffill", false));
}

inline nlohmann::ordered_json scenario_json_merged(const stress::ScenarioConfig& defaults, const nlohmann::json& body) {
  auto merged = nlohmann::json::parse(stress::to_json(defaults).dump());
  for (const auto& [k, v] : body.items()) {
    if (!merged.contains(k)) throw ValidationError("unknown scenario field '" + k + "'");
    merged[k] = v;
  }
  return nlohmann::ordered_json::parse(merged.dump());
}

}  // namespace detail

/// Pure request -> response mapping over immutable state.
class Router {
 public:
  explicit Router(ServiceConfig cfg) : cfg_(std::move(cfg)) {}

  const ServiceConfig& config() const noexcept { return cfg_; }

  ApiResponse handle(const std::string& method, const std::string& path, const QueryParams& query,
                     const std::string& body) const {
    try {
      if (body.size() > cfg_.max_body_bytes) throw ValidationError("request body too large");
      if (method == "GET") {
        if (path == "/api/health") return ok({{"status", "ok"}});
        if (path == "/api/graph") return ok(flow::to_json(cfg_.graph));
        if (path == "/api/graph/metrics") return ok(metrics());
        if (path == "/api/stress/sweep") return ok(sweep(query));
      } else if (method == "POST") {
        if (path == "/api/stress/run") return ok(stress_run(body));
        if (path == "/api/regress") return ok(regress(body));
        if (path == "/api/granger") return ok(granger(body));
        if (path == "/api/importance") return ok(importance(body));
      }
      return error({ApiCode::NotFound, "no route for " + method + " " + path, ""});
    } catch (...) {
      return error(api_error_from(std::current_exception()));
    }
  }

  static ApiResponse error(const ApiError& e) { return {e.status(), to_json(e).dump(), "application/json"}; }

 private:
  static ApiResponse ok(const nlohmann::ordered_json& j) { return {200, j.dump(), "application/json"}; }

  nlohmann::ordered_json metrics() const {
    auto j = flow::to_json(flow::compute_metrics(cfg_.graph));
    j["snapshot_date"] = cfg_.graph.snapshot_date() ? nlohmann::ordered_json(cfg_.graph.snapshot_date()->iso())
                                                     : nlohmann::ordered_json(nullptr);
    j["scenario_defaults"] = stress::to_json(cfg_.scenario_defaults);
    return j;
  }

  nlohmann::ordered_json stress_run(const std::string& body) const {
    const auto config = stress::scenario_from_json(detail::scenario_json_merged(cfg_.scenario_defaults, detail::parse_body(body)));
    return stress::to_json(stress::run_scenario(cfg_.graph, config));
  }

  nlohmann::ordered_json sweep(const QueryParams& q) const {
    stress::ScenarioConfig c = cfg_.scenario_defaults;
    c.params.ltv = detail::query_double(q, "ltv", c.params.ltv);
    c.params.lt = detail::query_double(q, "lt", c.params.lt);
    c.depeg = 0;
    c.validate();
    const int steps = detail::query_int(q, "steps", 101);
    if (steps > cfg_.max_sweep_steps)
      throw ValidationError("steps must be <= " + std::to_string(cfg_.max_sweep_steps));
    return to_json(run_sweep(c, detail::query_double(q, "from", 0.0), detail::query_double(q, "to", 0.10), steps));
  }

  nlohmann::ordered_json regress(const std::string& body) const {
    const auto j = detail::parse_body(body);
    const auto loaded = detail::frame_from_body(j);
    RegressionOptions opt;
    if (j.contains("models")) {
      const auto& m = j.at("models");
      if (m.is_string()) {
        opt.models = parse_models(m.get<std::string>());
      } else {
        opt.models = m.get<std::vector<int>>();
      }
    }
    opt.robust = j.value("robust", false);
    opt.winsor_lower = j.value("winsor_lower", opt.winsor_lower);
    opt.winsor_upper = j.value("winsor_upper", opt.winsor_upper);
    if (j.contains("chow_break")) opt.chow_break = Date::parse(j.at("chow_break").get<std::string>());
    auto out = to_json(run_regression(loaded.frame, opt));
    out["rows"] = loaded.frame.rows();
    return out;
  }

  nlohmann::ordered_json granger(const std::string& body) const {
    const auto j = detail::parse_body(body);
    const auto loaded = detail::frame_from_body(j);
    GrangerOptions opt;
    if (j.contains("cause")) {
      const auto& c = j.at("cause");
      opt.causes = c.is_string() ? std::vector<std::string>{c.get<std::string>()} : c.get<std::vector<std::string>>();
    }
    opt.effect = j.value("effect", opt.effect);
    opt.max_lag = j.value("max_lag", opt.max_lag);
    return to_json(run_granger(loaded.frame, opt));
  }

  nlohmann::ordered_json importance(const std::string& body) const {
    const auto j = detail::parse_body(body);
    const auto loaded = detail::frame_from_body(j);
    ImportanceOptions opt;
    opt.config.n_trees = j.value("n_trees", opt.config.n_trees);
    if (opt.config.n_trees > cfg_.max_trees)
      throw ValidationError("n_trees must be <= " + std::to_string(cfg_.max_trees));
    if (j.contains("max_features"))
      opt.config.max_features = forest::parse_max_features(j.at("max_features").get<std::string>());
    opt.config.min_leaf = j.value("min_leaf", opt.config.min_leaf);
    opt.config.seed = j.value("seed", std::uint64_t{0});
    opt.config.threads = 1;
    opt.config.validate();
    opt.repeats = j.value("repeats", opt.repeats);
    opt.include_events = j.value("include_events", false);
    return forest::to_json(run_importance(loaded.frame, opt));
  }

  ServiceConfig cfg_;
};

/// "host:port"; a bare port binds to 127.0.0.1.
inline std::pair<std::string, int> parse_bind(const std::string& bind) {
  const auto colon = bind.rfind(':');
  const std::string host = colon == std::string::npos ? "127.0.0.1" : bind.substr(0, colon);
  const std::string port = colon == std::string::npos ? bind : bind.substr(colon + 1);
  const double p = parse_double(port, "bind port");
  if (p != static_cast<int>(p) || p < 0 || p > 65535) throw ValidationError("bind port out of range: '" + port + "'");
  return {host.empty() ? "127.0.0.1" : host, static_cast<int>(p)};
}

inline std::string default_bind() {
  if (const char* env = std::getenv("RESTAKE_BIND"); env && *env) return env;
  return "127.0.0.1:8080";
}

/// Runs the router behind httplib with a bounded pool and a per-request
/// compute deadline. Requests past the deadline get a 500 EngineError.
class Service {
 public:
  explicit Service(ServiceConfig cfg) : router_(std::make_shared<Router>(std::move(cfg))) {
    const auto& c = router_->config();
    const unsigned workers = std::max(1u, c.workers);
    server_.new_task_queue = [workers] { return new httplib::ThreadPool(workers); };
    server_.set_read_timeout(std::chrono::seconds(30));
    server_.set_write_timeout(std::chrono::seconds(30));
    server_.set_payload_max_length(c.max_body_bytes);
    gate_ = std::make_shared<Gate>(workers);
    if (!c.ui_dir.empty()) {
      if (!std::filesystem::is_directory(c.ui_dir))
        throw ValidationError("UI directory '" + c.ui_dir.string() + "' does not exist");
      server_.set_mount_point("/", c.ui_dir.string());
    }
    auto route = [this](const httplib::Request& req, httplib::Response& res) {
      QueryParams q(req.params.begin(), req.params.end());
      const auto r = dispatch(req.method, req.path, q, req.body);
      res.status = r.status;
      res.set_content(r.body, r.content_type);
    };
    server_.Get(R"(/api/.*)", route);
    server_.Post(R"(/api/.*)", route);
    server_.Put(R"(/api/.*)", route);
    server_.Delete(R"(/api/.*)", route);
  }

  const Router& router() const { return *router_; }

  /// Binds; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port) {
    const int bound = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
    return bound;
  }

  void listen() { server_.listen_after_bind(); }
  void stop() { server_.stop(); }
  void wait_until_ready() { server_.wait_until_ready(); }

 private:
  struct Gate {
    explicit Gate(unsigned n) : free(n) {}
    std::mutex m;
    std::condition_variable cv;
    unsigned free;
  };

  ApiResponse dispatch(const std::string& method, const std::string& path, const QueryParams& q,
                       const std::string& body) {
    const auto timeout = router_->config().request_timeout;
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    auto timed_out = [&] {
      return Router::error({ApiCode::EngineError,
                            "request exceeded the " + std::to_string(timeout.count()) + " ms compute limit", ""});
    };
    {
      std::unique_lock lock(gate_->m);
      if (!gate_->cv.wait_until(lock, deadline, [&] { return gate_->free > 0; })) return timed_out();
      --gate_->free;
    }
    struct Slot {
      std::mutex m;
      std::condition_variable cv;
      std::optional<ApiResponse> response;
    };
    auto slot = std::make_shared<Slot>();
    std::thread([router = router_, gate = gate_, slot, method, path, q, body] {
      auto r = router->handle(method, path, q, body);
      {
        std::lock_guard lock(slot->m);
        slot->response = std::move(r);
      }
      slot->cv.notify_all();
      {
        std::lock_guard lock(gate->m);
        ++gate->free;
      }
      gate->cv.notify_one();
    }).detach();
    std::unique_lock lock(slot->m);
    if (!slot->cv.wait_until(lock, deadline, [&] { return slot->response.has_value(); })) return timed_out();
    return *slot->response;
  }

  std::shared_ptr<Router> router_;
  std::shared_ptr<Gate> gate_;
  httplib::Server server_;
};

}  // namespace restake::interface
