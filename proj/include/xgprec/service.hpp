#pragma once

#include <charconv>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <unordered_set>

#include <httplib.h>
#include <json.hpp>

#include "api.hpp"
#include "engine.hpp"

namespace xgprec {

struct ServiceConfig {
    std::string host = "0.0.0.0";
    int port = 8080;
    std::filesystem::path index_dir;
    std::optional<std::filesystem::path> ui_dir;
    api::Settings defaults;
};

/// JSON API over a read-only engine. Requests arriving before `set_engine` get 503.
class Service {
  public:
    explicit Service(api::Settings defaults, std::optional<std::filesystem::path> ui_dir = std::nullopt)
        : defaults_(std::move(defaults))
    {
        if (ui_dir && !server_.set_mount_point("/", ui_dir->string())) {
            throw IoError("cannot serve UI assets from " + ui_dir->string());
        }
        routes();
    }

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    void set_engine(std::shared_ptr<const Engine> engine)
    {
        auto state = std::make_shared<State>();
        state->engine = std::move(engine);
        if (defaults_.filter_path) {
            state->filter.emplace(state->engine->indexes(), load_filter(*defaults_.filter_path));
        }
        std::lock_guard lock(mutex_);
        state_ = std::move(state);
    }

    [[nodiscard]] bool ready() const
    {
        std::lock_guard lock(mutex_);
        return state_ != nullptr;
    }

    int bind_to_any_port(const std::string& host) { return server_.bind_to_any_port(host); }
    bool bind(const std::string& host, int port) { return server_.bind_to_port(host, port); }
    bool listen_after_bind() { return server_.listen_after_bind(); }
    void stop() { server_.stop(); }
    void wait_until_ready() { server_.wait_until_ready(); }

  private:
    struct State {
        std::shared_ptr<const Engine> engine;
        std::optional<DocumentFilter> filter;
    };

    struct BadRequest {
        std::string message;
    };

    std::shared_ptr<const State> state() const
    {
        std::lock_guard lock(mutex_);
        return state_;
    }

    static void reply(httplib::Response& res, int status, const nlohmann::json& body)
    {
        res.status = status;
        res.set_content(body.dump(), "application/json; charset=utf-8");
    }

    static void error(httplib::Response& res, int status, const std::string& message)
    {
        reply(res, status, {{"error", message}});
    }

    template <typename T>
    static T number(const httplib::Request& req, const std::string& key, T fallback)
    {
        if (!req.has_param(key)) {
            return fallback;
        }
        const auto text = req.get_param_value(key);
        T value{};
        if constexpr (std::is_floating_point_v<T>) {
            std::size_t used = 0;
            try {
                value = static_cast<T>(std::stod(text, &used));
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != text.size()) {
                throw BadRequest{"parameter '" + key + "' must be a number"};
            }
        } else {
            auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
            if (ec != std::errc() || ptr != text.data() + text.size()) {
                throw BadRequest{"parameter '" + key + "' must be a non-negative integer"};
            }
        }
        return value;
    }

    template <typename Handler>
    void get(const std::string& pattern, Handler handler)
    {
        server_.Get(pattern, [this, handler](const httplib::Request& req, httplib::Response& res) {
            auto s = state();
            if (!s) {
                error(res, 503, "indexes are loading");
                return;
            }
            try {
                handler(*s, req, res);
            } catch (const BadRequest& e) {
                error(res, 400, e.message);
            } catch (const UnknownDocument& e) {
                error(res, 404, e.what());
            } catch (const InvalidArgument& e) {
                error(res, 400, e.what());
            } catch (const std::exception& e) {
                error(res, 500, e.what());
            }
        });
    }

    static DocId doc_param(const std::string& text)
    {
        DocId id = 0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), id);
        if (ec != std::errc() || ptr != text.data() + text.size()) {
            throw BadRequest{"document id must be a non-negative integer"};
        }
        return id;
    }

    void routes()
    {
        get("/api/about", [this](const State&, const httplib::Request&, httplib::Response& res) {
            reply(res, 200, api::about_json(defaults_));
        });

        get("/api/recommend", [this](const State& s, const httplib::Request& req, httplib::Response& res) {
            if (!req.has_param("doc")) {
                throw BadRequest{"parameter 'doc' is required"};
            }
            const DocId doc = doc_param(req.get_param_value("doc"));
            auto config = defaults_.recommendation;
            config.top_n = number<std::size_t>(req, "top", config.top_n);
            config.w_graph = number<double>(req, "wg", config.w_graph);
            config.w_text = number<double>(req, "wt", config.w_text);
            config.first_stage.k = number<std::size_t>(req, "k", config.first_stage.k);
            if (req.has_param("strategy")) {
                config.first_stage.strategy = parse_strategy(req.get_param_value("strategy"));
            }
            if (req.has_param("cutoff")) {
                config.first_stage.cutoff = parse_cutoff(req.get_param_value("cutoff"));
            }
            const auto l = number<std::size_t>(req, "l", defaults_.l);
            if (l < 1) {
                throw BadRequest{"parameter 'l' must be at least 1"};
            }
            config.validate();
            auto rec = s.engine->recommend(doc, config, s.filter ? &*s.filter : nullptr);
            reply(res, 200, api::recommendation_json(*s.engine, rec, l));
        });

        get(R"(/api/document/([^/]+)/graph)", [](const State& s, const httplib::Request& req, httplib::Response& res) {
            const auto& d = s.engine->corpus().at(doc_param(req.matches[1]));
            const auto m = number<std::size_t>(req, "max_statements", api::default_max_statements);
            std::set<std::string> types;
            if (req.has_param("types")) {
                std::string csv = req.get_param_value("types");
                std::size_t pos = 0;
                while (pos <= csv.size()) {
                    auto comma = csv.find(',', pos);
                    auto item = csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
                    if (!item.empty()) {
                        types.insert(item);
                    }
                    if (comma == std::string::npos) {
                        break;
                    }
                    pos = comma + 1;
                }
                if (types.empty()) {
                    throw BadRequest{"parameter 'types' lists no concept type"};
                }
            }
            reply(res, 200, api::document_graph_json(*s.engine, d, m, types));
        });

        get(R"(/api/document/([^/]+))", [](const State& s, const httplib::Request& req, httplib::Response& res) {
            reply(res, 200, api::document_json(s.engine->corpus().at(doc_param(req.matches[1]))));
        });
    }

    api::Settings defaults_;
    httplib::Server server_;
    mutable std::mutex mutex_;
    std::shared_ptr<const State> state_;
};

/// Binds, loads the engine in the background and serves until stopped.
inline int serve(const ServiceConfig& config, const WarningSink& log = warn_stderr)
{
    Service service(config.defaults, config.ui_dir);
    if (!service.bind(config.host, config.port)) {
        throw IoError("cannot bind " + config.host + ":" + std::to_string(config.port));
    }
    std::jthread loader([&] {
        try {
            service.set_engine(std::make_shared<const Engine>(Engine::open(config.index_dir, log)));
            log("indexes loaded from " + config.index_dir.string());
        } catch (const std::exception& e) {
            log(std::string("failed to load indexes: ") + e.what());
            service.stop();
        }
    });
    return service.listen_after_bind() ? 0 : 1;
}

}  // namespace xgprec
