#include "swarm/net/server.hpp"

#include <chrono>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <mutex>
#include <optional>
#include <string_view>
#include <thread>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "swarm/errors.hpp"

namespace swarm::net {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using Clock = std::chrono::steady_clock;
using nlohmann::json;

namespace {

constexpr std::size_t kMaxFrameBytes = 64 * 1024;

const char* kPlaceholderPage =
    "<!doctype html><html><head><meta charset=\"utf-8\"><title>swarm</title></head>"
    "<body><p>Player client assets are not installed. Start the server with "
    "--static-dir pointing at the built web client.</p></body></html>";

std::string mime_for(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".html") return "text/html; charset=utf-8";
  if (ext == ".js") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".png") return "image/png";
  if (ext == ".svg") return "image/svg+xml";
  return "application/octet-stream";
}

}  // namespace

// Simulation loop thread: owns the Session, runs posted tasks and ticks on a
// fixed wall-clock schedule. Late ticks are taken once, never replayed.
class SimLoop {
 public:
  explicit SimLoop(SessionOptions options) : session_(std::move(options)) {}

  void start() { thread_ = std::thread([this] { run(); }); }

  void stop() {
    {
      std::lock_guard lock(mu_);
      stopping_ = true;
    }
    cv_.notify_all();
    if (thread_.joinable()) thread_.join();
  }

  void post(std::function<void(Session&)> task) {
    {
      std::lock_guard lock(mu_);
      tasks_.push_back(std::move(task));
    }
    cv_.notify_all();
  }

  template <class F>
  auto call(F&& fn) -> decltype(fn(std::declval<Session&>())) {
    using R = decltype(fn(std::declval<Session&>()));
    auto promise = std::make_shared<std::promise<R>>();
    auto future = promise->get_future();
    post([promise, fn = std::forward<F>(fn)](Session& s) mutable {
      try {
        if constexpr (std::is_void_v<R>) {
          fn(s);
          promise->set_value();
        } else {
          promise->set_value(fn(s));
        }
      } catch (...) {
        promise->set_exception(std::current_exception());
      }
    });
    return future.get();
  }

  /// Loop thread only: schedule the first tick after `delay`.
  void schedule_first_tick(std::chrono::milliseconds delay) { next_tick_ = Clock::now() + delay; }

 private:
  void run() {
    for (;;) {
      std::vector<std::function<void(Session&)>> batch;
      {
        std::unique_lock lock(mu_);
        auto ready = [&] { return stopping_ || !tasks_.empty(); };
        if (session_.running()) {
          cv_.wait_until(lock, next_tick_, ready);
        } else {
          cv_.wait(lock, ready);
        }
        if (stopping_) return;
        batch.swap(tasks_);
      }
      for (auto& task : batch) task(session_);

      if (session_.running() && Clock::now() >= next_tick_) {
        try {
          session_.tick();
        } catch (const std::exception& e) {
          std::cerr << "tick failed: " << e.what() << "\n";
        }
        const auto period = std::chrono::milliseconds(session_.tick_period_ms());
        next_tick_ += period;
        if (Clock::now() > next_tick_) next_tick_ = Clock::now() + period;
      }
    }
  }

  Session session_;
  std::thread thread_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::vector<std::function<void(Session&)>> tasks_;
  bool stopping_ = false;
  Clock::time_point next_tick_ = Clock::now();
};

// ---------------------------------------------------------------- WebSocket

constexpr const char* kTokenCookie = "swarm_token";

std::optional<std::string> cookie_value(std::string_view header, std::string_view name) {
  while (!header.empty()) {
    const auto semi = header.find(';');
    std::string_view item = header.substr(0, semi);
    header = semi == std::string_view::npos ? std::string_view{} : header.substr(semi + 1);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    const auto eq = item.find('=');
    if (eq != std::string_view::npos && item.substr(0, eq) == name && eq + 1 < item.size()) {
      return std::string(item.substr(eq + 1));
    }
  }
  return std::nullopt;
}

// A hello without a token resumes the identity stored in the cookie.
std::string with_cookie_token(std::string text, const std::string& token) {
  json doc = json::parse(text, nullptr, false);
  if (!doc.is_object() || doc.value("type", "") != "hello") return text;
  if (auto it = doc.find("token"); it != doc.end() && !it->is_null()) return text;
  doc["token"] = token;
  return doc.dump();
}

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, SimLoop& loop) : ws_(std::move(socket)), loop_(loop) {}

  void run(http::request<http::string_body> req) {
    const auto cookie = req[http::field::cookie];
    cookie_token_ = cookie_value(std::string_view(cookie.data(), cookie.size()), kTokenCookie);
    ws_.read_message_max(kMaxFrameBytes);
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    auto self = shared_from_this();
    auto executor = ws_.get_executor();
    std::weak_ptr<WsSession> weak = self;
    loop_.post([self, executor, weak](Session& s) {
      const ConnectionId id = s.open_connection();
      auto box = s.outbox(id);
      box->set_notifier([executor, weak] {
        asio::post(executor, [weak] {
          if (auto p = weak.lock()) p->flush();
        });
      });
      asio::post(executor, [self, id, box] {
        self->conn_ = id;
        self->outbox_ = box;
        self->flush();
        self->do_read();
      });
    });
  }

  void do_read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->on_read(ec);
    });
  }

  void on_read(beast::error_code ec) {
    if (ec) {
      release();
      return;
    }
    std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    if (cookie_token_) text = with_cookie_token(std::move(text), *cookie_token_);
    auto self = shared_from_this();
    auto executor = ws_.get_executor();
    const ConnectionId id = *conn_;
    loop_.post([self, executor, id, text = std::move(text)](Session& s) {
      if (!s.handle_message(id, text)) {
        asio::post(executor, [self] {
          self->close_after_flush_ = true;
          self->flush();
        });
      }
    });
    do_read();
  }

  void flush() {
    if (!outbox_ || writing_ || closed_) return;
    if (pending_.empty()) {
      for (auto& f : outbox_->drain()) pending_.push_back(std::move(f));
    }
    if (pending_.empty()) {
      if (close_after_flush_) {
        closed_ = true;
        ws_.async_close(websocket::close_code::policy_error,
                        [self = shared_from_this()](beast::error_code) { self->release(); });
      }
      return;
    }
    writing_ = true;
    ws_.text(true);
    ws_.async_write(asio::buffer(pending_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      self->writing_ = false;
                      if (ec) {
                        self->release();
                        return;
                      }
                      self->pending_.pop_front();
                      self->flush();
                    });
  }

  void release() {
    if (released_ || !conn_) return;
    released_ = true;
    closed_ = true;
    if (outbox_) outbox_->set_notifier(nullptr);
    loop_.post([id = *conn_](Session& s) { s.close_connection(id); });
  }

  websocket::stream<beast::tcp_stream> ws_;
  SimLoop& loop_;
  beast::flat_buffer buffer_;
  std::optional<ConnectionId> conn_;
  std::optional<std::string> cookie_token_;
  std::shared_ptr<Outbox> outbox_;
  std::deque<std::string> pending_;
  bool writing_ = false;
  bool close_after_flush_ = false;
  bool closed_ = false;
  bool released_ = false;
};

// ---------------------------------------------------------------- HTTP

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, SimLoop& loop, const ServerOptions& options)
      : stream_(std::move(socket)), loop_(loop), options_(options) {}

  void run() { do_read(); }

 private:
  using Response = http::response<http::string_body>;

  void do_read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
  }

  void on_read(beast::error_code ec) {
    if (ec) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    if (websocket::is_upgrade(req_)) {
      if (req_.target() == "/ws") {
        stream_.expires_never();
        std::make_shared<WsSession>(stream_.release_socket(), loop_)->run(std::move(req_));
      }
      return;
    }
    auto res = std::make_shared<Response>(handle());
    res->version(req_.version());
    res->keep_alive(req_.keep_alive());
    res->set(http::field::server, "swarm");
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
      if (ec || !res->keep_alive()) {
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
        return;
      }
      self->do_read();
    });
  }

  Response json_response(http::status status, const json& body) {
    Response res{status, req_.version()};
    res.set(http::field::content_type, "application/json");
    res.body() = body.dump();
    return res;
  }

  Response handle() {
    const std::string target(req_.target());
    const std::string path = target.substr(0, target.find('?'));
    if (path.rfind("/admin/", 0) == 0) return handle_admin(path);
    if (req_.method() == http::verb::get || req_.method() == http::verb::head) {
      return serve_static(path);
    }
    return json_response(http::status::method_not_allowed, {{"error", "method not allowed"}});
  }

  Response handle_admin(const std::string& path) {
    const std::string expected = "Bearer " + options_.admin_token;
    if (options_.admin_token.empty() || req_[http::field::authorization] != expected) {
      return json_response(http::status::unauthorized, {{"error", "missing or invalid bearer token"}});
    }
    try {
      const auto verb = req_.method();
      if (path == "/admin/instances" && verb == http::verb::post) {
        json doc = json::parse(req_.body(), nullptr, false);
        if (doc.is_discarded()) {
          return json_response(http::status::bad_request, {{"error", "body is not valid JSON"}});
        }
        json cfg = loop_.call([doc](Session& s) { return s.create_instance(doc); });
        return json_response(http::status::created,
                             {{"instance_id", cfg["instance_id"]}, {"phase", "Lobby"}, {"config", cfg}});
      }
      if (path == "/admin/players" && verb == http::verb::get) {
        return json_response(http::status::ok, loop_.call([](Session& s) { return s.players(); }));
      }
      constexpr std::string_view prefix = "/admin/instances/";
      if (path.rfind(prefix, 0) == 0) {
        std::string rest = path.substr(prefix.size());
        const auto slash = rest.find('/');
        const std::string id = rest.substr(0, slash);
        const std::string action = slash == std::string::npos ? "" : rest.substr(slash + 1);
        if (action.empty() && verb == http::verb::get) {
          return json_response(http::status::ok, loop_.call([id](Session& s) { return s.status(id); }));
        }
        if (action == "start" && verb == http::verb::post) {
          SimLoop* loop = &loop_;
          return json_response(http::status::ok, loop_.call([id, loop](Session& s) {
            s.start(id);
            loop->schedule_first_tick(std::chrono::milliseconds(s.config()->countdown_ms));
            return s.status(id);
          }));
        }
        if (action == "abort" && verb == http::verb::post) {
          return json_response(http::status::ok, loop_.call([id](Session& s) {
            s.abort(id, "admin");
            return s.status(id);
          }));
        }
      }
      return json_response(http::status::not_found, {{"error", "no such admin endpoint"}});
    } catch (const AdminError& e) {
      return json_response(static_cast<http::status>(e.status()),
                           {{"error", e.what()}, {"details", e.details()}});
    } catch (const std::exception& e) {
      return json_response(http::status::internal_server_error, {{"error", e.what()}});
    }
  }

  Response serve_static(const std::string& path) {
    Response res{http::status::ok, req_.version()};
    if (options_.static_dir.empty()) {
      if (path != "/" && path != "/index.html") {
        return json_response(http::status::not_found, {{"error", "not found"}});
      }
      res.set(http::field::content_type, "text/html; charset=utf-8");
      res.body() = kPlaceholderPage;
      return res;
    }
    const std::string rel = path == "/" ? "index.html" : path.substr(1);
    if (rel.find("..") != std::string::npos) {
      return json_response(http::status::bad_request, {{"error", "bad path"}});
    }
    const auto file = options_.static_dir / rel;
    std::ifstream in(file, std::ios::binary);
    if (!in) return json_response(http::status::not_found, {{"error", "not found"}});
    res.body().assign(std::istreambuf_iterator<char>(in), {});
    res.set(http::field::content_type, mime_for(file));
    return res;
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  SimLoop& loop_;
  const ServerOptions& options_;
};

// ---------------------------------------------------------------- server

struct LiveServer::Impl {
  explicit Impl(ServerOptions opts) : options(std::move(opts)), loop(options.session), acceptor(io) {}

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<HttpSession>(std::move(socket), loop, options)->run();
      accept();
    });
  }

  ServerOptions options;
  SimLoop loop;
  asio::io_context io{1};
  tcp::acceptor acceptor;
  std::thread io_thread;
  std::mutex stop_mu;
  std::condition_variable stop_cv;
  bool stopped = false;
};

LiveServer::LiveServer(ServerOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

LiveServer::~LiveServer() { stop(); }

void LiveServer::start() {
  const tcp::endpoint endpoint(asio::ip::make_address(impl_->options.host), impl_->options.port);
  impl_->acceptor.open(endpoint.protocol());
  impl_->acceptor.set_option(asio::socket_base::reuse_address(true));
  impl_->acceptor.bind(endpoint);
  impl_->acceptor.listen();
  impl_->loop.start();
  impl_->accept();
  impl_->io_thread = std::thread([this] { impl_->io.run(); });
}

void LiveServer::stop() {
  if (!impl_) return;
  {
    std::lock_guard lock(impl_->stop_mu);
    if (impl_->stopped) return;
    impl_->stopped = true;
  }
  impl_->stop_cv.notify_all();
  impl_->io.stop();
  if (impl_->io_thread.joinable()) impl_->io_thread.join();
  impl_->loop.stop();
}

void LiveServer::wait() {
  std::unique_lock lock(impl_->stop_mu);
  impl_->stop_cv.wait(lock, [this] { return impl_->stopped; });
}

std::uint16_t LiveServer::port() const { return impl_->acceptor.local_endpoint().port(); }

}  // namespace swarm::net
