#pragma once

// Framed request/response protocol for out-of-process predictors. All
// integers are big-endian.
//
//   request   "P2PR" | 0x01 | u16 width | u16 height | width*height bytes (0/100/255)
//   response  "P2PR" | 0x02 | u16 width | u16 height | width*height bytes (0..255)
//   error     "P2PR" | 0xFF | u16 length | UTF-8 message

#include <atomic>
#include <cerrno>
#include <cstdint>
#include <cstring>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include "fpx/error.hpp"

namespace fpx::protocol {

inline constexpr std::uint8_t kMagic[4] = {'P', '2', 'P', 'R'};
inline constexpr std::size_t kHeaderSize = 9;  // magic + type + two u16

enum class MessageType : std::uint8_t { Request = 0x01, Response = 0x02, Error = 0xFF };

struct Frame {
    MessageType type = MessageType::Request;
    std::uint16_t width = 0;
    std::uint16_t height = 0;
    std::vector<std::uint8_t> payload;  // image bytes, or the message for errors

    std::string message() const { return {payload.begin(), payload.end()}; }
    friend bool operator==(const Frame&, const Frame&) = default;
};

namespace detail {

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

inline std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint16_t>((b[at] << 8) | b[at + 1]);
}

}  // namespace detail

inline std::vector<std::uint8_t> encode(const Frame& f) {
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    out.push_back(static_cast<std::uint8_t>(f.type));
    if (f.type == MessageType::Error) {
        if (f.payload.size() > 0xFFFF) throw ProtocolError("error message too long");
        detail::put_u16(out, static_cast<std::uint16_t>(f.payload.size()));
    } else {
        if (f.payload.size() != static_cast<std::size_t>(f.width) * f.height)
            throw ProtocolError("payload length does not match width*height");
        detail::put_u16(out, f.width);
        detail::put_u16(out, f.height);
    }
    out.insert(out.end(), f.payload.begin(), f.payload.end());
    return out;
}

inline Frame make_request(std::uint16_t w, std::uint16_t h, std::vector<std::uint8_t> bytes) {
    return {MessageType::Request, w, h, std::move(bytes)};
}
inline Frame make_response(std::uint16_t w, std::uint16_t h, std::vector<std::uint8_t> bytes) {
    return {MessageType::Response, w, h, std::move(bytes)};
}
inline Frame make_error(const std::string& msg) {
    return {MessageType::Error, 0, 0, std::vector<std::uint8_t>(msg.begin(), msg.end())};
}

// Bytes still needed before the frame starting at buf[0] is complete, 0 if it
// is complete. Throws ProtocolError for a bad magic or unknown type.
inline std::size_t missing_bytes(std::span<const std::uint8_t> buf) {
    const std::size_t have_magic = std::min<std::size_t>(buf.size(), 4);
    if (std::memcmp(buf.data(), kMagic, have_magic) != 0) throw ProtocolError("bad magic");
    if (buf.size() < 5) return 5 - buf.size();
    const auto type = static_cast<MessageType>(buf[4]);
    const std::size_t header = type == MessageType::Error ? 7 : kHeaderSize;
    if (type != MessageType::Request && type != MessageType::Response && type != MessageType::Error)
        throw ProtocolError("unknown message type " + std::to_string(buf[4]));
    if (buf.size() < header) return header - buf.size();
    const std::size_t body = type == MessageType::Error
                                 ? detail::get_u16(buf, 5)
                                 : static_cast<std::size_t>(detail::get_u16(buf, 5)) * detail::get_u16(buf, 7);
    return buf.size() >= header + body ? 0 : header + body - buf.size();
}

// Decodes exactly one frame occupying the whole buffer.
inline Frame decode(std::span<const std::uint8_t> buf) {
    if (missing_bytes(buf) != 0) throw ProtocolError("truncated frame");
    Frame f;
    f.type = static_cast<MessageType>(buf[4]);
    std::size_t header = kHeaderSize;
    if (f.type == MessageType::Error) {
        header = 7;
    } else {
        f.width = detail::get_u16(buf, 5);
        f.height = detail::get_u16(buf, 7);
    }
    const std::size_t body = f.type == MessageType::Error ? detail::get_u16(buf, 5)
                                                          : static_cast<std::size_t>(f.width) * f.height;
    if (buf.size() != header + body) throw ProtocolError("trailing bytes after frame");
    f.payload.assign(buf.begin() + static_cast<std::ptrdiff_t>(header), buf.end());
    if (f.type == MessageType::Request)
        for (std::uint8_t b : f.payload)
            if (b != 0 && b != 100 && b != 255) throw ProtocolError("request payload is not tri-state");
    return f;
}

// ---------------------------------------------------------------------------
// Socket plumbing

class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) : fd_(fd) {}
    Socket(Socket&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
    Socket& operator=(Socket&& o) noexcept {
        if (this != &o) {
            reset();
            fd_ = std::exchange(o.fd_, -1);
        }
        return *this;
    }
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;
    ~Socket() { reset(); }

    int fd() const noexcept { return fd_; }
    bool valid() const noexcept { return fd_ >= 0; }
    void reset() noexcept {
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
    }

private:
    int fd_ = -1;
};

inline std::pair<std::string, std::string> split_address(const std::string& addr) {
    const auto colon = addr.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == addr.size())
        throw ProtocolError("address must be host:port, got '" + addr + "'");
    return {addr.substr(0, colon), addr.substr(colon + 1)};
}

inline Socket connect_to(const std::string& addr, int timeout_ms) {
    const auto [host, port] = split_address(addr);
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0 || res == nullptr)
        throw PredictorUnavailable("cannot resolve " + addr);
    std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, ::freeaddrinfo);
    for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
        Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
        if (!s.valid()) continue;
        timeval tv{timeout_ms / 1000, (timeout_ms % 1000) * 1000};
        ::setsockopt(s.fd(), SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
        ::setsockopt(s.fd(), SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
        int one = 1;
        ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        if (::connect(s.fd(), ai->ai_addr, ai->ai_addrlen) == 0) return s;
    }
    throw PredictorUnavailable("cannot connect to " + addr);
}

inline bool send_all(int fd, std::span<const std::uint8_t> bytes) {
    std::size_t sent = 0;
    while (sent < bytes.size()) {
        const ssize_t n = ::send(fd, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return false;
        sent += static_cast<std::size_t>(n);
    }
    return true;
}

// Reads the bytes of one complete frame; nullopt on a clean close before the
// first byte. A bad header throws ProtocolError and leaves the stream
// unusable; a timeout or mid-frame close throws PredictorUnavailable.
inline std::optional<std::vector<std::uint8_t>> read_raw_frame(int fd) {
    std::vector<std::uint8_t> buf;
    std::size_t need = 5;
    while (need > 0) {
        const std::size_t at = buf.size();
        buf.resize(at + need);
        const ssize_t n = ::recv(fd, buf.data() + at, need, 0);
        if (n < 0 && errno == EINTR) {
            buf.resize(at);
            continue;
        }
        if (n == 0 && at == 0) return std::nullopt;
        if (n <= 0) throw PredictorUnavailable(n == 0 ? "connection closed mid-frame" : "receive timed out");
        buf.resize(at + static_cast<std::size_t>(n));
        need = missing_bytes(buf);
    }
    return buf;
}

inline std::optional<Frame> read_frame(int fd) {
    auto raw = read_raw_frame(fd);
    if (!raw) return std::nullopt;
    return decode(*raw);
}

// Client side: one request in flight per connection.
class Client {
public:
    explicit Client(std::string addr, int timeout_ms = 5000) : addr_(std::move(addr)), timeout_ms_(timeout_ms) {}

    Frame round_trip(const Frame& request) {
        std::lock_guard lock(mu_);
        if (!sock_.valid()) sock_ = connect_to(addr_, timeout_ms_);
        const auto bytes = encode(request);
        if (!send_all(sock_.fd(), bytes)) {
            sock_.reset();
            throw PredictorUnavailable("send to " + addr_ + " failed");
        }
        try {
            auto reply = read_frame(sock_.fd());
            if (!reply) throw PredictorUnavailable("predictor closed the connection");
            return *reply;
        } catch (const ProtocolError& e) {
            sock_.reset();
            throw PredictorUnavailable(std::string("malformed reply: ") + e.what());
        } catch (...) {
            sock_.reset();
            throw;
        }
    }

    const std::string& address() const noexcept { return addr_; }

private:
    std::string addr_;
    int timeout_ms_;
    std::mutex mu_;
    Socket sock_;
};

// Loopback server answering every request with its own payload. Malformed
// frames get an error frame. Used for tests and `fpx echo-server`.
class EchoServer {
public:
    // port 0 picks an ephemeral port.
    explicit EchoServer(std::uint16_t port = 0, const std::string& bind_host = "127.0.0.1") {
        listener_ = Socket(::socket(AF_INET, SOCK_STREAM, 0));
        if (!listener_.valid()) throw IoError("socket() failed");
        int one = 1;
        ::setsockopt(listener_.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        sockaddr_in sa{};
        sa.sin_family = AF_INET;
        sa.sin_port = htons(port);
        if (::inet_pton(AF_INET, bind_host.c_str(), &sa.sin_addr) != 1) throw IoError("bad bind host " + bind_host);
        if (::bind(listener_.fd(), reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0) throw IoError("bind failed");
        if (::listen(listener_.fd(), 16) != 0) throw IoError("listen failed");
        socklen_t len = sizeof sa;
        ::getsockname(listener_.fd(), reinterpret_cast<sockaddr*>(&sa), &len);
        port_ = ntohs(sa.sin_port);
        thread_ = std::thread([this] { serve(); });
    }

    EchoServer(const EchoServer&) = delete;
    EchoServer& operator=(const EchoServer&) = delete;

    ~EchoServer() {
        stop_ = true;
        ::shutdown(listener_.fd(), SHUT_RDWR);
        if (thread_.joinable()) thread_.join();
        {
            std::lock_guard lock(conn_mu_);
            for (const auto& c : conns_) ::shutdown(c->fd(), SHUT_RDWR);
        }
        for (auto& t : workers_) t.join();
    }

    std::uint16_t port() const noexcept { return port_; }
    std::string address() const { return "127.0.0.1:" + std::to_string(port_); }

    // Blocks the caller until the server is destroyed from another thread.
    void wait() {
        if (thread_.joinable()) thread_.join();
    }

    // A bad header closes the connection after the error frame, since the
    // stream cannot be resynchronized. A bad payload only fails that request.
    static void handle(int fd) {
        for (;;) {
            std::optional<std::vector<std::uint8_t>> raw;
            try {
                raw = read_raw_frame(fd);
            } catch (const ProtocolError& e) {
                send_all(fd, encode(make_error(e.what())));
                return;
            } catch (const Error&) {
                return;
            }
            if (!raw) return;
            Frame reply;
            try {
                const Frame req = decode(*raw);
                reply = req.type == MessageType::Request ? make_response(req.width, req.height, req.payload)
                                                         : make_error("expected a request frame");
            } catch (const ProtocolError& e) {
                reply = make_error(e.what());
            }
            if (!send_all(fd, encode(reply))) return;
        }
    }

private:
    void serve() {
        while (!stop_) {
            pollfd p{listener_.fd(), POLLIN, 0};
            if (::poll(&p, 1, 100) <= 0) continue;
            auto conn = std::make_shared<Socket>(::accept(listener_.fd(), nullptr, nullptr));
            if (!conn->valid()) continue;
            std::lock_guard lock(conn_mu_);
            conns_.push_back(conn);
            workers_.emplace_back([conn] {
                handle(conn->fd());
                ::shutdown(conn->fd(), SHUT_RDWR);  // peer sees EOF; the fd closes with the server
            });
        }
    }

    Socket listener_;
    std::mutex conn_mu_;
    std::vector<std::shared_ptr<Socket>> conns_;
    std::vector<std::thread> workers_;
    std::uint16_t port_ = 0;
    std::atomic<bool> stop_{false};
    std::thread thread_;
};

}  // namespace fpx::protocol
