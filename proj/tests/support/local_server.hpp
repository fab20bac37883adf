#pragma once

#include <string>
#include <thread>

#include "httplib.h"

namespace solid::testing {

// Runs an httplib server on an ephemeral localhost port for one test.
class LocalServer {
public:
    LocalServer() {
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~LocalServer() {
        server_.stop();
        thread_.join();
    }
    httplib::Server& server() { return server_; }
    std::string endpoint(const std::string& base = "/v1") const {
        return "http://127.0.0.1:" + std::to_string(port_) + base;
    }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

}  // namespace solid::testing
