#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "userl/bridge/hub.hpp"

namespace userl::bridge {

/// WebSocket front end of a hub. A console joins a session at
/// ws://host:port/session/<id>; every text frame carries one encoded
/// message. Plain HTTP GET /sessions lists the open sessions, and other GET
/// paths are served from `static_root` when one is given.
class BridgeServer {
public:
    BridgeServer(HumanBridgeHub& hub, std::string address = "127.0.0.1", unsigned short port = 0,
                 std::filesystem::path static_root = {});
    ~BridgeServer();

    BridgeServer(const BridgeServer&) = delete;
    BridgeServer& operator=(const BridgeServer&) = delete;

    /// Binds and starts serving on a background thread.
    void start();
    void stop();
    unsigned short port() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace userl::bridge
