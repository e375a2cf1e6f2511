#pragma once

#include "dimx/service.hpp"

#include <httplib.h>

#include <memory>

namespace dimx {

// Routes every GET/POST/PUT to service.handle. The caller owns listening.
std::unique_ptr<httplib::Server> make_http_server(Service& service);

}  // namespace dimx
