#include "dimx/http.hpp"

#include <iostream>

namespace dimx {

std::unique_ptr<httplib::Server> make_http_server(Service& service) {
    auto server = std::make_unique<httplib::Server>();
    auto dispatch = [&service](const httplib::Request& req, httplib::Response& res) {
        Request r;
        r.method = req.method;
        r.path = req.path;
        for (const auto& [k, v] : req.params) r.query.emplace(k, v);
        r.body = req.body;
        const Response out = service.handle(r);
        res.status = out.status;
        if (out.status != 204) res.set_content(out.body.dump(), "application/json");
    };
    server->Get(".*", dispatch);
    server->Post(".*", dispatch);
    server->Put(".*", dispatch);
    return server;
}

void serve_http(Service& service, const std::string& host, int port) {
    auto server = make_http_server(service);
    std::cerr << "listening on " << host << ':' << port << std::endl;
    if (!server->listen(host, port)) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace dimx
