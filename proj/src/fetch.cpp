#include "seqcast/error.hpp"
#include "seqcast/market_data.hpp"

#include <httplib.h>

namespace seqcast {

namespace {

void replace_all(std::string& text, std::string_view key, std::string_view value) {
    std::size_t pos = 0;
    while ((pos = text.find(key, pos)) != std::string::npos) {
        text.replace(pos, key.size(), value);
        pos += value.size();
    }
}

} // namespace

std::string expand_endpoint(std::string_view endpoint_template, std::string_view symbol, Date start,
                            Date end) {
    std::string url(endpoint_template);
    replace_all(url, "{symbol}", symbol);
    replace_all(url, "{start}", start.iso());
    replace_all(url, "{end}", end.iso());
    return url;
}

std::string fetch_remote(std::string_view endpoint_template, std::string_view symbol, Date start,
                         Date end, int timeout_seconds) {
    const std::string url = expand_endpoint(endpoint_template, symbol, start, end);

    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error(Errc::NetworkError, "not an absolute URL: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    const std::string origin = url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (url.rfind("https://", 0) == 0) {
        throw Error(Errc::NetworkError, "built without TLS support: " + url);
    }
#endif

    httplib::Client client(origin);
    if (!client.is_valid()) throw Error(Errc::NetworkError, "invalid endpoint: " + url);
    client.set_follow_location(true);
    client.set_connection_timeout(timeout_seconds);
    client.set_read_timeout(timeout_seconds);

    auto response = client.Get(path);
    if (!response) {
        throw Error(Errc::NetworkError, url + ": " + httplib::to_string(response.error()));
    }
    if (response->status != 200) {
        throw Error(Errc::HttpStatus, url + ": HTTP " + std::to_string(response->status),
                    response->status);
    }
    if (response->body.empty()) throw Error(Errc::EmptyBody, url);
    return std::move(response->body);
}

} // namespace seqcast
