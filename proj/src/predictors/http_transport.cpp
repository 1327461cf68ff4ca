#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "semaquery/predictors/http_transport.hpp"

#include "semaquery/common/exception.hpp"
#include "semaquery/common/string_util.hpp"

#include <fstream>
#include <sstream>

namespace semaquery {

std::pair<std::string, std::string> SplitUrl(const std::string &url) {
	auto scheme_end = url.find("://");
	if (scheme_end == std::string::npos) {
		throw ConfigException("malformed URL '" + url + "': missing scheme");
	}
	auto scheme = string_util::Lower(url.substr(0, scheme_end));
	if (scheme != "http" && scheme != "https") {
		throw ConfigException("malformed URL '" + url + "': scheme must be http or https");
	}
	auto host_start = scheme_end + 3;
	auto path_start = url.find('/', host_start);
	auto host = url.substr(host_start, path_start == std::string::npos ? std::string::npos : path_start - host_start);
	if (host.empty() || host.find_first_of(" \t@") != std::string::npos) {
		throw ConfigException("malformed URL '" + url + "': bad host");
	}
	auto path = path_start == std::string::npos ? std::string("/") : url.substr(path_start);
	return {scheme + "://" + host, path};
}

HttpResponse HttplibTransport::Send(const HttpRequest &request) {
	auto [origin, path] = SplitUrl(request.url);
	httplib::Client client(origin);
	auto seconds = request.timeout_ms / 1000;
	auto micros = (request.timeout_ms % 1000) * 1000;
	client.set_connection_timeout(seconds, micros);
	client.set_read_timeout(seconds, micros);
	client.set_write_timeout(seconds, micros);
	httplib::Headers headers;
	std::string content_type = "application/json";
	for (auto &[name, value] : request.headers) {
		if (string_util::EqualsIgnoreCase(name, "content-type")) {
			content_type = value;
		} else {
			headers.emplace(name, value);
		}
	}
	httplib::Result result = request.method == "GET" ? client.Get(path, headers)
	                                                 : client.Post(path, headers, request.body, content_type);
	if (!result) {
		auto error = result.error();
		throw BackendException("HTTP request to " + origin + " failed: " + httplib::to_string(error),
		                       true);
	}
	HttpResponse response;
	response.status = result->status;
	response.body = result->body;
	for (auto &[name, value] : result->headers) {
		response.headers[string_util::Lower(name)] = value;
	}
	return response;
}

CassetteTransport::CassetteTransport(std::vector<HttpResponse> responses) : responses_(std::move(responses)) {
}

std::shared_ptr<CassetteTransport> CassetteTransport::Load(const std::filesystem::path &path) {
	std::ifstream in(path, std::ios::binary);
	if (!in) {
		throw IOException("cannot open cassette " + path.string());
	}
	std::stringstream buffer;
	buffer << in.rdbuf();
	auto document = nlohmann::json::parse(buffer.str(), nullptr, false);
	if (document.is_discarded() || !document.contains("interactions") || !document["interactions"].is_array()) {
		throw ConfigException("cassette " + path.string() + " must be an object with an interactions array");
	}
	std::vector<HttpResponse> responses;
	for (auto &interaction : document["interactions"]) {
		auto &recorded = interaction.at("response");
		HttpResponse response;
		response.status = recorded.value("status", 200);
		if (recorded.contains("headers")) {
			for (auto &[name, value] : recorded["headers"].items()) {
				response.headers[string_util::Lower(name)] = value.is_string() ? value.get<std::string>() : value.dump();
			}
		}
		if (recorded.contains("body")) {
			auto &body = recorded["body"];
			response.body = body.is_string() ? body.get<std::string>() : body.dump();
		}
		responses.push_back(std::move(response));
	}
	return std::make_shared<CassetteTransport>(std::move(responses));
}

HttpResponse CassetteTransport::Send(const HttpRequest &request) {
	std::lock_guard guard(mutex_);
	requests_.push_back(request);
	if (next_ >= responses_.size()) {
		throw BackendException("cassette exhausted after " + std::to_string(responses_.size()) + " responses", false);
	}
	return responses_[next_++];
}

std::vector<HttpRequest> CassetteTransport::Requests() const {
	std::lock_guard guard(mutex_);
	return requests_;
}

size_t CassetteTransport::Remaining() const {
	std::lock_guard guard(mutex_);
	return responses_.size() - next_;
}

} // namespace semaquery
