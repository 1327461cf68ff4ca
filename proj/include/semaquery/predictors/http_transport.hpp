#pragma once

#include "json.hpp"

#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

namespace semaquery {

struct HttpRequest {
	std::string method = "POST";
	std::string url;
	std::vector<std::pair<std::string, std::string>> headers;
	std::string body;
	int64_t timeout_ms = 60000;
};

struct HttpResponse {
	int status = 0;
	//! Header names lower-cased.
	std::map<std::string, std::string> headers;
	std::string body;
};

//! Sends one HTTP request. Network failures and timeouts throw BackendException (retryable).
class HttpTransport {
public:
	virtual ~HttpTransport() = default;
	virtual HttpResponse Send(const HttpRequest &request) = 0;
};

//! cpp-httplib client; https URLs use OpenSSL.
class HttplibTransport : public HttpTransport {
public:
	HttpResponse Send(const HttpRequest &request) override;
};

//! Offline replay of recorded HTTP exchanges. Responses are served in file order regardless of the request;
//! every request is kept so tests can compare bodies against golden files.
//!
//! File format:
//!   {"interactions": [{"response": {"status": 200, "headers": {"retry-after": "0"}, "body": {...} | "text"}}]}
//! A "request" member per interaction is ignored on replay.
class CassetteTransport : public HttpTransport {
public:
	explicit CassetteTransport(std::vector<HttpResponse> responses);
	//! Throws IOException / ConfigException.
	static std::shared_ptr<CassetteTransport> Load(const std::filesystem::path &path);

	HttpResponse Send(const HttpRequest &request) override;

	std::vector<HttpRequest> Requests() const;
	size_t Remaining() const;

private:
	mutable std::mutex mutex_;
	std::vector<HttpResponse> responses_;
	size_t next_ = 0;
	std::vector<HttpRequest> requests_;
};

//! Splits "https://host:port/base/path" into scheme://host:port and path. Throws ConfigException when malformed.
std::pair<std::string, std::string> SplitUrl(const std::string &url);

} // namespace semaquery
