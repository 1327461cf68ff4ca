#pragma once

#include <chrono>
#include <mutex>

namespace semaquery {

//! Token bucket refilled continuously at `requests_per_minute`. Acquire blocks until a token is available.
//! The bucket starts full; `burst` caps how many requests may go out back to back.
class RateLimiter {
public:
	using Clock = std::chrono::steady_clock;

	RateLimiter(double requests_per_minute, double burst = 1.0);

	void Acquire();
	//! Delay the next Acquire would incur right now, without taking a token.
	Clock::duration PendingDelay();
	//! Pushes the next available slot out by `delay` (server-side Retry-After).
	void Penalize(Clock::duration delay);

	double RequestsPerMinute() const {
		return rate_per_second_ * 60.0;
	}

private:
	void RefillLocked(Clock::time_point now);

	std::mutex mutex_;
	double rate_per_second_;
	double burst_;
	double tokens_;
	Clock::time_point last_;
};

} // namespace semaquery
