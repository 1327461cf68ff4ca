#include "semaquery/predict/rate_limiter.hpp"

#include "semaquery/common/exception.hpp"

#include <algorithm>
#include <thread>

namespace semaquery {

RateLimiter::RateLimiter(double requests_per_minute, double burst)
    : rate_per_second_(requests_per_minute / 60.0), burst_(std::max(1.0, burst)), tokens_(burst_),
      last_(Clock::now()) {
	if (!(requests_per_minute > 0)) {
		throw ConfigException("rate limit must be positive");
	}
}

void RateLimiter::RefillLocked(Clock::time_point now) {
	if (now <= last_) {
		return;
	}
	auto elapsed = std::chrono::duration<double>(now - last_).count();
	tokens_ = std::min(burst_, tokens_ + elapsed * rate_per_second_);
	last_ = now;
}

void RateLimiter::Acquire() {
	while (true) {
		Clock::duration wait;
		{
			std::lock_guard lock(mutex_);
			RefillLocked(Clock::now());
			if (tokens_ >= 1.0) {
				tokens_ -= 1.0;
				return;
			}
			wait = std::chrono::duration_cast<Clock::duration>(
			    std::chrono::duration<double>((1.0 - tokens_) / rate_per_second_));
		}
		std::this_thread::sleep_for(wait);
	}
}

RateLimiter::Clock::duration RateLimiter::PendingDelay() {
	std::lock_guard lock(mutex_);
	RefillLocked(Clock::now());
	if (tokens_ >= 1.0) {
		return Clock::duration::zero();
	}
	return std::chrono::duration_cast<Clock::duration>(
	    std::chrono::duration<double>((1.0 - tokens_) / rate_per_second_));
}

void RateLimiter::Penalize(Clock::duration delay) {
	std::lock_guard lock(mutex_);
	RefillLocked(Clock::now());
	// Drain the bucket so the next token appears no earlier than `delay` from now.
	auto seconds = std::chrono::duration<double>(delay).count();
	tokens_ = std::min(tokens_, 1.0 - seconds * rate_per_second_);
}

} // namespace semaquery
