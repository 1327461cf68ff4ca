#include "semaquery/predict/worker_pool.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace semaquery {

void RunParallel(size_t n_threads, size_t count, const std::function<void(size_t)> &task) {
	auto workers = std::min(std::max<size_t>(n_threads, 1), count);
	if (workers <= 1) {
		for (size_t i = 0; i < count; i++) {
			task(i);
		}
		return;
	}
	std::atomic<size_t> next {0};
	std::exception_ptr error;
	std::mutex error_lock;
	auto loop = [&]() {
		for (size_t i = next++; i < count; i = next++) {
			try {
				task(i);
			} catch (...) {
				std::lock_guard guard(error_lock);
				if (!error) {
					error = std::current_exception();
				}
			}
		}
	};
	std::vector<std::thread> threads;
	threads.reserve(workers);
	for (size_t i = 0; i < workers; i++) {
		threads.emplace_back(loop);
	}
	for (auto &thread : threads) {
		thread.join();
	}
	if (error) {
		std::rethrow_exception(error);
	}
}

} // namespace semaquery
