#pragma once

#include <memory>
#include <utility>

namespace semaquery {

//! Heap-allocated value with deep copy and deep equality. Lets recursive AST types keep value semantics.
template <class T>
class Box {
public:
	Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {
	}
	Box(const Box &other) : ptr_(std::make_unique<T>(*other.ptr_)) {
	}
	Box(Box &&other) noexcept = default;
	Box &operator=(const Box &other) {
		if (this != &other) {
			ptr_ = std::make_unique<T>(*other.ptr_);
		}
		return *this;
	}
	Box &operator=(Box &&other) noexcept = default;

	T &operator*() {
		return *ptr_;
	}
	const T &operator*() const {
		return *ptr_;
	}
	T *operator->() {
		return ptr_.get();
	}
	const T *operator->() const {
		return ptr_.get();
	}

	bool operator==(const Box &other) const {
		return *ptr_ == *other.ptr_;
	}

private:
	std::unique_ptr<T> ptr_;
};

} // namespace semaquery
