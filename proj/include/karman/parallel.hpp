#pragma once

#include <exception>
#include <optional>

namespace karman {

/// Thread count from the flag, else KARMAN_THREADS, else the OpenMP default.
/// Non-positive or unparsable values raise DomainError.
int resolve_threads(std::optional<int> flag);

void set_threads(int n);
int max_threads();

/// Keeps one exception thrown inside an OpenMP loop body so it can be
/// rethrown after the region.
class ExceptionTrap {
public:
  template <class F> void run(F &&f) noexcept {
    try {
      f();
    } catch (...) {
#pragma omp critical(karman_exception_trap)
      if (!ptr_)
        ptr_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (ptr_)
      std::rethrow_exception(ptr_);
  }

private:
  std::exception_ptr ptr_;
};

} // namespace karman
