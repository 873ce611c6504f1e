#include "karman/parallel.hpp"

#include <cstdlib>
#include <sstream>
#include <string>

#include <omp.h>

#include "karman/errors.hpp"

namespace karman {

int resolve_threads(std::optional<int> flag) {
  if (flag) {
    if (*flag < 1)
      throw DomainError("--threads must be >= 1");
    return *flag;
  }
  if (const char *env = std::getenv("KARMAN_THREADS"); env && *env) {
    std::string text(env);
    std::size_t used = 0;
    int n = 0;
    try {
      n = std::stoi(text, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used != text.size() || n < 1) {
      std::ostringstream os;
      os << "KARMAN_THREADS='" << text << "' is not a positive integer";
      throw DomainError(os.str());
    }
    return n;
  }
  return omp_get_max_threads();
}

void set_threads(int n) {
  if (n < 1)
    throw DomainError("thread count must be >= 1");
  omp_set_num_threads(n);
}

int max_threads() { return omp_get_max_threads(); }

} // namespace karman
