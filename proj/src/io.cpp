#include "karman/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include <boost/version.hpp>
#include <fftw3.h>

#include "karman/errors.hpp"

namespace karman {

void ensure_directory(const std::filesystem::path &dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw DomainError("cannot create output directory '" + dir.string() + "'");
  const auto probe = dir / ".karman_write_probe";
  {
    std::ofstream f(probe);
    if (!f)
      throw DomainError("output directory '" + dir.string() + "' is not writable");
  }
  std::filesystem::remove(probe, ec);
}

void write_file(const std::filesystem::path &path, const std::string &bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f)
    throw DomainError("cannot write '" + path.string() + "'");
}

std::string read_file(const std::filesystem::path &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw DomainError("cannot read '" + path.string() + "'");
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

std::string format_number(double x) {
  if (std::isnan(x))
    return "nan";
  if (std::isinf(x))
    return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string library_version() { return "1.0.0"; }

std::string fftw_version_string() { return fftw_version; }

std::string build_description() {
  std::ostringstream os;
  os << "compiler " << __VERSION__ << ", Boost " << BOOST_LIB_VERSION;
  return os.str();
}

} // namespace karman
