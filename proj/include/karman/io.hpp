#pragma once

#include <filesystem>
#include <string>

namespace karman {

/// Creates the directory (and parents); DomainError when it is not writable.
void ensure_directory(const std::filesystem::path &dir);

/// Writes the bytes exactly; DomainError on failure.
void write_file(const std::filesystem::path &path, const std::string &bytes);
std::string read_file(const std::filesystem::path &path);

/// Shortest round-trip decimal form, used in every CSV the CLI writes.
std::string format_number(double x);

std::string library_version();
std::string fftw_version_string();
std::string build_description(); // compiler and Boost versions

} // namespace karman
