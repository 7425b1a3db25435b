#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nvcav {

inline constexpr std::string_view kToolVersion = "nvcav 0.1.0";

// FNV-1a over raw bytes; used to fingerprint input files in output headers.
std::uint64_t fnv1a64(std::string_view bytes);
std::string file_digest_hex(const std::filesystem::path& path);

// Provenance block embedded in every CLI output. Deliberately contains no
// timestamps so identical inputs produce bit-identical outputs.
struct Provenance {
  std::string tool{kToolVersion};
  std::vector<std::pair<std::string, std::string>> inputs;  // (path, digest)
  std::optional<std::uint64_t> seed;

  void add_input(const std::filesystem::path& path);
  std::vector<std::string> comment_lines() const;  // for CSV '#' headers
};

}  // namespace nvcav
