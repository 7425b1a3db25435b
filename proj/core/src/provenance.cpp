#include "nvcav/provenance.hpp"

#include <fstream>
#include <sstream>

#include "nvcav/errors.hpp"

namespace nvcav {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::string file_digest_hex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return std::string(hex);
}

void Provenance::add_input(const std::filesystem::path& path) {
  inputs.emplace_back(path.string(), file_digest_hex(path));
}

std::vector<std::string> Provenance::comment_lines() const {
  std::vector<std::string> lines;
  lines.push_back(tool);
  for (const auto& [name, digest] : inputs) {
    lines.push_back("input " + name + " fnv1a64=" + digest);
  }
  if (seed) lines.push_back("seed " + std::to_string(*seed));
  return lines;
}

}  // namespace nvcav
