#include "locpress/io.hpp"

#include <fstream>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

namespace locpress {

std::string fmt15(double x) { return fmt::format("{:.15g}", x); }

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::random_device rd;
  const fs::path tmp = path.string() + fmt::format(".tmp{:08x}", rd());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot open {} for writing", tmp.string()));
    out << content;
    out.flush();
    if (!out) throw std::runtime_error(fmt::format("write to {} failed", tmp.string()));
  }
  fs::rename(tmp, path);
}

}  // namespace locpress
