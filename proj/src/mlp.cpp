#include "wordfun/mlp.hpp"

#include <charconv>

namespace wordfun {

MlpArchitecture MlpArchitecture::parse(const std::string& spec) {
  const auto fail = [&] { return InputError("invalid architecture '" + spec + "' (expected e.g. NFEAT-10-10-1)"); };
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t dash = spec.find('-', start);
    parts.push_back(spec.substr(start, dash == std::string::npos ? std::string::npos : dash - start));
    if (dash == std::string::npos) break;
    start = dash + 1;
  }
  if (parts.size() < 3 || to_upper(parts.front()) != "NFEAT" || parts.back() != "1") throw fail();
  MlpArchitecture arch;
  for (std::size_t i = 1; i + 1 < parts.size(); ++i) {
    int width = 0;
    const auto& p = parts[i];
    const auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), width);
    if (ec != std::errc() || ptr != p.data() + p.size() || width <= 0) throw fail();
    arch.hidden.push_back(width);
  }
  return arch;
}

std::string MlpArchitecture::str() const {
  std::string out = "NFEAT";
  for (const int h : hidden) out += "-" + std::to_string(h);
  return out + "-1";
}

}  // namespace wordfun
