#pragma once

// Command implementations behind the `wordfun` executable. Each cmd_* function
// is usable in-process; run() adds argument parsing and exit-code mapping.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace wordfun::cli {

// "key = value" lines, '#' comments. Keys are checked against known_keys().
class RunConfig {
 public:
  static RunConfig parse(std::string_view text, std::string_view source = "<config>");
  static RunConfig load(const std::filesystem::path& path);

  void set(std::string key, std::string value);
  // "key=value"
  void assign(std::string_view assignment);

  std::optional<std::string> get(std::string_view key) const;
  bool has(std::string_view key) const { return get(key).has_value(); }

  std::string get_string(std::string_view key, std::string_view fallback) const;
  std::uint64_t get_u64(std::string_view key, std::uint64_t fallback) const;
  int get_int(std::string_view key, int fallback) const;
  double get_double(std::string_view key, double fallback) const;
  bool get_bool(std::string_view key, bool fallback) const;
  std::vector<double> get_doubles(std::string_view key, const std::vector<double>& fallback) const;
  std::vector<std::string> get_strings(std::string_view key, const std::vector<std::string>& fallback) const;

  // Required resource path; InputError "<label>: file not found (...)" if unset or absent.
  std::filesystem::path resource(std::string_view key) const;
  std::optional<std::filesystem::path> optional_resource(std::string_view key) const;

  // Sorted "key = value" lines.
  std::string dump() const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

const std::vector<std::string>& known_keys();

void cmd_funniness_train(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log);
void cmd_features(const RunConfig& config, const std::filesystem::path& games, const std::filesystem::path& labels,
                  const std::filesystem::path& out, std::ostream& log);
void cmd_train(const RunConfig& config, const std::filesystem::path& features, const std::filesystem::path& out_dir,
               std::ostream& log);
void cmd_compare(const std::filesystem::path& full, const std::filesystem::path& nested,
                 const std::optional<std::filesystem::path>& out, std::ostream& log);
void cmd_kappa(const RunConfig& config, const std::filesystem::path& annotations, const std::filesystem::path& out,
               std::ostream& log);
void cmd_score(const RunConfig& config, const std::filesystem::path& model, const std::filesystem::path& game,
               std::ostream& log);
void cmd_parse(const std::filesystem::path& input, const std::filesystem::path& out, std::string_view id_prefix,
               std::ostream& log);

// Exit codes: 0 success, 1 runtime failure, 2 configuration or input error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wordfun::cli
