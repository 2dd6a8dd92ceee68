#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace wordfun {

// Exactly five lowercase letters a-z.
class Word {
 public:
  static constexpr std::size_t kLength = 5;

  // Accepts either case; throws InputError on anything else.
  static Word parse(std::string_view text);
  static std::optional<Word> try_parse(std::string_view text) noexcept;

  char operator[](std::size_t i) const noexcept { return letters_[i]; }
  std::string_view view() const noexcept { return {letters_.data(), kLength}; }
  std::string str() const { return std::string(view()); }

  friend auto operator<=>(const Word&, const Word&) = default;
  friend bool operator==(const Word&, const Word&) = default;

 private:
  Word() = default;
  std::array<char, kLength> letters_{};
};

}  // namespace wordfun

template <>
struct std::hash<wordfun::Word> {
  std::size_t operator()(const wordfun::Word& w) const noexcept {
    return std::hash<std::string_view>{}(w.view());
  }
};
