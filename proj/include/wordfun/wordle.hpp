#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wordfun/common.hpp"
#include "wordfun/lexres.hpp"
#include "wordfun/word.hpp"

namespace wordfun {

enum class Mark : std::uint8_t { gray = 0, yellow = 1, green = 2 };

class Feedback {
 public:
  Feedback() = default;
  explicit Feedback(const std::array<Mark, Word::kLength>& marks) : marks_(marks) {}

  // Letters G (green), Y (yellow), B (gray), either case.
  static Feedback parse(std::string_view text);
  static Feedback all_green();

  Mark operator[](std::size_t i) const noexcept { return marks_[i]; }
  const std::array<Mark, Word::kLength>& marks() const noexcept { return marks_; }
  bool is_all_green() const noexcept;
  // Base-3 code in [0, 243).
  std::uint8_t code() const noexcept;
  std::string str() const;

  friend bool operator==(const Feedback&, const Feedback&) = default;

 private:
  std::array<Mark, Word::kLength> marks_{};
};

// Greens first (each consumes its answer letter), then yellows left to right
// against the answer letters that remain.
Feedback compute_feedback(const Word& guess, const Word& answer) noexcept;

bool is_consistent(const Word& candidate, const Word& guess, const Feedback& observed) noexcept;

struct Ply {
  Word guess;
  Feedback feedback;
};

enum class CandidateUniverse { answers, allowed_guesses };

std::vector<Word> consistent_candidates(std::span<const Ply> history, const WordList& universe,
                                        CandidateUniverse which = CandidateUniverse::answers);

inline constexpr std::size_t kMaxPlies = 6;

struct GameRecord {
  std::vector<Word> guesses;  // empty for feedback-only grids
  std::vector<Feedback> feedbacks;
  std::optional<Word> answer;
  bool solved = false;

  std::size_t length() const noexcept { return feedbacks.size(); }
  bool has_guesses() const noexcept { return !guesses.empty(); }
  std::vector<Ply> history() const;

  // Throws InputError when the record breaks a game invariant, including
  // feedback rows that disagree with a known answer.
  void validate() const;
};

// Thrown when feedback admits no candidate before the final ply.
class InconsistentTranscript : public InputError {
 public:
  using InputError::InputError;
};

enum class SolvedCount {
  zero,        // a solving ply drops the count to 0
  consistent,  // a solving ply keeps the true consistent count (1 when the answer is in the universe)
};

struct TrajectoryOptions {
  CandidateUniverse universe = CandidateUniverse::answers;
  SolvedCount solved_count = SolvedCount::zero;
};

struct CandidateTrajectory {
  // counts[0] is the universe size; counts[i] the candidates left after ply i.
  std::vector<std::size_t> counts;
};

CandidateTrajectory candidate_trajectory(const GameRecord& game, const WordList& universe,
                                         const TrajectoryOptions& options = {});

struct ReductionFeatures {
  double max = 0;
  double mean = 0;
  double last = 0;
  std::size_t length = 0;
};

ReductionFeatures reduction_features(const CandidateTrajectory& trajectory);

}  // namespace wordfun
