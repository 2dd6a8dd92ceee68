#include "wordfun/wordle.hpp"

#include <algorithm>
#include <limits>

namespace wordfun {

Feedback Feedback::parse(std::string_view text) {
  if (text.size() != Word::kLength) {
    throw InputError("feedback '" + std::string(text) + "' must have exactly 5 marks");
  }
  std::array<Mark, Word::kLength> marks{};
  for (std::size_t i = 0; i < Word::kLength; ++i) {
    switch (text[i]) {
      case 'G':
      case 'g':
        marks[i] = Mark::green;
        break;
      case 'Y':
      case 'y':
        marks[i] = Mark::yellow;
        break;
      case 'B':
      case 'b':
        marks[i] = Mark::gray;
        break;
      default:
        throw InputError("feedback '" + std::string(text) + "': mark must be one of G, Y, B");
    }
  }
  return Feedback(marks);
}

Feedback Feedback::all_green() {
  std::array<Mark, Word::kLength> marks{};
  marks.fill(Mark::green);
  return Feedback(marks);
}

bool Feedback::is_all_green() const noexcept {
  return std::all_of(marks_.begin(), marks_.end(), [](Mark m) { return m == Mark::green; });
}

std::uint8_t Feedback::code() const noexcept {
  unsigned c = 0;
  for (const Mark m : marks_) c = c * 3 + static_cast<unsigned>(m);
  return static_cast<std::uint8_t>(c);
}

std::string Feedback::str() const {
  std::string out;
  for (const Mark m : marks_) out.push_back(m == Mark::green ? 'G' : m == Mark::yellow ? 'Y' : 'B');
  return out;
}

Feedback compute_feedback(const Word& guess, const Word& answer) noexcept {
  std::array<Mark, Word::kLength> marks{};
  std::array<std::uint8_t, 26> remaining{};
  for (std::size_t i = 0; i < Word::kLength; ++i) {
    if (guess[i] == answer[i]) {
      marks[i] = Mark::green;
    } else {
      ++remaining[static_cast<std::size_t>(answer[i] - 'a')];
    }
  }
  for (std::size_t i = 0; i < Word::kLength; ++i) {
    if (marks[i] == Mark::green) continue;
    auto& left = remaining[static_cast<std::size_t>(guess[i] - 'a')];
    if (left > 0) {
      marks[i] = Mark::yellow;
      --left;
    }
  }
  return Feedback(marks);
}

bool is_consistent(const Word& candidate, const Word& guess, const Feedback& observed) noexcept {
  return compute_feedback(guess, candidate) == observed;
}

namespace {

std::span<const Word> universe_words(const WordList& universe, CandidateUniverse which) {
  return which == CandidateUniverse::answers ? universe.answers() : universe.allowed_guesses();
}

void filter_in_place(std::vector<Word>& candidates, const Ply& ply) {
  std::erase_if(candidates, [&](const Word& w) { return !is_consistent(w, ply.guess, ply.feedback); });
}

}  // namespace

std::vector<Word> consistent_candidates(std::span<const Ply> history, const WordList& universe,
                                        CandidateUniverse which) {
  const auto words = universe_words(universe, which);
  std::vector<Word> out(words.begin(), words.end());
  for (const Ply& ply : history) {
    filter_in_place(out, ply);
    if (out.empty()) break;
  }
  return out;
}

std::vector<Ply> GameRecord::history() const {
  std::vector<Ply> plies;
  plies.reserve(guesses.size());
  for (std::size_t i = 0; i < guesses.size(); ++i) plies.push_back(Ply{guesses[i], feedbacks[i]});
  return plies;
}

void GameRecord::validate() const {
  if (feedbacks.empty() || feedbacks.size() > kMaxPlies) {
    throw InputError("game must have between 1 and 6 plies, got " + std::to_string(feedbacks.size()));
  }
  if (!guesses.empty() && guesses.size() != feedbacks.size()) {
    throw InputError("game has " + std::to_string(guesses.size()) + " guesses but " +
                     std::to_string(feedbacks.size()) + " feedback rows");
  }
  for (std::size_t i = 0; i + 1 < feedbacks.size(); ++i) {
    if (feedbacks[i].is_all_green()) {
      throw InputError("all-green feedback at ply " + std::to_string(i + 1) + " before the end of the game");
    }
  }
  if (solved != feedbacks.back().is_all_green()) {
    throw InputError(solved ? "solved game must end with an all-green row"
                            : "unsolved game ends with an all-green row");
  }
  if (answer && !guesses.empty()) {
    if (solved && guesses.back() != *answer) {
      throw InputError("final guess '" + guesses.back().str() + "' differs from answer '" + answer->str() + "'");
    }
    for (std::size_t i = 0; i < guesses.size(); ++i) {
      const Feedback expected = compute_feedback(guesses[i], *answer);
      if (expected != feedbacks[i]) {
        throw InputError("ply " + std::to_string(i + 1) + ": feedback " + feedbacks[i].str() + " for '" +
                         guesses[i].str() + "' does not match answer '" + answer->str() + "' (expected " +
                         expected.str() + ")");
      }
    }
  }
}

CandidateTrajectory candidate_trajectory(const GameRecord& game, const WordList& universe,
                                         const TrajectoryOptions& options) {
  game.validate();
  if (!game.has_guesses()) {
    throw InputError("candidate trajectory needs the guessed words; game has feedback rows only");
  }
  const auto words = universe_words(universe, options.universe);
  std::vector<Word> candidates(words.begin(), words.end());
  CandidateTrajectory traj;
  traj.counts.reserve(game.length() + 1);
  traj.counts.push_back(candidates.size());
  for (std::size_t i = 0; i < game.length(); ++i) {
    filter_in_place(candidates, Ply{game.guesses[i], game.feedbacks[i]});
    const bool final_ply = i + 1 == game.length();
    if (candidates.empty() && !final_ply) {
      throw InconsistentTranscript("inconsistent transcript: no candidate matches the feedback after ply " +
                       std::to_string(i + 1));
    }
    const bool solving = game.feedbacks[i].is_all_green();
    traj.counts.push_back(solving && options.solved_count == SolvedCount::zero ? 0 : candidates.size());
  }
  return traj;
}

ReductionFeatures reduction_features(const CandidateTrajectory& trajectory) {
  const auto& c = trajectory.counts;
  if (c.size() < 2) throw InputError("reduction features need at least one ply");
  ReductionFeatures out;
  out.length = c.size() - 1;
  double sum = 0;
  out.max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < c.size(); ++i) {
    const double r = static_cast<double>(c[i - 1]) - static_cast<double>(c[i]);
    sum += r;
    out.max = std::max(out.max, r);
    out.last = r;
  }
  out.mean = sum / static_cast<double>(out.length);
  return out;
}

}  // namespace wordfun
