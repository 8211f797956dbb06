#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fairdyn {

/// Seconds since the Unix epoch.
using Timestamp = std::int64_t;

/// Dense participant index inside a Dataset (position in id-sorted order).
using NodeId = std::uint32_t;

inline constexpr int kWaveCount = 6;
inline constexpr Timestamp kSecondsPerDay = 86400;

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input. Carries the offending file and 1-based line when known.
class ParseError : public Error {
 public:
  ParseError(std::string file, std::size_t line, const std::string& what);

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An event or opinion names a participant that does not exist.
class ReferentialError : public ValidationError {
 public:
  explicit ReferentialError(std::string id);
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class DuplicateError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Stances and questions

enum class Stance : std::uint8_t { A, B, AB, Missing };

std::string_view to_string(Stance s) noexcept;
/// Accepts "A", "B", "AB", "Missing" and the empty string (Missing).
std::optional<Stance> parse_stance(std::string_view text) noexcept;

enum class Question : std::uint8_t {
  Euthanasia,
  FsSocSec,
  FsWelfare,
  JobGuar,
  Marijuana,
  TooMuchEqRights,
};

enum class Typology : std::uint8_t { Consensus, Polarized, Apathetic };

inline constexpr std::array<Question, 6> kAllQuestions = {
    Question::Euthanasia, Question::FsSocSec,  Question::FsWelfare,
    Question::JobGuar,    Question::Marijuana, Question::TooMuchEqRights};

std::string_view shortcode(Question q) noexcept;
std::optional<Question> parse_question(std::string_view code) noexcept;
Typology typology(Question q) noexcept;
std::string_view to_string(Typology t) noexcept;

inline constexpr std::size_t index_of(Question q) noexcept {
  return static_cast<std::size_t>(q);
}

// ---------------------------------------------------------------------------
// Minorities

enum class Minority : std::uint8_t {
  Gender,
  Ethnicity,
  FBPrivacy,
  EnglishNative,
  ParentsIncome,
  ParentsEducation,
  ParentsReligion,
};

inline constexpr std::size_t kMinorityCount = 7;

inline constexpr std::array<Minority, kMinorityCount> kAllMinorities = {
    Minority::Gender,        Minority::Ethnicity,        Minority::FBPrivacy,
    Minority::EnglishNative, Minority::ParentsIncome,    Minority::ParentsEducation,
    Minority::ParentsReligion};

std::string_view to_string(Minority m) noexcept;
/// Accepts the display names ("ParentsEducation") and snake_case keys
/// ("parents_education").
std::optional<Minority> parse_minority(std::string_view name) noexcept;
std::string_view config_key(Minority m) noexcept;

inline constexpr std::size_t index_of(Minority m) noexcept {
  return static_cast<std::size_t>(m);
}

}  // namespace fairdyn
