#include "fairdyn/core.hpp"

#include <algorithm>

namespace fairdyn {

ParseError::ParseError(std::string file, std::size_t line, const std::string& what)
    : Error(file + ":" + std::to_string(line) + ": " + what),
      file_(std::move(file)),
      line_(line) {}

ReferentialError::ReferentialError(std::string id)
    : ValidationError("referential violation: unknown participant id \"" + id + "\""),
      id_(std::move(id)) {}

std::string_view to_string(Stance s) noexcept {
  switch (s) {
    case Stance::A: return "A";
    case Stance::B: return "B";
    case Stance::AB: return "AB";
    case Stance::Missing: return "Missing";
  }
  return "Missing";
}

std::optional<Stance> parse_stance(std::string_view text) noexcept {
  if (text == "A") return Stance::A;
  if (text == "B") return Stance::B;
  if (text == "AB") return Stance::AB;
  if (text == "Missing" || text.empty()) return Stance::Missing;
  return std::nullopt;
}

namespace {
constexpr std::array<std::string_view, 6> kShortcodes = {
    "euthanasia", "fssocsec", "fswelfare", "jobguar", "marijuana", "toomucheqrights"};

constexpr std::array<std::string_view, kMinorityCount> kMinorityNames = {
    "Gender",        "Ethnicity",        "FBPrivacy",      "EnglishNative",
    "ParentsIncome", "ParentsEducation", "ParentsReligion"};

constexpr std::array<std::string_view, kMinorityCount> kMinorityKeys = {
    "gender",         "ethnicity",         "fbprivacy",       "english_native",
    "parents_income", "parents_education", "parents_religion"};
}  // namespace

std::string_view shortcode(Question q) noexcept { return kShortcodes[index_of(q)]; }

std::optional<Question> parse_question(std::string_view code) noexcept {
  auto it = std::find(kShortcodes.begin(), kShortcodes.end(), code);
  if (it == kShortcodes.end()) return std::nullopt;
  return static_cast<Question>(it - kShortcodes.begin());
}

Typology typology(Question q) noexcept {
  switch (q) {
    case Question::Euthanasia:
    case Question::JobGuar: return Typology::Consensus;
    case Question::Marijuana: return Typology::Polarized;
    case Question::FsSocSec:
    case Question::FsWelfare:
    case Question::TooMuchEqRights: return Typology::Apathetic;
  }
  return Typology::Apathetic;
}

std::string_view to_string(Typology t) noexcept {
  switch (t) {
    case Typology::Consensus: return "Consensus";
    case Typology::Polarized: return "Polarized";
    case Typology::Apathetic: return "Apathetic";
  }
  return "Apathetic";
}

std::string_view to_string(Minority m) noexcept { return kMinorityNames[index_of(m)]; }
std::string_view config_key(Minority m) noexcept { return kMinorityKeys[index_of(m)]; }

std::optional<Minority> parse_minority(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kMinorityCount; ++i) {
    if (name == kMinorityNames[i] || name == kMinorityKeys[i]) return static_cast<Minority>(i);
  }
  return std::nullopt;
}

}  // namespace fairdyn
