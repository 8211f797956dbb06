#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "fairdyn/core.hpp"

namespace fairdyn {

enum class Channel : std::uint8_t { Call, Text };

std::string_view to_string(Channel c) noexcept;
std::optional<Channel> parse_channel(std::string_view text) noexcept;

/// Attribute names and answer vocabulary the minority rules read.
namespace attr {
inline constexpr const char* kGender = "gender";
inline constexpr const char* kEthnicity = "ethnicity";
inline constexpr const char* kFbPrivacy = "fbprivacy";
inline constexpr const char* kEnglishNative = "english_native";
inline constexpr const char* kParentsIncome = "parents_income_bracket";
inline constexpr const char* kMotherEducation = "mother_education";
inline constexpr const char* kFatherEducation = "father_education";
inline constexpr const char* kMotherReligion = "mother_religion";
inline constexpr const char* kFatherReligion = "father_religion";

inline constexpr const char* kFemale = "female";
inline constexpr const char* kWhite = "White/Caucasian";
inline constexpr const char* kFbDefault = "default";
inline constexpr const char* kRomanCatholic = "roman_catholic";
inline constexpr const char* kUnsure = "unsure";

/// The 14 ordered parental-income brackets, lowest first.
inline constexpr std::array<const char*, 14> kIncomeBrackets = {
    "<$10k",       "$10k-$20k",   "$20k-$30k",   "$30k-$40k",   "$40k-$50k",
    "$50k-$60k",   "$60k-$75k",   "$75k-$100k",  "$100k-$125k", "$125k-$150k",
    "$150k-$175k", "$175k-$200k", "$200k-$250k", "$250k+"};

/// Index of the first bracket at or above $200k/year.
inline constexpr std::size_t kHighIncomeBracket = 12;

/// Education answers that count as a completed college/university degree.
inline constexpr std::array<const char*, 5> kCollegeGraduate = {
    "bachelors", "masters", "doctorate", "professional", "graduate"};

/// Bracket index 0..13 for a bracket label or "1".."14"; nullopt for the
/// unsure sentinel. Throws ValidationError on anything else.
std::optional<std::size_t> income_bracket(const std::string& answer);
}  // namespace attr

struct Participant {
  std::string id;
  /// survey[w-1] holds the answered attributes of wave w; absent = missing.
  std::array<std::map<std::string, std::string>, kWaveCount> survey;
  /// Bit w-1 set when the participant answered anything in wave w.
  std::uint8_t active_waves = 0;

  std::optional<std::string> attribute(const std::string& name, int wave) const;
  /// Earliest wave's non-missing answer for an attribute.
  std::optional<std::string> earliest(const std::string& name) const;
  bool active(int wave) const noexcept { return (active_waves >> (wave - 1)) & 1U; }
};

struct OpinionRecord {
  std::string participant_id;
  Question question;
  int wave;  // 1..kWaveCount
  Stance stance;
};

struct CommEvent {
  NodeId source;
  NodeId target;
  Timestamp timestamp;
  Channel channel;
};

/// Event as read from a file, before ids are resolved.
struct RawEvent {
  std::string source;
  std::string target;
  Timestamp timestamp;
  Channel channel;
};

struct Provenance {
  bool synthetic = false;
  std::uint64_t seed = 0;
  std::string config_hash;
};

/// Timestamp of each survey wave (index w-1).
using WaveSchedule = std::array<Timestamp, kWaveCount>;

/// Validated, normalized, immutable dataset. Participants are sorted by id so
/// NodeId order equals id order; events are sorted by (timestamp, source,
/// target, channel); opinions by (participant, question, wave).
class Dataset {
 public:
  /// Validates referential integrity and uniqueness, then normalizes.
  /// When `waves` is empty the schedule spans the event range evenly.
  static Dataset build(std::vector<Participant> participants, const std::vector<RawEvent>& events,
                       std::vector<OpinionRecord> opinions, std::optional<WaveSchedule> waves,
                       Provenance provenance);

  const std::vector<Participant>& participants() const noexcept { return participants_; }
  const std::vector<CommEvent>& events() const noexcept { return events_; }
  const std::vector<OpinionRecord>& opinions() const noexcept { return opinions_; }
  const WaveSchedule& wave_times() const noexcept { return waves_; }
  const Provenance& provenance() const noexcept { return provenance_; }

  std::size_t size() const noexcept { return participants_.size(); }
  const std::string& id(NodeId node) const { return participants_.at(node).id; }
  std::optional<NodeId> find(const std::string& id) const;

  /// Ground-truth stance; Missing when no record exists.
  Stance stance(NodeId node, Question q, int wave) const;

 private:
  Dataset() = default;

  std::vector<Participant> participants_;
  std::vector<CommEvent> events_;
  std::vector<OpinionRecord> opinions_;
  WaveSchedule waves_{};
  Provenance provenance_;
  std::unordered_map<std::string, NodeId> index_;
  // stances_[q][node * kWaveCount + wave - 1]
  std::array<std::vector<Stance>, 6> stances_;
};

// ---------------------------------------------------------------------------
// Codebook

enum class AttributeType : std::uint8_t { Categorical, Numeric };

/// Per-question mapping of raw answer strings to stances, plus declared
/// survey-attribute types. Attributes the codebook does not list are treated
/// as categorical.
class Codebook {
 public:
  static Codebook from_json(const nlohmann::json& doc, const std::string& source = "codebook");
  static Codebook load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  std::optional<Stance> map_answer(Question q, const std::string& raw) const;
  AttributeType type_of(const std::string& attribute) const;

  void set_answer(Question q, std::string raw, Stance s) { answers_[index_of(q)][std::move(raw)] = s; }
  void set_type(std::string attribute, AttributeType t) { types_[std::move(attribute)] = t; }

 private:
  std::array<std::map<std::string, Stance>, 6> answers_;
  std::map<std::string, AttributeType> types_;
};

// ---------------------------------------------------------------------------
// I/O

enum class DataFormat { Csv, Json };

std::optional<DataFormat> parse_format(std::string_view text) noexcept;

struct DatasetPaths {
  std::filesystem::path participants;
  std::filesystem::path events;
  std::filesystem::path opinions;
  std::optional<std::filesystem::path> waves;
  std::optional<std::filesystem::path> manifest;

  /// Standard file names inside a directory (participants.csv, ...).
  /// Optional files are only set when they exist.
  static DatasetPaths in_directory(const std::filesystem::path& dir, DataFormat format);
};

/// Loads and validates a dataset. Non-canonical stance strings are mapped
/// through `codebook`; without one they are parse errors.
Dataset load_dataset(const DatasetPaths& paths, DataFormat format, const Codebook* codebook = nullptr);

/// Writes participants/events/opinions/waves plus a manifest into `dir`.
/// Output is a pure function of the dataset, so equal datasets serialize to
/// identical bytes.
void save_dataset(const Dataset& data, const std::filesystem::path& dir, DataFormat format);

// ---------------------------------------------------------------------------
// Minorities

struct MinorityMembership {
  std::string participant_id;
  std::array<bool, kMinorityCount> flags{};
  /// Set when the underlying attributes were missing; such flags are false.
  std::array<bool, kMinorityCount> undetermined{};
  int intersection_count = 0;

  bool holds(Minority m) const noexcept { return flags[index_of(m)]; }
};

/// Applies the fixed minority rules to each participant, reading every
/// attribute from its earliest answered wave. Result order follows NodeId.
std::vector<MinorityMembership> derive_minorities(const Dataset& data);

MinorityMembership derive_membership(const Participant& p);

}  // namespace fairdyn
