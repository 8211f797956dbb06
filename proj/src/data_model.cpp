#include "fairdyn/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <spdlog/spdlog.h>

#include "fairdyn/csv.hpp"

namespace fairdyn {

using nlohmann::json;

std::string_view to_string(Channel c) noexcept { return c == Channel::Call ? "call" : "text"; }

std::optional<Channel> parse_channel(std::string_view text) noexcept {
  if (text == "call") return Channel::Call;
  if (text == "text") return Channel::Text;
  return std::nullopt;
}

std::optional<DataFormat> parse_format(std::string_view text) noexcept {
  if (text == "csv") return DataFormat::Csv;
  if (text == "json") return DataFormat::Json;
  return std::nullopt;
}

namespace attr {
std::optional<std::size_t> income_bracket(const std::string& answer) {
  if (answer == kUnsure) return std::nullopt;
  for (std::size_t i = 0; i < kIncomeBrackets.size(); ++i) {
    if (answer == kIncomeBrackets[i]) return i;
  }
  int index = 0;
  auto [ptr, ec] = std::from_chars(answer.data(), answer.data() + answer.size(), index);
  if (ec == std::errc{} && ptr == answer.data() + answer.size() && index >= 1 && index <= 14) {
    return static_cast<std::size_t>(index - 1);
  }
  throw ValidationError("parents_income_bracket \"" + answer +
                        "\" is neither one of the 14 brackets nor \"unsure\"");
}
}  // namespace attr

// ---------------------------------------------------------------------------
// Participant

std::optional<std::string> Participant::attribute(const std::string& name, int wave) const {
  if (wave < 1 || wave > kWaveCount) return std::nullopt;
  const auto& answers = survey[static_cast<std::size_t>(wave - 1)];
  auto it = answers.find(name);
  if (it == answers.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> Participant::earliest(const std::string& name) const {
  for (int w = 1; w <= kWaveCount; ++w) {
    if (auto v = attribute(name, w)) return v;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Dataset

Dataset Dataset::build(std::vector<Participant> participants, const std::vector<RawEvent>& events,
                       std::vector<OpinionRecord> opinions, std::optional<WaveSchedule> waves,
                       Provenance provenance) {
  Dataset d;
  d.provenance_ = std::move(provenance);

  std::sort(participants.begin(), participants.end(),
            [](const Participant& a, const Participant& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < participants.size(); ++i) {
    if (participants[i].id.empty()) throw ValidationError("participant with empty id");
    if (i > 0 && participants[i].id == participants[i - 1].id) {
      throw DuplicateError("duplicate participant id \"" + participants[i].id + "\"");
    }
    d.index_.emplace(participants[i].id, static_cast<NodeId>(i));
  }
  d.participants_ = std::move(participants);

  auto resolve = [&d](const std::string& id) {
    auto it = d.index_.find(id);
    if (it == d.index_.end()) throw ReferentialError(id);
    return it->second;
  };

  d.events_.reserve(events.size());
  for (const auto& e : events) {
    CommEvent ce{resolve(e.source), resolve(e.target), e.timestamp, e.channel};
    if (ce.source == ce.target) throw ValidationError("self-loop event on participant \"" + e.source + "\"");
    if (ce.timestamp < 0) throw ValidationError("negative event timestamp " + std::to_string(e.timestamp));
    d.events_.push_back(ce);
  }
  std::sort(d.events_.begin(), d.events_.end(), [](const CommEvent& a, const CommEvent& b) {
    return std::tie(a.timestamp, a.source, a.target, a.channel) <
           std::tie(b.timestamp, b.source, b.target, b.channel);
  });

  for (auto& table : d.stances_) table.assign(d.participants_.size() * kWaveCount, Stance::Missing);
  std::set<std::tuple<NodeId, std::size_t, int>> seen;
  for (const auto& op : opinions) {
    const NodeId node = resolve(op.participant_id);
    if (op.wave < 1 || op.wave > kWaveCount) {
      throw ValidationError("opinion wave " + std::to_string(op.wave) + " outside 1.." +
                            std::to_string(kWaveCount));
    }
    if (!seen.emplace(node, index_of(op.question), op.wave).second) {
      throw DuplicateError("duplicate opinion record for (" + op.participant_id + ", " +
                           std::string(shortcode(op.question)) + ", wave " + std::to_string(op.wave) +
                           ")");
    }
    d.stances_[index_of(op.question)][node * kWaveCount + static_cast<std::size_t>(op.wave - 1)] = op.stance;
    if (op.stance != Stance::Missing) {
      d.participants_[node].active_waves |= static_cast<std::uint8_t>(1U << (op.wave - 1));
    }
  }
  std::sort(opinions.begin(), opinions.end(), [](const OpinionRecord& a, const OpinionRecord& b) {
    return std::tie(a.participant_id, a.question, a.wave) < std::tie(b.participant_id, b.question, b.wave);
  });
  d.opinions_ = std::move(opinions);

  for (auto& p : d.participants_) {
    for (int w = 1; w <= kWaveCount; ++w) {
      if (!p.survey[static_cast<std::size_t>(w - 1)].empty()) {
        p.active_waves |= static_cast<std::uint8_t>(1U << (w - 1));
      }
    }
  }

  if (waves) {
    for (int w = 1; w < kWaveCount; ++w) {
      if ((*waves)[static_cast<std::size_t>(w)] <= (*waves)[static_cast<std::size_t>(w - 1)]) {
        throw ValidationError("wave timestamps must be strictly increasing");
      }
    }
    d.waves_ = *waves;
  } else if (!d.events_.empty()) {
    const Timestamp first = d.events_.front().timestamp;
    const Timestamp span = std::max<Timestamp>(d.events_.back().timestamp - first, kWaveCount - 1);
    for (int w = 0; w < kWaveCount; ++w) d.waves_[static_cast<std::size_t>(w)] = first + span * w / (kWaveCount - 1);
  } else {
    for (int w = 0; w < kWaveCount; ++w) d.waves_[static_cast<std::size_t>(w)] = w * 120 * kSecondsPerDay;
  }
  return d;
}

std::optional<NodeId> Dataset::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Stance Dataset::stance(NodeId node, Question q, int wave) const {
  if (wave < 1 || wave > kWaveCount || node >= participants_.size()) return Stance::Missing;
  return stances_[index_of(q)][node * kWaveCount + static_cast<std::size_t>(wave - 1)];
}

// ---------------------------------------------------------------------------
// Codebook

Codebook Codebook::from_json(const json& doc, const std::string& source) {
  Codebook cb;
  if (!doc.is_object()) throw ParseError(source, 0, "codebook must be a JSON object");
  if (auto it = doc.find("questions"); it != doc.end()) {
    for (const auto& [code, mapping] : it->items()) {
      auto q = parse_question(code);
      if (!q) throw ParseError(source, 0, "unknown question shortcode \"" + code + "\"");
      for (const auto& [raw, stance] : mapping.items()) {
        auto s = stance.is_string() ? parse_stance(stance.get<std::string>()) : std::nullopt;
        if (!s || *s == Stance::Missing) {
          throw ParseError(source, 0, "codebook answer \"" + raw + "\" must map to A, B or AB");
        }
        cb.set_answer(*q, raw, *s);
      }
    }
  }
  if (auto it = doc.find("attributes"); it != doc.end()) {
    for (const auto& [name, type] : it->items()) {
      const std::string t = type.is_string() ? type.get<std::string>() : type.dump();
      if (t == "categorical") {
        cb.set_type(name, AttributeType::Categorical);
      } else if (t == "numeric") {
        cb.set_type(name, AttributeType::Numeric);
      } else {
        throw ValidationError(source + ": unknown attribute type \"" + t + "\" for \"" + name + "\"");
      }
    }
  }
  return cb;
}

Codebook Codebook::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open codebook");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string(), 0, e.what());
  }
  return from_json(doc, path.string());
}

json Codebook::to_json() const {
  json doc;
  json questions = json::object();
  for (Question q : kAllQuestions) {
    json mapping = json::object();
    for (const auto& [raw, s] : answers_[index_of(q)]) mapping[raw] = std::string(to_string(s));
    if (!mapping.empty()) questions[std::string(shortcode(q))] = mapping;
  }
  doc["questions"] = questions;
  json types = json::object();
  for (const auto& [name, t] : types_) types[name] = t == AttributeType::Numeric ? "numeric" : "categorical";
  doc["attributes"] = types;
  return doc;
}

std::optional<Stance> Codebook::map_answer(Question q, const std::string& raw) const {
  const auto& m = answers_[index_of(q)];
  auto it = m.find(raw);
  if (it == m.end()) return std::nullopt;
  return it->second;
}

AttributeType Codebook::type_of(const std::string& attribute) const {
  auto it = types_.find(attribute);
  return it == types_.end() ? AttributeType::Categorical : it->second;
}

// ---------------------------------------------------------------------------
// Loading

DatasetPaths DatasetPaths::in_directory(const std::filesystem::path& dir, DataFormat format) {
  const std::string ext = format == DataFormat::Csv ? ".csv" : ".json";
  DatasetPaths p;
  p.participants = dir / ("participants" + ext);
  p.events = dir / ("events" + ext);
  p.opinions = dir / ("opinions" + ext);
  if (auto w = dir / ("waves" + ext); std::filesystem::exists(w)) p.waves = w;
  if (auto m = dir / "manifest.json"; std::filesystem::exists(m)) p.manifest = m;
  return p;
}

namespace {

struct AttributeColumn {
  std::string name;
  int wave;
};

AttributeColumn parse_attribute_column(const std::string& header, const std::string& file) {
  const auto at = header.rfind("@w");
  if (at == std::string::npos || at == 0) {
    throw ParseError(file, 1, "attribute column \"" + header + "\" is not of the form attr@w<k>");
  }
  int wave = 0;
  const char* begin = header.data() + at + 2;
  const char* end = header.data() + header.size();
  auto [ptr, ec] = std::from_chars(begin, end, wave);
  if (ec != std::errc{} || ptr != end || wave < 1 || wave > kWaveCount) {
    throw ParseError(file, 1, "attribute column \"" + header + "\" has an invalid wave");
  }
  return {header.substr(0, at), wave};
}

template <typename Int>
Int parse_int(const std::string& text, const std::string& file, std::size_t line, const char* what) {
  Int value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError(file, line, std::string("invalid ") + what + " \"" + text + "\"");
  }
  return value;
}

void check_attribute(const std::string& name, const std::string& value, const std::string& file,
                     std::size_t line) {
  if (name != attr::kParentsIncome) return;
  try {
    (void)attr::income_bracket(value);
  } catch (const ValidationError& e) {
    throw ParseError(file, line, e.what());
  }
}

Stance resolve_stance(const std::string& text, Question q, const Codebook* codebook,
                      const std::string& file, std::size_t line) {
  if (auto s = parse_stance(text)) return *s;
  if (codebook) {
    if (auto s = codebook->map_answer(q, text)) return *s;
  }
  throw ParseError(file, line,
                   "stance \"" + text + "\" for question " + std::string(shortcode(q)) +
                       (codebook ? " is not in the codebook" : " is not canonical and no codebook was given"));
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string(), 0, e.what());
  }
}

// Accepts a bare array or {"records": [...]}.
const json& records_of(const json& doc, const std::string& file) {
  if (doc.is_array()) return doc;
  if (doc.is_object() && doc.contains("records") && doc["records"].is_array()) return doc["records"];
  throw ParseError(file, 0, "expected an array of records");
}

std::string json_string(const json& rec, const char* key, const std::string& file, std::size_t n) {
  auto it = rec.find(key);
  if (it == rec.end() || it->is_null()) throw ParseError(file, n, std::string("record lacks \"") + key + "\"");
  if (it->is_string()) return it->get<std::string>();
  return it->dump();
}

std::vector<Participant> load_participants_csv(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const std::size_t id_col = table.column("id");
  std::vector<std::optional<AttributeColumn>> columns(table.header.size());
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c != id_col) columns[c] = parse_attribute_column(table.header[c], table.file);
  }
  std::vector<Participant> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    Participant p;
    p.id = row.fields[id_col];
    if (p.id.empty()) throw ParseError(table.file, row.line, "empty participant id");
    for (std::size_t c = 0; c < row.fields.size(); ++c) {
      if (!columns[c] || row.fields[c].empty()) continue;
      check_attribute(columns[c]->name, row.fields[c], table.file, row.line);
      p.survey[static_cast<std::size_t>(columns[c]->wave - 1)][columns[c]->name] = row.fields[c];
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Participant> load_participants_json(const std::filesystem::path& path) {
  const json doc = read_json(path);
  const std::string file = path.string();
  std::vector<Participant> out;
  std::size_t n = 0;
  for (const auto& rec : records_of(doc, file)) {
    ++n;
    if (!rec.is_object()) throw ParseError(file, n, "participant record must be an object");
    Participant p;
    p.id = json_string(rec, "id", file, n);
    for (const auto& [key, value] : rec.items()) {
      if (key == "id" || value.is_null()) continue;
      const auto col = parse_attribute_column(key, file);
      std::string text = value.is_string() ? value.get<std::string>() : value.dump();
      if (text.empty()) continue;
      check_attribute(col.name, text, file, n);
      p.survey[static_cast<std::size_t>(col.wave - 1)][col.name] = std::move(text);
    }
    out.push_back(std::move(p));
  }
  return out;
}

RawEvent make_event(std::string source, std::string target, const std::string& ts, const std::string& channel,
                    const std::string& file, std::size_t line) {
  auto c = parse_channel(channel);
  if (!c) throw ParseError(file, line, "unknown channel \"" + channel + "\"");
  return RawEvent{std::move(source), std::move(target), parse_int<Timestamp>(ts, file, line, "timestamp"), *c};
}

OpinionRecord make_opinion(std::string id, const std::string& question, const std::string& wave,
                           const std::string& stance, const Codebook* codebook, const std::string& file,
                           std::size_t line) {
  auto q = parse_question(question);
  if (!q) throw ParseError(file, line, "unknown question \"" + question + "\"");
  const int w = parse_int<int>(wave, file, line, "wave");
  if (w < 1 || w > kWaveCount) throw ParseError(file, line, "wave " + wave + " outside 1..6");
  return OpinionRecord{std::move(id), *q, w, resolve_stance(stance, *q, codebook, file, line)};
}

std::optional<WaveSchedule> load_waves(const std::optional<std::filesystem::path>& path, DataFormat format) {
  if (!path) return std::nullopt;
  WaveSchedule waves{};
  std::array<bool, kWaveCount> have{};
  auto put = [&](int w, Timestamp t, const std::string& file, std::size_t line) {
    if (w < 1 || w > kWaveCount) throw ParseError(file, line, "wave outside 1..6");
    waves[static_cast<std::size_t>(w - 1)] = t;
    have[static_cast<std::size_t>(w - 1)] = true;
  };
  if (format == DataFormat::Csv) {
    const auto table = csv::read(*path);
    const auto wc = table.column("wave"), tc = table.column("timestamp");
    for (const auto& row : table.rows) {
      put(parse_int<int>(row.fields[wc], table.file, row.line, "wave"),
          parse_int<Timestamp>(row.fields[tc], table.file, row.line, "timestamp"), table.file, row.line);
    }
  } else {
    const json doc = read_json(*path);
    std::size_t n = 0;
    for (const auto& rec : records_of(doc, path->string())) {
      ++n;
      put(rec.at("wave").get<int>(), rec.at("timestamp").get<Timestamp>(), path->string(), n);
    }
  }
  for (bool h : have) {
    if (!h) throw ParseError(path->string(), 0, "wave schedule must list all six waves");
  }
  return waves;
}

Provenance load_provenance(const std::optional<std::filesystem::path>& manifest) {
  Provenance p;
  if (!manifest) return p;
  const json doc = read_json(*manifest);
  if (auto it = doc.find("provenance"); it != doc.end()) {
    p.synthetic = it->value("synthetic", false);
    p.seed = it->value("seed", std::uint64_t{0});
    p.config_hash = it->value("config_hash", std::string{});
  }
  return p;
}

}  // namespace

Dataset load_dataset(const DatasetPaths& paths, DataFormat format, const Codebook* codebook) {
  std::vector<Participant> participants;
  std::vector<RawEvent> events;
  std::vector<OpinionRecord> opinions;

  if (format == DataFormat::Csv) {
    participants = load_participants_csv(paths.participants);

    const auto ev = csv::read(paths.events);
    const auto s = ev.column("source"), t = ev.column("target"), ts = ev.column("timestamp"),
               ch = ev.column("channel");
    events.reserve(ev.rows.size());
    for (const auto& row : ev.rows) {
      events.push_back(make_event(row.fields[s], row.fields[t], row.fields[ts], row.fields[ch], ev.file, row.line));
    }

    const auto op = csv::read(paths.opinions);
    const auto pc = op.column("participant_id"), qc = op.column("question"), wc = op.column("wave"),
               sc = op.column("stance");
    opinions.reserve(op.rows.size());
    for (const auto& row : op.rows) {
      opinions.push_back(make_opinion(row.fields[pc], row.fields[qc], row.fields[wc], row.fields[sc], codebook,
                                      op.file, row.line));
    }
  } else {
    participants = load_participants_json(paths.participants);

    const json ev = read_json(paths.events);
    const std::string evf = paths.events.string();
    std::size_t n = 0;
    for (const auto& rec : records_of(ev, evf)) {
      ++n;
      events.push_back(make_event(json_string(rec, "source", evf, n), json_string(rec, "target", evf, n),
                                  json_string(rec, "timestamp", evf, n), json_string(rec, "channel", evf, n),
                                  evf, n));
    }
    const json op = read_json(paths.opinions);
    const std::string opf = paths.opinions.string();
    n = 0;
    for (const auto& rec : records_of(op, opf)) {
      ++n;
      std::string stance = rec.contains("stance") && !rec["stance"].is_null() ? json_string(rec, "stance", opf, n) : "";
      opinions.push_back(make_opinion(json_string(rec, "participant_id", opf, n), json_string(rec, "question", opf, n),
                                      json_string(rec, "wave", opf, n), stance, codebook, opf, n));
    }
  }

  auto data = Dataset::build(std::move(participants), events, std::move(opinions), load_waves(paths.waves, format),
                             load_provenance(paths.manifest));
  spdlog::info("loaded dataset: {} participants, {} events, {} opinion records", data.size(), data.events().size(),
               data.opinions().size());
  return data;
}

// ---------------------------------------------------------------------------
// Saving

namespace {

std::vector<std::pair<std::string, int>> attribute_columns(const Dataset& data) {
  std::set<std::pair<std::string, int>> cols;
  for (const auto& p : data.participants()) {
    for (int w = 1; w <= kWaveCount; ++w) {
      for (const auto& [name, value] : p.survey[static_cast<std::size_t>(w - 1)]) cols.emplace(name, w);
    }
  }
  return {cols.begin(), cols.end()};
}

std::string meta_comment(const Provenance& p) {
  return "# fairdyn config_hash=" + (p.config_hash.empty() ? std::string("none") : p.config_hash) +
         " seed=" + std::to_string(p.seed);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
}

}  // namespace

void save_dataset(const Dataset& data, const std::filesystem::path& dir, DataFormat format) {
  std::filesystem::create_directories(dir);
  const auto cols = attribute_columns(data);
  const auto& prov = data.provenance();

  json manifest;
  manifest["provenance"] = {{"synthetic", prov.synthetic}, {"seed", prov.seed}, {"config_hash", prov.config_hash}};
  manifest["counts"] = {{"participants", data.size()},
                        {"events", data.events().size()},
                        {"opinions", data.opinions().size()}};
  manifest["format"] = format == DataFormat::Csv ? "csv" : "json";
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");

  if (format == DataFormat::Csv) {
    std::ostringstream ps;
    ps << meta_comment(prov) << '\n';
    std::vector<std::string> header{"id"};
    for (const auto& [name, w] : cols) header.push_back(name + "@w" + std::to_string(w));
    csv::write_row(ps, header);
    for (const auto& p : data.participants()) {
      std::vector<std::string> row{p.id};
      for (const auto& [name, w] : cols) row.push_back(p.attribute(name, w).value_or(""));
      csv::write_row(ps, row);
    }
    write_file(dir / "participants.csv", ps.str());

    std::ostringstream es;
    es << meta_comment(prov) << '\n';
    csv::write_row(es, {"source", "target", "timestamp", "channel"});
    for (const auto& e : data.events()) {
      csv::write_row(es, {data.id(e.source), data.id(e.target), std::to_string(e.timestamp),
                          std::string(to_string(e.channel))});
    }
    write_file(dir / "events.csv", es.str());

    std::ostringstream os;
    os << meta_comment(prov) << '\n';
    csv::write_row(os, {"participant_id", "question", "wave", "stance"});
    for (const auto& o : data.opinions()) {
      csv::write_row(os, {o.participant_id, std::string(shortcode(o.question)), std::to_string(o.wave),
                          std::string(to_string(o.stance))});
    }
    write_file(dir / "opinions.csv", os.str());

    std::ostringstream ws;
    ws << meta_comment(prov) << '\n';
    csv::write_row(ws, {"wave", "timestamp"});
    for (int w = 1; w <= kWaveCount; ++w) {
      csv::write_row(ws, {std::to_string(w), std::to_string(data.wave_times()[static_cast<std::size_t>(w - 1)])});
    }
    write_file(dir / "waves.csv", ws.str());
    return;
  }

  const json meta = {{"config_hash", prov.config_hash}, {"seed", prov.seed}};
  auto wrap = [&meta](json records) { return json{{"meta", meta}, {"records", std::move(records)}}; };

  json participants = json::array();
  for (const auto& p : data.participants()) {
    json rec = {{"id", p.id}};
    for (const auto& [name, w] : cols) {
      if (auto v = p.attribute(name, w)) rec[name + "@w" + std::to_string(w)] = *v;
    }
    participants.push_back(std::move(rec));
  }
  write_file(dir / "participants.json", wrap(std::move(participants)).dump(1) + "\n");

  json events = json::array();
  for (const auto& e : data.events()) {
    events.push_back({{"source", data.id(e.source)},
                      {"target", data.id(e.target)},
                      {"timestamp", e.timestamp},
                      {"channel", std::string(to_string(e.channel))}});
  }
  write_file(dir / "events.json", wrap(std::move(events)).dump(1) + "\n");

  json opinions = json::array();
  for (const auto& o : data.opinions()) {
    opinions.push_back({{"participant_id", o.participant_id},
                        {"question", std::string(shortcode(o.question))},
                        {"wave", o.wave},
                        {"stance", std::string(to_string(o.stance))}});
  }
  write_file(dir / "opinions.json", wrap(std::move(opinions)).dump(1) + "\n");

  json waves = json::array();
  for (int w = 1; w <= kWaveCount; ++w) {
    waves.push_back({{"wave", w}, {"timestamp", data.wave_times()[static_cast<std::size_t>(w - 1)]}});
  }
  write_file(dir / "waves.json", wrap(std::move(waves)).dump(1) + "\n");
}

// ---------------------------------------------------------------------------
// Minorities

namespace {

bool is_college_graduate(const std::string& answer) {
  return std::any_of(attr::kCollegeGraduate.begin(), attr::kCollegeGraduate.end(),
                     [&](const char* g) { return answer == g; });
}

std::optional<std::string> known(const Participant& p, const char* name) {
  auto v = p.earliest(name);
  if (v && (*v == attr::kUnsure || *v == "unknown")) return std::nullopt;
  return v;
}

}  // namespace

MinorityMembership derive_membership(const Participant& p) {
  MinorityMembership m;
  m.participant_id = p.id;
  auto set = [&m](Minority which, std::optional<bool> flag) {
    if (flag) {
      m.flags[index_of(which)] = *flag;
    } else {
      m.undetermined[index_of(which)] = true;
    }
  };

  if (auto g = p.earliest(attr::kGender)) {
    set(Minority::Gender, *g == attr::kFemale);
  } else {
    set(Minority::Gender, std::nullopt);
  }

  if (auto e = p.earliest(attr::kEthnicity)) {
    set(Minority::Ethnicity, *e != attr::kWhite);
  } else {
    set(Minority::Ethnicity, std::nullopt);
  }

  // Non-responders count toward the privacy minority.
  auto fb = p.earliest(attr::kFbPrivacy);
  set(Minority::FBPrivacy, !fb || *fb != attr::kFbDefault);

  if (auto en = p.earliest(attr::kEnglishNative)) {
    if (*en == "yes" || *en == "true" || *en == "1") {
      set(Minority::EnglishNative, false);
    } else if (*en == "no" || *en == "false" || *en == "0") {
      set(Minority::EnglishNative, true);
    } else {
      set(Minority::EnglishNative, std::nullopt);
    }
  } else {
    set(Minority::EnglishNative, std::nullopt);
  }

  if (auto inc = p.earliest(attr::kParentsIncome)) {
    auto bracket = attr::income_bracket(*inc);
    set(Minority::ParentsIncome, bracket ? std::optional<bool>(*bracket >= attr::kHighIncomeBracket) : std::nullopt);
  } else {
    set(Minority::ParentsIncome, std::nullopt);
  }

  {
    auto mother = known(p, attr::kMotherEducation);
    auto father = known(p, attr::kFatherEducation);
    const bool any_grad = (mother && is_college_graduate(*mother)) || (father && is_college_graduate(*father));
    if (any_grad) {
      set(Minority::ParentsEducation, false);
    } else if (mother && father) {
      set(Minority::ParentsEducation, true);
    } else {
      set(Minority::ParentsEducation, std::nullopt);
    }
  }

  {
    auto mother = known(p, attr::kMotherReligion);
    auto father = known(p, attr::kFatherReligion);
    const bool any_other = (mother && *mother != attr::kRomanCatholic) || (father && *father != attr::kRomanCatholic);
    if (any_other) {
      set(Minority::ParentsReligion, true);
    } else if (mother && father) {
      set(Minority::ParentsReligion, false);
    } else {
      set(Minority::ParentsReligion, std::nullopt);
    }
  }

  m.intersection_count = static_cast<int>(std::count(m.flags.begin(), m.flags.end(), true));
  return m;
}

std::vector<MinorityMembership> derive_minorities(const Dataset& data) {
  std::vector<MinorityMembership> out;
  out.reserve(data.size());
  for (const auto& p : data.participants()) out.push_back(derive_membership(p));
  return out;
}

}  // namespace fairdyn
