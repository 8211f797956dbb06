#include <doctest.h>

#include <fstream>
#include <sstream>

#include "fairdyn/data_model.hpp"
#include "fairdyn/synthetic.hpp"
#include "temp_dir.hpp"

using namespace fairdyn;
using fairdyn::testing::TempDir;

namespace {

void write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_small_dataset(const TempDir& dir, const std::string& events, const std::string& opinions) {
  write(dir / "participants.csv", "id,gender@w1,parents_income_bracket@w1\np1,female,$250k+\np2,male,$50k-$60k\n");
  write(dir / "events.csv", "source,target,timestamp,channel\n" + events);
  write(dir / "opinions.csv", "participant_id,question,wave,stance\n" + opinions);
}

Participant with(std::map<std::string, std::string> wave1) {
  Participant p;
  p.id = "x";
  p.survey[0] = std::move(wave1);
  return p;
}

}  // namespace

TEST_CASE("question registry and typology") {
  CHECK(typology(Question::Euthanasia) == Typology::Consensus);
  CHECK(typology(Question::JobGuar) == Typology::Consensus);
  CHECK(typology(Question::Marijuana) == Typology::Polarized);
  CHECK(typology(Question::FsSocSec) == Typology::Apathetic);
  CHECK(typology(Question::FsWelfare) == Typology::Apathetic);
  CHECK(typology(Question::TooMuchEqRights) == Typology::Apathetic);
  for (Question q : kAllQuestions) CHECK(parse_question(shortcode(q)) == q);
  CHECK_FALSE(parse_question("abortion").has_value());
}

TEST_CASE("stance parsing") {
  CHECK(parse_stance("A") == Stance::A);
  CHECK(parse_stance("AB") == Stance::AB);
  CHECK(parse_stance("") == Stance::Missing);
  CHECK_FALSE(parse_stance("yes").has_value());
}

TEST_CASE("load a well-formed CSV dataset") {
  TempDir dir("load-ok");
  write_small_dataset(dir,
                      "p1,p2,100,call\np2,p1,200,text\np1,p2,300,text\np2,p1,400,call\n",
                      "p1,euthanasia,1,A\np2,euthanasia,2,B\n");
  const Dataset d = load_dataset(DatasetPaths::in_directory(dir.path(), DataFormat::Csv), DataFormat::Csv);
  CHECK(d.size() == 2);
  CHECK(d.events().size() == 4);
  CHECK(d.opinions().size() == 2);
  CHECK(d.stance(*d.find("p1"), Question::Euthanasia, 1) == Stance::A);
  CHECK(d.stance(*d.find("p1"), Question::Euthanasia, 2) == Stance::Missing);
}

TEST_CASE("unknown participant in an event is a referential error naming the id") {
  TempDir dir("load-ref");
  write_small_dataset(dir, "p1,X99,100,call\n", "p1,euthanasia,1,A\n");
  try {
    (void)load_dataset(DatasetPaths::in_directory(dir.path(), DataFormat::Csv), DataFormat::Csv);
    FAIL("expected a referential error");
  } catch (const ReferentialError& e) {
    CHECK(e.id() == "X99");
    CHECK(std::string(e.what()).find("X99") != std::string::npos);
  }
}

TEST_CASE("duplicate opinion rows are rejected") {
  TempDir dir("load-dup");
  write_small_dataset(dir, "p1,p2,100,call\n", "p1,euthanasia,2,A\np1,euthanasia,2,B\n");
  CHECK_THROWS_AS(load_dataset(DatasetPaths::in_directory(dir.path(), DataFormat::Csv), DataFormat::Csv),
                  DuplicateError);
}

TEST_CASE("non-canonical stances need a codebook") {
  TempDir dir("load-codebook");
  write_small_dataset(dir, "p1,p2,100,call\n", "p1,euthanasia,1,agree\n");
  const auto paths = DatasetPaths::in_directory(dir.path(), DataFormat::Csv);
  CHECK_THROWS_AS(load_dataset(paths, DataFormat::Csv), ParseError);
  Codebook cb;
  cb.set_answer(Question::Euthanasia, "agree", Stance::A);
  const Dataset d = load_dataset(paths, DataFormat::Csv, &cb);
  CHECK(d.stance(*d.find("p1"), Question::Euthanasia, 1) == Stance::A);
}

TEST_CASE("missing codebook file raises a parse error naming it") {
  TempDir dir("codebook-missing");
  const auto path = dir / "codebook.json";
  try {
    (void)Codebook::load(path);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.file().find("codebook.json") != std::string::npos);
  }
}

TEST_CASE("save and reload round trip is byte-stable") {
  TempDir dir("roundtrip");
  auto cfg = SyntheticConfig::defaults();
  cfg.population = 30;
  const Dataset d = generate_synthetic(cfg, 5);
  for (DataFormat f : {DataFormat::Csv, DataFormat::Json}) {
    const auto first = dir / (f == DataFormat::Csv ? "csv1" : "json1");
    const auto second = dir / (f == DataFormat::Csv ? "csv2" : "json2");
    save_dataset(d, first, f);
    const Dataset back = load_dataset(DatasetPaths::in_directory(first, f), f);
    CHECK(back.size() == d.size());
    CHECK(back.events().size() == d.events().size());
    CHECK(back.opinions().size() == d.opinions().size());
    CHECK(back.wave_times() == d.wave_times());
    save_dataset(back, second, f);
    const std::string ext = f == DataFormat::Csv ? ".csv" : ".json";
    for (const char* name : {"participants", "events", "opinions"}) {
      CHECK(slurp(first / (name + ext)) == slurp(second / (name + ext)));
    }
  }
}

TEST_CASE("minority derivation rules") {
  SUBCASE("high parental income") {
    const auto m = derive_membership(with({{attr::kParentsIncome, "$250k+"}}));
    CHECK(m.holds(Minority::ParentsIncome));
  }
  SUBCASE("one non-catholic parent") {
    const auto m = derive_membership(
        with({{attr::kMotherReligion, attr::kRomanCatholic}, {attr::kFatherReligion, "protestant"}}));
    CHECK(m.holds(Minority::ParentsReligion));
  }
  SUBCASE("both parents catholic") {
    const auto m = derive_membership(
        with({{attr::kMotherReligion, attr::kRomanCatholic}, {attr::kFatherReligion, attr::kRomanCatholic}}));
    CHECK_FALSE(m.holds(Minority::ParentsReligion));
    CHECK_FALSE(m.undetermined[index_of(Minority::ParentsReligion)]);
  }
  SUBCASE("neither parent holds a degree") {
    const auto m = derive_membership(
        with({{attr::kMotherEducation, "high_school"}, {attr::kFatherEducation, "some_college"}}));
    CHECK(m.holds(Minority::ParentsEducation));
  }
  SUBCASE("everything missing") {
    const auto m = derive_membership(with({}));
    for (Minority x : kAllMinorities) {
      if (x == Minority::FBPrivacy) continue;  // non-responders count toward the privacy minority
      CHECK_FALSE(m.holds(x));
      CHECK(m.undetermined[index_of(x)]);
    }
  }
  SUBCASE("unsure income is undetermined") {
    const auto m = derive_membership(with({{attr::kParentsIncome, attr::kUnsure}}));
    CHECK_FALSE(m.holds(Minority::ParentsIncome));
    CHECK(m.undetermined[index_of(Minority::ParentsIncome)]);
  }
  SUBCASE("earliest wave wins") {
    Participant p;
    p.id = "y";
    p.survey[1][attr::kGender] = "female";
    p.survey[3][attr::kGender] = "male";
    CHECK(derive_membership(p).holds(Minority::Gender));
  }
}

TEST_CASE("synthetic generator population shares and determinism") {
  auto cfg = SyntheticConfig::defaults();
  cfg.population = 200;
  const Dataset a = generate_synthetic(cfg, 11);
  const Dataset b = generate_synthetic(cfg, 11);
  const auto members = derive_minorities(a);
  int women = 0;
  for (const auto& m : members) women += m.holds(Minority::Gender) ? 1 : 0;
  CHECK(std::abs(women - 96) <= 1);

  TempDir dir("synthetic-determinism");
  save_dataset(a, dir / "a", DataFormat::Csv);
  save_dataset(b, dir / "b", DataFormat::Csv);
  for (const char* name : {"participants.csv", "events.csv", "opinions.csv", "waves.csv"}) {
    CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
  }
}

TEST_CASE("synthetic config validation") {
  auto cfg = SyntheticConfig::defaults();
  cfg.minority_fraction[index_of(Minority::Gender)] = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  CHECK_THROWS_AS(SyntheticConfig::from_json({{"population", 1}}).validate(), ValidationError);
}
