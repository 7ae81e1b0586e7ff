#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "scout/common.hpp"
#include "scout/core/asset.hpp"
#include "scout/sim/predicate.hpp"

namespace scout::sim {

struct UniverseSpec {
  std::uint64_t seed = 7;
  std::size_t asset_count = 200;
  std::vector<Language> languages{"en", "zh", "ja", "ko"};
  // Near-miss copies of real assets with one attribute changed.
  std::size_t distractor_count = 40;
  // Probability that a lookalike's development code is a one-digit mutation
  // of its source's code.
  double alias_collision_rate = 0.0;
  // Probability that an asset originating outside English is still
  // discoverable in English.
  double english_exposure = 0.45;
  double visibility_threshold = 0.5;

  void check() const {
    if (asset_count == 0) throw ConfigError("universe needs at least one asset");
    if (languages.empty()) throw ConfigError("universe needs at least one language");
    if (std::find(languages.begin(), languages.end(), "en") == languages.end()) {
      throw ConfigError("universe languages must include 'en'");
    }
    for (double p : {alias_collision_rate, english_exposure, visibility_threshold}) {
      if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("universe rates must lie in [0, 1]");
    }
  }

  friend bool operator==(const UniverseSpec&, const UniverseSpec&) = default;
};

struct Alias {
  std::string text;
  // Script-neutral aliases (codes, INN-style names) carry an empty language.
  Language language;

  friend bool operator==(const Alias&, const Alias&) = default;
};

struct Entity {
  std::string id;
  bool lookalike = false;
  std::string source_id;
  std::string modality;
  std::string target;
  std::string indication;
  std::string stage;
  std::string region;
  Language origin_language;
  std::string developer;
  std::vector<Alias> aliases;  // aliases[0] is the canonical name
  std::map<Language, double> visibility;
  double prominence = 0.0;

  const std::string& canonical() const { return aliases.front().text; }

  StageClass stage_class() const {
    return stage == "preclinical" ? StageClass::kPreclinical : StageClass::kClinical;
  }

  std::string attribute(std::string_view field) const {
    if (field == "modality") return modality;
    if (field == "target") return target;
    if (field == "indication") return indication;
    if (field == "stage") return stage;
    if (field == "stage_class") return std::string(to_string(stage_class()));
    if (field == "region") return region;
    if (field == "origin_language") return origin_language;
    if (field == "developer") return developer;
    throw ParseError("unknown sim attribute '" + std::string(field) + "'");
  }

  Predicate::Lookup lookup() const {
    return [this](std::string_view field) { return attribute(field); };
  }

  bool visible_in(const Language& language, double threshold) const {
    auto it = visibility.find(language);
    return it != visibility.end() && it->second >= threshold;
  }

  friend bool operator==(const Entity&, const Entity&) = default;
};

namespace vocab {

inline const std::vector<std::string>& modalities() {
  static const std::vector<std::string> v{"small molecule",  "monoclonal antibody",
                                          "bispecific antibody", "antibody-drug conjugate",
                                          "cell therapy",    "gene therapy",
                                          "sirna",           "peptide"};
  return v;
}

inline const std::vector<std::string>& targets() {
  static const std::vector<std::string> v{"pd-1", "her2",  "kras g12c", "egfr",
                                          "cd19", "bcma",  "tshr",      "lat1",
                                          "glp-1r", "il-17a", "hbv rna", "dystrophin"};
  return v;
}

inline const std::vector<std::string>& indications() {
  static const std::vector<std::string> v{"non-small cell lung cancer",
                                          "breast cancer",
                                          "duchenne muscular dystrophy",
                                          "chronic hepatitis b",
                                          "thyroid eye disease",
                                          "obesity",
                                          "multiple myeloma",
                                          "psoriasis",
                                          "acute myeloid leukemia",
                                          "gastric cancer"};
  return v;
}

inline const std::vector<std::string>& stages() {
  static const std::vector<std::string> v{"preclinical", "phase 1", "phase 2", "phase 3"};
  return v;
}

inline std::vector<std::string> regions_for(const Language& language) {
  if (language == "en") return {"united states", "united states", "united states", "australia"};
  if (language == "zh") return {"china"};
  if (language == "ja") return {"japan"};
  if (language == "ko") return {"korea"};
  if (language == "pt") return {"brazil"};
  if (language == "de") return {"germany"};
  if (language == "fr") return {"france"};
  if (language == "es") return {"spain"};
  if (language == "ru") return {"cis"};
  return {language};
}

}  // namespace vocab

namespace detail {

template <typename T>
const T& pick(SeededRng& rng, const std::vector<T>& items) {
  return items[static_cast<std::size_t>(rng.below(items.size()))];
}

inline std::string stem_for(SeededRng& rng, const std::string& modality) {
  static const std::map<std::string, std::vector<std::string>> stems{
      {"small molecule", {"tinib", "lisib", "rafenib", "ciclib"}},
      {"monoclonal antibody", {"lizumab", "tuzumab", "cimab"}},
      {"bispecific antibody", {"tamab", "limab"}},
      {"antibody-drug conjugate", {"tuzumab vedotin", "mab deruxtecan"}},
      {"cell therapy", {"leucel", "gene autoleucel"}},
      {"gene therapy", {"gene vexaparvovec", "gene elparvovec"}},
      {"sirna", {"siran", "meran"}},
      {"peptide", {"tide", "glutide"}}};
  return pick(rng, stems.at(modality));
}

inline std::string latin_word(SeededRng& rng, int syllables) {
  static const std::vector<std::string> pool{"to", "la", "bru", "ze", "ni", "vo", "ra",
                                             "ti", "mo", "se", "fa", "lo", "ki", "du",
                                             "ser", "pa", "qui", "re", "xo", "ga"};
  std::string out;
  for (int i = 0; i < syllables; ++i) out += pick(rng, pool);
  return out;
}

inline std::string local_script(SeededRng& rng, const Language& language, int length) {
  static const std::map<std::string, std::vector<std::string>> pools{
      {"zh", {"托", "拉", "布", "替", "尼", "西", "普", "利", "卡", "瑞",
              "泽", "奥", "沙", "格", "达", "伏", "恩", "美", "凯", "索"}},
      {"ja", {"ト", "ラ", "ブ", "チ", "ニ", "セ", "マ", "ツ", "ズ", "リ",
              "カ", "ル", "ム", "ン", "パ", "キ", "ロ", "ソ", "テ", "ナ"}},
      {"ko", {"토", "라", "브", "티", "니", "세", "마", "주", "맙", "리",
              "카", "루", "무", "파", "키", "로", "소", "테", "나", "보"}},
      {"ru", {"то", "ра", "би", "ни", "се", "ма", "зу", "ли", "ка", "ру",
              "во", "ге", "де", "ло", "ти", "па", "ки", "со", "на", "бо"}}};
  auto it = pools.find(language);
  if (it == pools.end()) return latin_word(rng, length) + "e";
  std::string out;
  for (int i = 0; i < length; ++i) out += pick(rng, it->second);
  return out;
}

inline std::string dev_code(SeededRng& rng) {
  std::string code;
  const int letters = 2 + static_cast<int>(rng.below(2));
  for (int i = 0; i < letters; ++i) code.push_back(static_cast<char>('A' + rng.below(26)));
  code.push_back('-');
  const int digits = 3 + static_cast<int>(rng.below(2));
  for (int i = 0; i < digits; ++i) code.push_back(static_cast<char>('0' + rng.below(10)));
  return code;
}

inline std::string developer_name(SeededRng& rng) {
  static const std::vector<std::string> suffixes{" Bio", " Therapeutics", " Pharma",
                                                 " Biosciences", " Medicines"};
  std::string name = latin_word(rng, 2 + static_cast<int>(rng.below(2)));
  name[0] = static_cast<char>(name[0] - 'a' + 'A');
  return name + pick(rng, suffixes);
}

class NameRegistry {
 public:
  bool claim(const std::string& name) {
    if (name.empty()) return false;
    return taken_.insert(normalize_name(name)).second;
  }

 private:
  std::set<std::string> taken_;
};

}  // namespace detail

class Universe {
 public:
  Universe() = default;

  static Universe generate(const UniverseSpec& spec) {
    spec.check();
    Universe u;
    u.spec_ = spec;
    SeededRng rng(mix_seed(spec.seed, "universe"));
    detail::NameRegistry names;

    std::vector<Language> origin_pool;
    for (const auto& lang : spec.languages) {
      // English-origin programs are roughly as common as all others combined.
      const int weight = lang == "en" ? static_cast<int>(spec.languages.size()) - 1 : 1;
      for (int i = 0; i < std::max(weight, 1); ++i) origin_pool.push_back(lang);
    }

    for (std::size_t i = 0; i < spec.asset_count; ++i) {
      Entity e;
      e.id = make_id('A', i);
      e.modality = detail::pick(rng, vocab::modalities());
      e.target = detail::pick(rng, vocab::targets());
      e.indication = detail::pick(rng, vocab::indications());
      e.stage = detail::pick(rng, vocab::stages());
      e.origin_language = detail::pick(rng, origin_pool);
      e.region = detail::pick(rng, vocab::regions_for(e.origin_language));
      e.developer = detail::developer_name(rng);
      e.prominence = rng.uniform();
      u.assign_names(e, rng, names, nullptr);
      u.assign_visibility(e, rng);
      u.entities_.push_back(std::move(e));
    }

    static const std::vector<std::string> mutable_fields{"modality", "target", "indication",
                                                         "stage"};
    for (std::size_t i = 0; i < spec.distractor_count; ++i) {
      const Entity source = u.entities_[static_cast<std::size_t>(rng.below(spec.asset_count))];
      Entity e = source;
      e.id = make_id('D', i);
      e.lookalike = true;
      e.source_id = source.id;
      const std::string& field = detail::pick(rng, mutable_fields);
      const auto& options = field == "modality"     ? vocab::modalities()
                            : field == "target"     ? vocab::targets()
                            : field == "indication" ? vocab::indications()
                                                    : vocab::stages();
      std::string replacement = e.attribute(field);
      while (replacement == e.attribute(field)) replacement = detail::pick(rng, options);
      if (field == "modality") e.modality = replacement;
      if (field == "target") e.target = replacement;
      if (field == "indication") e.indication = replacement;
      if (field == "stage") e.stage = replacement;
      e.developer = detail::developer_name(rng);
      e.prominence = rng.uniform();
      e.aliases.clear();
      u.assign_names(e, rng, names, &source);
      u.assign_visibility(e, rng);
      u.entities_.push_back(std::move(e));
    }
    u.build_index();
    return u;
  }

  const UniverseSpec& spec() const { return spec_; }
  const std::vector<Entity>& entities() const { return entities_; }

  const Entity* find(std::string_view id) const {
    for (const auto& e : entities_) {
      if (e.id == id) return &e;
    }
    return nullptr;
  }

  // Entity a name resolves to through the alias table.
  const Entity* resolve(std::string_view name) const {
    auto it = alias_index_.find(normalize_name(name));
    return it == alias_index_.end() ? nullptr : &entities_[it->second];
  }

  // Exhaustive scan; the ground truth for every recall figure.
  std::vector<const Entity*> oracle_answer(const Predicate& query) const {
    std::vector<const Entity*> out;
    for (const auto& e : entities_) {
      if (query.eval(e.lookup())) out.push_back(&e);
    }
    return out;
  }

  bool alias_index_injective() const {
    std::size_t total = 0;
    for (const auto& e : entities_) total += e.aliases.size();
    return total == alias_index_.size();
  }

  // Fully enriched record with one provenance pair per populated field.
  AssetRecord record(const Entity& e) const {
    AssetRecord r;
    r.canonical_name = e.canonical();
    for (const auto& a : e.aliases) r.aliases.insert(a.text);
    r.origin_language = e.origin_language;
    r.stage_class = e.stage_class();
    r.stage_detail = e.stage;
    r.developers = {e.developer};
    r.modality = e.modality;
    r.targets = {e.target};
    r.moa_short = e.target + " modulator";
    r.indications = {e.indication};
    if (r.stage_class == StageClass::kClinical) {
      TrialRecord t;
      t.indication = e.indication;
      t.phase = e.stage;
      t.site_countries = {e.region};
      r.trials.push_back(std::move(t));
    }
    const std::string url = "https://registry.sim/" + e.id;
    auto cite = [&](const char* field, const std::string& value) {
      r.provenance.push_back({field, url, std::string(field) + ": " + value});
    };
    cite("stage_detail", e.stage);
    cite("developers", e.developer);
    cite("modality", e.modality);
    cite("targets", e.target);
    cite("moa_short", r.moa_short);
    cite("indications", e.indication);
    if (!r.trials.empty()) cite("trials", e.indication + " / " + e.stage);
    return r;
  }

  // ---- serialization ------------------------------------------------------

  void save(std::ostream& out) const {
    Json header{{"schema", 1},
                {"kind", "universe"},
                {"seed", spec_.seed},
                {"asset_count", spec_.asset_count},
                {"languages", spec_.languages},
                {"distractor_count", spec_.distractor_count},
                {"alias_collision_rate", spec_.alias_collision_rate},
                {"english_exposure", spec_.english_exposure},
                {"visibility_threshold", spec_.visibility_threshold}};
    out << header.dump() << '\n';
    for (const auto& e : entities_) {
      Json aliases = Json::array();
      for (const auto& a : e.aliases) aliases.push_back({{"text", a.text}, {"language", a.language}});
      Json visibility = Json::object();
      for (const auto& [lang, w] : e.visibility) visibility[lang] = w;
      Json line{{"schema", 1},
                {"kind", "entity"},
                {"id", e.id},
                {"lookalike", e.lookalike},
                {"source", e.source_id},
                {"modality", e.modality},
                {"target", e.target},
                {"indication", e.indication},
                {"stage", e.stage},
                {"region", e.region},
                {"origin_language", e.origin_language},
                {"developer", e.developer},
                {"aliases", aliases},
                {"visibility", visibility},
                {"prominence", e.prominence}};
      out << line.dump() << '\n';
    }
  }

  static Universe load(std::istream& in) {
    Universe u;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      const Json j = Json::parse(line);
      if (j.value("schema", 0) != 1) throw ParseError("unsupported universe schema");
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "universe") {
        u.spec_.seed = j.at("seed").get<std::uint64_t>();
        u.spec_.asset_count = j.at("asset_count").get<std::size_t>();
        u.spec_.languages = j.at("languages").get<std::vector<Language>>();
        u.spec_.distractor_count = j.at("distractor_count").get<std::size_t>();
        u.spec_.alias_collision_rate = j.at("alias_collision_rate").get<double>();
        u.spec_.english_exposure = j.at("english_exposure").get<double>();
        u.spec_.visibility_threshold = j.at("visibility_threshold").get<double>();
        have_header = true;
      } else if (kind == "entity") {
        Entity e;
        e.id = j.at("id").get<std::string>();
        e.lookalike = j.at("lookalike").get<bool>();
        e.source_id = j.at("source").get<std::string>();
        e.modality = j.at("modality").get<std::string>();
        e.target = j.at("target").get<std::string>();
        e.indication = j.at("indication").get<std::string>();
        e.stage = j.at("stage").get<std::string>();
        e.region = j.at("region").get<std::string>();
        e.origin_language = j.at("origin_language").get<std::string>();
        e.developer = j.at("developer").get<std::string>();
        for (const auto& a : j.at("aliases")) {
          e.aliases.push_back({a.at("text").get<std::string>(), a.at("language").get<std::string>()});
        }
        for (const auto& [lang, w] : j.at("visibility").items()) e.visibility[lang] = w.get<double>();
        e.prominence = j.at("prominence").get<double>();
        if (e.aliases.empty()) throw ParseError("entity " + e.id + " has no aliases");
        u.entities_.push_back(std::move(e));
      } else {
        throw ParseError("unexpected record kind in universe file: " + kind);
      }
    }
    if (!have_header) throw ParseError("universe file lacks a header line");
    u.build_index();
    return u;
  }

  friend bool operator==(const Universe& a, const Universe& b) {
    return a.spec_ == b.spec_ && a.entities_ == b.entities_;
  }

 private:
  static std::string make_id(char prefix, std::size_t index) {
    std::string digits = std::to_string(index);
    return std::string(1, prefix) + std::string(4 - std::min<std::size_t>(4, digits.size()), '0') +
           digits;
  }

  void assign_names(Entity& e, SeededRng& rng, detail::NameRegistry& names,
                    const Entity* lookalike_of) {
    std::string canonical;
    do {
      canonical = detail::latin_word(rng, 2 + static_cast<int>(rng.below(2))) +
                  detail::stem_for(rng, e.modality);
    } while (!names.claim(canonical));
    e.aliases.push_back({canonical, ""});

    std::string code;
    if (lookalike_of != nullptr && rng.chance(spec_.alias_collision_rate)) {
      for (const auto& a : lookalike_of->aliases) {
        if (a.text.find('-') != std::string::npos && std::isupper(static_cast<unsigned char>(a.text[0]))) {
          code = a.text;
          char& last = code.back();
          last = static_cast<char>('0' + (last - '0' + 1) % 10);
          break;
        }
      }
      if (!names.claim(code)) code.clear();
    }
    while (code.empty()) {
      code = detail::dev_code(rng);
      if (!names.claim(code)) code.clear();
    }
    e.aliases.push_back({code, ""});

    if (e.origin_language != "en") {
      std::string local;
      do {
        local = detail::local_script(rng, e.origin_language, 3 + static_cast<int>(rng.below(3)));
      } while (!names.claim(local));
      e.aliases.push_back({local, e.origin_language});
    }
    if (rng.chance(0.3)) {
      std::string second;
      do {
        second = detail::dev_code(rng);
      } while (!names.claim(second));
      e.aliases.push_back({second, ""});
    }
    if (e.stage == "phase 3" && rng.chance(0.3)) {
      std::string brand;
      do {
        brand = detail::latin_word(rng, 2) + "a";
        brand[0] = static_cast<char>(brand[0] - 'a' + 'A');
      } while (!names.claim(brand));
      e.aliases.push_back({brand, ""});
    }
  }

  void assign_visibility(Entity& e, SeededRng& rng) const {
    for (const auto& lang : spec_.languages) {
      double w = 0.0;
      if (lang == e.origin_language) {
        w = 0.6 + 0.4 * rng.uniform();
      } else if (lang == "en") {
        w = rng.chance(spec_.english_exposure) ? 0.5 + 0.5 * rng.uniform() : 0.45 * rng.uniform();
      } else {
        w = 0.3 * rng.uniform();
      }
      e.visibility[lang] = w;
    }
  }

  void build_index() {
    alias_index_.clear();
    for (std::size_t i = 0; i < entities_.size(); ++i) {
      for (const auto& a : entities_[i].aliases) alias_index_.emplace(normalize_name(a.text), i);
    }
  }

  UniverseSpec spec_;
  std::vector<Entity> entities_;
  std::unordered_map<std::string, std::size_t> alias_index_;
};

}  // namespace scout::sim
