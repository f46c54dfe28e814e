#include "robotiq/plan/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <optional>
#include <set>

#include "robotiq/error.hpp"
#include "robotiq/skills/skills.hpp"

namespace robotiq::plan {

using nlohmann::json;
using Words = std::vector<std::string>;

namespace {

constexpr const char* kSeparator = ",";

Words tokenize(std::string_view text) {
  Words out;
  std::string cur;
  const auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    const bool digit_dot = text[i] == '.' && !cur.empty() && std::isdigit(static_cast<unsigned char>(cur.back())) &&
                           i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1]));
    if (std::isalnum(c) || text[i] == '_' || text[i] == '\'' || digit_dot) {
      cur += static_cast<char>(std::tolower(c));
    } else if (text[i] == ',' || text[i] == ';' || text[i] == '.' || text[i] == '!' || text[i] == '?') {
      flush();
      out.push_back(kSeparator);
    } else {
      flush();
    }
  }
  flush();
  return out;
}

enum class Verb { kGoTo, kPick, kPlace, kApproach, kLeave, kBring, kLocate };

struct VerbPattern {
  Words words;
  Verb verb;
};

const std::vector<VerbPattern>& verb_patterns() {
  static const std::vector<VerbPattern> patterns = [] {
    std::vector<VerbPattern> p = {
        {{"go", "to"}, Verb::kGoTo},           {{"go", "towards"}, Verb::kGoTo},
        {{"go", "toward"}, Verb::kGoTo},       {{"navigate", "to"}, Verb::kGoTo},
        {{"navigate", "towards"}, Verb::kGoTo}, {{"navigate", "toward"}, Verb::kGoTo},
        {{"move", "to"}, Verb::kGoTo},         {{"drive", "to"}, Verb::kGoTo},
        {{"head", "to"}, Verb::kGoTo},         {{"head", "towards"}, Verb::kGoTo},
        {{"return", "to"}, Verb::kGoTo},       {{"pick", "up"}, Verb::kPick},
        {{"pick"}, Verb::kPick},               {{"grab"}, Verb::kPick},
        {{"grasp"}, Verb::kPick},              {{"place"}, Verb::kPlace},
        {{"put", "down"}, Verb::kPlace},       {{"put"}, Verb::kPlace},
        {{"drop"}, Verb::kPlace},              {{"set", "down"}, Verb::kPlace},
        {{"approach"}, Verb::kApproach},       {{"leave"}, Verb::kLeave},
        {{"exit"}, Verb::kLeave},              {{"move", "away", "from"}, Verb::kLeave},
        {{"back", "away", "from"}, Verb::kLeave}, {{"bring"}, Verb::kBring},
        {{"fetch"}, Verb::kBring},             {{"deliver"}, Verb::kBring},
        {{"locate"}, Verb::kLocate},           {{"find"}, Verb::kLocate},
        {{"where", "is"}, Verb::kLocate},      {{"where's"}, Verb::kLocate},
        {{"get", "position", "of"}, Verb::kLocate},
        {{"get", "the", "position", "of"}, Verb::kLocate},
    };
    std::stable_sort(p.begin(), p.end(),
                     [](const VerbPattern& a, const VerbPattern& b) { return a.words.size() > b.words.size(); });
    return p;
  }();
  return patterns;
}

const std::set<std::string>& fillers() {
  static const std::set<std::string> f = {"please", "robot", "now", "first", "firstly", "then",
                                          "finally", "next", "also", "and", "can", "could",
                                          "would", "you", "will", "kindly", "afterwards"};
  return f;
}

const std::set<std::string>& determiners() {
  static const std::set<std::string> d = {"the", "a", "an", "some", "my", "your", "me", "this", "that"};
  return d;
}

bool is_clause_break(const Words& t, size_t i) {
  if (t[i] == kSeparator || t[i] == "then") return true;
  if (t[i] == "and") return true;
  return i + 1 < t.size() && t[i] == "after" && t[i + 1] == "that";
}

std::string join_phrase(const Words& w) {
  std::string s;
  for (const auto& x : w) {
    if (determiners().count(x) != 0) continue;
    if (!s.empty()) s += '_';
    s += x;
  }
  return s;
}

// Registry entry matched by normalized, word-aligned substring: exact match,
// else the longest entry inside the phrase, else the shortest entry
// containing the phrase.
std::optional<std::string> match(const std::string& phrase, const std::vector<std::string>& names) {
  const std::string p = skills::normalize_name(phrase);
  if (p.empty()) return std::nullopt;
  const std::string padded = "_" + p + "_";
  std::optional<std::string> inside;
  std::optional<std::string> around;
  for (const auto& name : names) {
    const std::string n = skills::normalize_name(name);
    if (n == p) return name;
    if (padded.find("_" + n + "_") != std::string::npos &&
        (!inside || n.size() > skills::normalize_name(*inside).size())) {
      inside = name;
    }
    if (("_" + n + "_").find(padded) != std::string::npos &&
        (!around || n.size() < skills::normalize_name(*around).size())) {
      around = name;
    }
  }
  return inside ? inside : around;
}

std::optional<double> parse_number(const std::string& w) {
  if (w.empty() || !(std::isdigit(static_cast<unsigned char>(w[0])) || w[0] == '.')) return std::nullopt;
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(w, &used);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (used != w.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

bool is_unit(const std::string& w) {
  return w == "m" || w == "meter" || w == "meters" || w == "metre" || w == "metres" || w == "cm" ||
         w == "centimeters" || w == "centimetres";
}

double to_meters(double v, const std::string& unit) { return unit.rfind("c", 0) == 0 ? v / 100.0 : v; }

json number_json(double v) {
  // Whole numbers stay floating point so "x" always reads as meters.
  return json(static_cast<double>(v));
}

class Parser {
 public:
  Parser(const geom::WorldMap& world) : world_(world) {
    for (const auto& [name, p] : world.locations) locations_.push_back(name);
    for (const auto& it : world.items) items_.push_back(it.name);
  }

  std::vector<SkillCall> run(const Words& tokens) {
    std::vector<Words> clauses(1);
    for (size_t i = 0; i < tokens.size(); ++i) {
      if (is_clause_break(tokens, i)) {
        if (tokens[i] == "after") ++i;
        clauses.emplace_back();
        continue;
      }
      clauses.back().push_back(tokens[i]);
    }
    std::vector<SkillCall> out;
    for (auto& c : clauses) {
      size_t start = 0;
      while (start < c.size() && fillers().count(c[start]) != 0) ++start;
      while (!c.empty() && c.size() > start && c.back() == "please") c.pop_back();
      if (start == c.size()) continue;
      clause(Words(c.begin() + static_cast<long>(start), c.end()), out);
    }
    return out;
  }

 private:
  void clause(const Words& w, std::vector<SkillCall>& out) {
    for (const auto& pat : verb_patterns()) {
      if (w.size() < pat.words.size() || !std::equal(pat.words.begin(), pat.words.end(), w.begin())) continue;
      const Words rest(w.begin() + static_cast<long>(pat.words.size()), w.end());
      switch (pat.verb) {
        case Verb::kGoTo: out.push_back(go_to(rest)); return;
        case Verb::kPick: pick(rest, out); return;
        case Verb::kPlace: place(rest, out); return;
        case Verb::kApproach: out.push_back(approach(rest)); return;
        case Verb::kLeave: out.push_back(leave(rest)); return;
        case Verb::kBring: bring(rest, out); return;
        case Verb::kLocate: out.push_back(locate(rest)); return;
      }
    }
    std::string verbs;
    for (const auto& v : supported_verbs()) verbs += (verbs.empty() ? "" : ", ") + v;
    std::string said;
    for (const auto& x : w) said += (said.empty() ? "" : " ") + x;
    throw Error(ErrorKind::kUnparseable, "cannot parse '" + said + "'; supported verbs: " + verbs);
  }

  std::string location(const Words& phrase) const {
    const std::string p = join_phrase(phrase);
    if (auto m = match(p, locations_)) return *m;
    if (auto it = match(p, items_)) return location_of(world_, *it);
    return p;
  }

  std::string item(const Words& phrase) {
    Words w = phrase;
    while (!w.empty() && (w.back() == "up" || w.back() == "down")) w.pop_back();
    const std::string p = join_phrase(w);
    if ((p == "it" || p == "them") && last_item_) return *last_item_;
    if (auto m = match(p, items_)) {
      last_item_ = *m;
      return *m;
    }
    return p;
  }

  SkillCall go_to(const Words& rest) { return {"go_to", {{"location", location(rest)}}}; }

  void pick(const Words& rest, std::vector<SkillCall>& out) { out.push_back({"pick", {{"item", item(rest)}}}); }

  void place(const Words& rest, std::vector<SkillCall>& out) {
    static const std::vector<Words> preps = {{"in", "front", "of"}, {"next", "to"}, {"close", "to"},
                                             {"near"}, {"beside"}, {"by"}, {"at"}, {"on"}, {"in"}, {"to"}};
    for (size_t i = 0; i < rest.size(); ++i) {
      for (const auto& prep : preps) {
        if (i + prep.size() > rest.size() || !std::equal(prep.begin(), prep.end(), rest.begin() + static_cast<long>(i))) continue;
        const Words what(rest.begin(), rest.begin() + static_cast<long>(i));
        const Words where(rest.begin() + static_cast<long>(i + prep.size()), rest.end());
        if (where.empty()) break;
        const std::string it = item(what);
        out.push_back(go_to(where));
        out.push_back({"place", {{"item", it}}});
        return;
      }
    }
    out.push_back({"place", {{"item", item(rest)}}});
  }

  // First "<number> <unit>" or trailing bare number, in meters.
  static std::optional<double> distance(const Words& w, size_t from = 0) {
    for (size_t i = from; i < w.size(); ++i) {
      auto v = parse_number(w[i]);
      if (!v) continue;
      if (i + 1 < w.size() && is_unit(w[i + 1])) return to_meters(*v, w[i + 1]);
    }
    return std::nullopt;
  }

  SkillCall approach(const Words& rest) {
    std::optional<int> id;
    for (size_t i = 0; i < rest.size(); ++i) {
      auto v = parse_number(rest[i]);
      if (!v || (i + 1 < rest.size() && is_unit(rest[i + 1]))) continue;
      const bool after_to = i > 0 && (rest[i - 1] == "to" || rest[i - 1] == "at" || rest[i - 1] == "within");
      if (!after_to && std::floor(*v) == *v) {
        id = static_cast<int>(*v);
        break;
      }
    }
    if (!id && world_.markers.size() == 1) id = world_.markers.front().id;
    double x = distance(rest).value_or(kDefaultStandOff);
    if (!distance(rest)) {
      // "approach marker 1 to 0.4"
      for (size_t i = 0; i + 1 < rest.size(); ++i) {
        if (rest[i] == "to" || rest[i] == "at" || rest[i] == "within") {
          if (auto v = parse_number(rest[i + 1])) x = *v;
        }
      }
    }
    json args = {{"x", number_json(x)}};
    args["marker_id"] = id ? json(*id) : json(join_phrase(rest));
    return {"approach", args};
  }

  SkillCall leave(const Words& rest) {
    double x = kDefaultStandOff;
    if (auto d = distance(rest)) {
      x = *d;
    } else {
      for (const auto& w : rest) {
        if (auto v = parse_number(w)) x = *v;
      }
    }
    return {"leave", {{"x", number_json(x)}}};
  }

  void bring(const Words& rest, std::vector<SkillCall>& out) {
    size_t to = rest.size();
    for (size_t i = 0; i < rest.size(); ++i) {
      if (rest[i] == "to" || rest[i] == "towards") {
        to = i;
        break;
      }
    }
    const std::string it = item(Words(rest.begin(), rest.begin() + static_cast<long>(to)));
    const bool known = std::find(items_.begin(), items_.end(), it) != items_.end();
    out.push_back({"go_to", {{"location", known ? location_of(world_, it) : it}}});
    out.push_back({"pick", {{"item", it}}});
    if (to == rest.size()) return;
    out.push_back({"leave", {{"x", number_json(kDefaultStandOff)}}});
    out.push_back(go_to(Words(rest.begin() + static_cast<long>(to + 1), rest.end())));
    out.push_back({"place", {{"item", it}}});
  }

  SkillCall locate(const Words& rest) {
    const std::string p = join_phrase(rest);
    auto m = match(p, locations_);
    return {"get_position", {{"name", m ? *m : p}}};
  }

  const geom::WorldMap& world_;
  std::vector<std::string> locations_;
  std::vector<std::string> items_;
  std::optional<std::string> last_item_;
};

}  // namespace

const std::vector<std::string>& supported_verbs() {
  static const std::vector<std::string> v = {"go to", "navigate to", "pick [up]", "place", "put",
                                             "approach", "leave", "bring", "locate", "where is"};
  return v;
}

std::string location_of(const geom::WorldMap& world, const std::string& item) {
  const geom::Item* it = world.find_item(item);
  if (it == nullptr) throw Error(ErrorKind::kCatalog, "unknown item '" + item + "'");
  if (world.locations.empty()) throw Error(ErrorKind::kCatalog, "map has no named locations");
  std::string best;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& [name, p] : world.locations) {
    const double d = geom::distance(p, it->pose.position());
    if (d < best_d) {
      best_d = d;
      best = name;
    }
  }
  return best;
}

std::vector<SkillCall> parse_command(std::string_view text, const geom::WorldMap& world) {
  const Words tokens = tokenize(text);
  const bool blank = std::all_of(tokens.begin(), tokens.end(), [](const std::string& t) { return t == kSeparator; });
  if (blank) throw Error(ErrorKind::kInvalidInput, "empty command");
  auto steps = Parser(world).run(tokens);
  if (steps.empty()) {
    throw Error(ErrorKind::kUnparseable, "no command recognized; supported verbs: go to, pick, place, leave, approach, bring, locate");
  }
  return steps;
}

}  // namespace robotiq::plan
